#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ocimix/augment.hpp"
#include "ocimix/memory.hpp"
#include "ocimix/metrics.hpp"
#include "ocimix/model.hpp"
#include "ocimix/stream.hpp"

namespace ocimix::trainer {

enum class Method { finetune, er_plain, er_da, er_enmix, er_adpmix, er_dualmix };
enum class Retrieval { er, mir };

Method method_from_string(const std::string& name);
std::string method_to_string(Method m);

struct TrainerConfig {
  double lr = 0.1;
  std::size_t batch_size = 10;
  std::size_t memory_batch_size = 10;
  std::size_t memory_capacity = 500;
  Retrieval retrieval = Retrieval::er;
  Method method = Method::er_plain;
  augment::MixConfig mix{};
  std::vector<augment::AugmentOp> pipeline;
  std::vector<std::size_t> hidden = {256, 128};
  std::uint64_t seed = 1;

  std::size_t mir_candidates = 0;       // 0 -> 2 * memory_batch_size
  bool augment_current = false;         // standard DA on the current-task path
  bool dualmix_include_plain_aug = false;
  bool freeze_buffer = false;           // defer buffer updates to task end
  std::size_t trace_every = 0;          // misclassification trace cadence (batches)
};

struct LossPoint {
  std::size_t step;
  std::size_t task;
  double loss;
};

struct NormPoint {
  std::size_t step;
  std::size_t task;
  double new_mean;                  // mean head-row norm over current-task classes
  std::optional<double> old_mean;   // same over previously seen classes
};

struct BoundaryPoint {
  std::size_t step;
  std::size_t task;
  std::optional<double> er_new_as_old;
  std::optional<double> er_old_as_new;
};

struct RunLog {
  metrics::AccuracyMatrix accuracy;
  std::vector<LossPoint> loss_trace;
  std::vector<NormPoint> norm_trace;
  std::vector<metrics::Confusion> confusions;      // one per task boundary
  std::vector<BoundaryPoint> boundary_trace;
  std::vector<std::optional<double>> m_bar;        // one per task boundary
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> buffer_histograms;
};

struct TrainResult {
  nn::Model model;
  memory::ReplayBuffer buffer;
  RunLog log;
};

// Everything compose_training_batch needs besides the data itself.
struct ComposeContext {
  Method method = Method::er_plain;
  const augment::MixConfig* mix = nullptr;
  const std::vector<augment::AugmentOp>* pipeline = nullptr;
  std::vector<std::size_t> current_classes;
  std::vector<std::size_t> old_classes;
  std::size_t class_count = 0;
  bool augment_current = false;
  bool include_plain_aug = false;
  std::mt19937_64* rng_augment = nullptr;
  std::mt19937_64* rng_mix = nullptr;
};

// Method-dependent batch assembly. Hard labels are lifted to one-hot soft
// labels; memory samples are copied, never mutated in place.
std::vector<augment::MixedExample> compose_training_batch(
    const stream::StreamBatch& current, const std::vector<stream::Example>& memory_batch,
    const nn::Model& model, const ComposeContext& ctx);

// Per-task top-1 accuracies plus one global confusion matrix over every
// seen test sample.
std::pair<std::vector<double>, metrics::Confusion> evaluate(
    const nn::Model& model, const std::vector<stream::TaskSpec>& tasks_seen);

// Single-pass training over the task sequence: per incoming batch, retrieve
// a memory batch, compose, take one SGD step, then reservoir-update the
// buffer. Evaluates on all seen tasks at every task boundary.
TrainResult train_stream(const TrainerConfig& config,
                         const std::vector<stream::TaskSpec>& tasks);

}  // namespace ocimix::trainer
