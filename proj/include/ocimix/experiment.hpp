#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ocimix/analysis.hpp"
#include "ocimix/stream.hpp"
#include "ocimix/trainer.hpp"

namespace ocimix::cli {

struct DatasetSpec {
  enum class Kind { blobs, patterns, idx };
  Kind kind = Kind::blobs;

  std::size_t class_count = 10;
  std::size_t per_class_train = 500;
  std::size_t per_class_test = 100;

  // blobs
  std::size_t dim = 64;
  double separation = 2.5;
  std::size_t image_side = 0;  // >0: reshape dim to side x side images

  // patterns
  std::size_t side = 10;
  double similarity = 0.6;

  // idx
  std::string train_images, train_labels, test_images, test_labels;
};

struct ExperimentConfig {
  DatasetSpec dataset;
  std::size_t classes_per_task = 2;
  trainer::TrainerConfig trainer;
  std::vector<std::uint64_t> seeds;
  std::string out_dir = "out";

  // analyze-da
  std::vector<analysis::DAConfig> da_configs;
  std::size_t mc_samples = 64;
  std::size_t aa_seeds = 1;
};

// Command-line overrides applied on top of the config file.
struct Overrides {
  std::optional<std::string> out_dir;
  std::optional<std::vector<std::uint64_t>> seeds;
  std::optional<std::string> method;
};

// Parses and validates a JSON experiment config. Throws std::runtime_error
// with a descriptive message; referenced dataset files must exist.
ExperimentConfig load_config(const std::string& path);

// Builds the task sequence for one run seed (data and split randomness are
// derived from the run seed).
std::vector<stream::TaskSpec> build_tasks(const ExperimentConfig& config,
                                          std::uint64_t run_seed);

// Exit status 0 on success, 2 on config/validation errors (no outputs
// written), 1 on runtime failure (partial outputs removed).
int cmd_train(const std::string& config_path, const Overrides& overrides);
int cmd_analyze_da(const std::string& config_path, const Overrides& overrides);
int cmd_boundary_trace(const std::string& config_path, const Overrides& overrides);
int cmd_eval(const std::string& config_path, const std::string& model_path,
             const Overrides& overrides);

// Sweep parallelism bound: OCIMIX_THREADS when set, hardware concurrency
// otherwise.
std::size_t sweep_thread_limit();

std::vector<std::uint64_t> parse_seed_list(const std::string& csv);

}  // namespace ocimix::cli
