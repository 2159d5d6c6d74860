#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "ocimix/augment.hpp"
#include "ocimix/model.hpp"
#include "ocimix/stream.hpp"
#include "ocimix/trainer.hpp"

namespace ocimix::analysis {

// Weights of the replay term in the combined empirical risk:
// lambda = |current task| / |memory|, beta = 1 / (1 + 2|current| / |all seen|).
struct RiskWeights {
  double lambda = 1.0;
  double beta = 0.5;

  static RiskWeights from_counts(std::size_t current_count, std::size_t memory_count,
                                 std::size_t seen_total);
  void validate() const;
};

// One realization of a stochastic transform applied to a whole memory set.
// Set-level so that a single realization can couple randomness across items
// (a per-item pipeline is wrapped via pipeline_transform).
using SetTransform =
    std::function<std::vector<stream::Example>(const std::vector<stream::Example>&,
                                               std::mt19937_64&)>;

// Independent parameter draws per item (the training-path convention).
SetTransform pipeline_transform(std::vector<augment::AugmentOp> ops);

// One parameter draw per realization, applied to every item: the transform
// family semantics behind the forgetting-gap and covariance estimators. With
// per-item draws the pairwise loss covariance over realizations degenerates
// to noise around zero.
SetTransform shared_pipeline_transform(std::vector<augment::AugmentOp> ops);

// beta * lambda * mean CE loss over the augmented memory set.
double memory_risk(const nn::Model& model, const std::vector<stream::Example>& augmented_memory,
                   const RiskWeights& weights);

// Mean CE loss over all training data seen so far (offline diagnostics).
double objective_risk(const nn::Model& model, const std::vector<stream::Example>& all_seen);

struct McEstimate {
  double mean = 0.0;
  double stddev = 0.0;  // over realizations / pairs
  std::size_t n = 0;

  double standard_error() const;
};

// Monte-Carlo forgetting gap: over mc_samples realizations of g, the mean of
// (memory_risk over {memory + g(memory)} - objective_risk)^2.
double forgetting_gap(const nn::Model& model, const SetTransform& g,
                      const std::vector<stream::Example>& memory,
                      const std::vector<stream::Example>& all_seen,
                      const RiskWeights& weights, std::size_t mc_samples,
                      std::uint64_t seed);
McEstimate forgetting_gap_detailed(const nn::Model& model, const SetTransform& g,
                                   const std::vector<stream::Example>& memory,
                                   const std::vector<stream::Example>& all_seen,
                                   const RiskWeights& weights, std::size_t mc_samples,
                                   std::uint64_t seed);

// Mean pairwise covariance (over the g-randomness) of per-item CE losses of
// the transformed memory. Pairs are capped at max_pairs, sampled seeded.
double ce_covariance(const nn::Model& model, const SetTransform& g,
                     const std::vector<stream::Example>& memory, std::size_t mc_samples,
                     std::uint64_t seed, std::size_t max_pairs = 10000);
McEstimate ce_covariance_detailed(const nn::Model& model, const SetTransform& g,
                                  const std::vector<stream::Example>& memory,
                                  std::size_t mc_samples, std::uint64_t seed,
                                  std::size_t max_pairs = 10000);

struct DAConfig {
  std::string name;
  std::vector<augment::AugmentOp> ops;
  bool enmix = false;  // mix augmented pairs on top of the pipeline
};

struct DAConfigPoint {
  std::string pipeline;
  double strength = 0.0;
  double co = 0.0;
  double fg = 0.0;
  double m_bar = 0.0;
  double final_aa = 0.0;
};

struct ScanSetup {
  std::vector<stream::TaskSpec> tasks;  // frozen model trained on all but the last
  trainer::TrainerConfig base;          // pipeline/method replaced per config
  std::size_t mc_samples = 64;
  std::size_t mbar_realizations = 8;
  std::size_t aa_seeds = 1;             // runs averaged into final_aa per config
};

struct ScanResult {
  std::vector<DAConfigPoint> points;
  double spearman_co_fg = 0.0;
  double spearman_mbar_aa = 0.0;
};

// For each DA config: estimate CO and FG on the frozen pre-task model (the
// per-item pipeline only; mixing has no per-item identity), the strength
// indicator over the expansion set (with mixing when flagged), and the final
// average accuracy of a full training run using the config. Emits Spearman
// rank correlations CO<->FG and m_bar<->AA.
ScanResult da_strength_scan(const std::vector<DAConfig>& configs, const ScanSetup& setup);

// Spearman rank correlation with average ranks on ties.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace ocimix::analysis
