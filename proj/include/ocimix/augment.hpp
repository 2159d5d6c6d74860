#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "ocimix/model.hpp"
#include "ocimix/stream.hpp"

namespace ocimix::augment {

enum class OpKind {
  identity,
  horizontal_flip,      // image-shaped only; always flips (involution)
  random_resized_crop,  // image-shaped only; scale range [a,b], resized back
  color_jitter,         // any shape; brightness factor U[max(0,1-s), 1+s]
  grayscale,            // channel mean on {H,W,Ch>=2}; identity otherwise
  gaussian_noise,       // any shape; additive N(0, sigma^2), clamped to [0,1]
};

struct AugmentOp {
  OpKind kind = OpKind::identity;
  double a = 1.0;         // crop scale low
  double b = 1.0;         // crop scale high
  double strength = 0.0;  // jitter strength / noise sigma

  static AugmentOp identity() { return {}; }
  static AugmentOp flip() { return {OpKind::horizontal_flip, 1.0, 1.0, 0.0}; }
  static AugmentOp crop(double a, double b);
  static AugmentOp jitter(double strength);
  static AugmentOp gray() { return {OpKind::grayscale, 1.0, 1.0, 0.0}; }
  static AugmentOp noise(double sigma);
};

// Mixing hyperparameters: Beta(alpha, alpha) ratio sampling plus the
// label-ratio adjustment thresholds.
struct MixConfig {
  double alpha = 0.2;
  double delta = 0.05;
  double kappa = 2.0;
  double tau = 0.5;

  void validate() const;
};

struct Provenance {
  std::ptrdiff_t source_i = -1;
  std::ptrdiff_t source_j = -1;
  double mu_x = 1.0;
  double mu_y = 1.0;
};

// Convex combination of two samples; label support has at most 2 classes.
struct MixedExample {
  Tensor features;
  nn::SoftLabel label;
  Provenance provenance;
};

stream::Example apply_op(const AugmentOp& op, const stream::Example& example,
                         std::mt19937_64& rng);
stream::Example apply_pipeline(const std::vector<AugmentOp>& ops,
                               const stream::Example& example, std::mt19937_64& rng);

// Strength of a crop with scale range [a,b]: (1-a) + (1-b). Throws if a > b.
double crop_strength(double a, double b);

// mu ~ Beta(alpha, alpha) via two gamma draws. Throws if alpha <= 0.
double sample_beta(double alpha, std::mt19937_64& rng);

// Mix two (typically already-augmented) same-shape samples and their one-hot
// labels with the same ratio mu.
MixedExample enmix(const stream::Example& view_i, const stream::Example& view_j,
                   double mu, std::size_t class_count);

// Label-ratio adjustment: inflate mu_y above mu_x when the new/old head-norm
// ratio exceeds kappa and mu_x exceeds tau; norm_old == 0 counts as maximal
// imbalance.
double adaptive_mu_y(double mu_x, double norm_new, double norm_old, const MixConfig& cfg);

// Cross-class mix of an old-class memory sample with a current-task sample:
// features with ratio mu_x, labels with ratio mu_y (label mass biased toward
// the old class when mu_y > mu_x). Caller ensures old_sample's class is not
// part of the current task.
MixedExample adpmix(const stream::Example& old_sample, const stream::Example& new_sample,
                    double mu_x, double mu_y, std::size_t class_count);

// Pipeline description strings, e.g. "crop:0.6,0.6|flip|jitter:0.4|gray".
// Tokens: identity, flip, gray, crop:a,b, jitter:s, noise:sigma.
std::vector<AugmentOp> parse_pipeline(const std::string& description);
std::string pipeline_to_string(const std::vector<AugmentOp>& ops);

// Sum of the per-op strengths (crop formula, jitter strength, noise sigma).
double pipeline_strength(const std::vector<AugmentOp>& ops);

}  // namespace ocimix::augment
