#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ocimix/tensor.hpp"

namespace ocimix::nn {

enum class Activation { relu, identity };

struct Layer {
  Tensor weight;  // out x in
  Tensor bias;    // out
  Activation act = Activation::relu;
};

// Probability vector over all classes. Entries must sum to 1 within 1e-9.
struct SoftLabel {
  std::vector<double> p;

  static SoftLabel one_hot(std::size_t cls, std::size_t class_count);
  void validate() const;
  std::size_t size() const { return p.size(); }
};

// Feedforward extractor (dense layers, hidden activations relu) plus a
// single linear head over all classes. The head bias is held at zero; the
// extractor may be empty, in which case features are the raw inputs.
struct Model {
  std::vector<Layer> extractor;
  Tensor head_weight;  // class_count x feature_dim
  Tensor head_bias;    // class_count, fixed at zero
  std::size_t class_count = 0;

  std::size_t input_dim() const;
  std::size_t feature_dim() const;
  void validate() const;

  // He-initialised extractor, zero head. Deterministic per seed.
  static Model make(std::size_t input_dim, const std::vector<std::size_t>& hidden,
                    std::size_t class_count, std::uint64_t seed);
};

struct LayerGrad {
  Tensor weight;
  Tensor bias;
};

struct GradientSet {
  std::vector<LayerGrad> extractor;
  Tensor head_weight;
};

struct ForwardResult {
  Tensor features;       // B x feature_dim (pre-head activations)
  Tensor probabilities;  // B x class_count, rows on the simplex
};

// batch is B x input_dim. Throws std::invalid_argument on shape mismatch.
ForwardResult forward(const Model& model, const Tensor& batch);

// Mean over the batch of -y^T log p, probabilities floored at 1e-12 inside
// the log. Supports soft labels.
double cross_entropy(const Tensor& probabilities, const std::vector<SoftLabel>& labels);

// Per-sample -y^T log p, same flooring.
std::vector<double> per_sample_cross_entropy(const Tensor& probabilities,
                                             const std::vector<SoftLabel>& labels);

// Gradients of the batch-mean cross-entropy loss.
GradientSet backward(const Model& model, const Tensor& batch,
                     const std::vector<SoftLabel>& labels);

// In-place plain SGD: every parameter decremented by lr * gradient.
void sgd_step(Model& model, const GradientSet& grads, double lr);

// L2 norm of each requested head row. Throws on unknown class id.
std::vector<double> classifier_weight_norms(const Model& model,
                                            const std::vector<std::size_t>& class_ids);

void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);

}  // namespace ocimix::nn
