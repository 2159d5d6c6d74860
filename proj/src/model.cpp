#include "ocimix/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include "ocimix/linalg.hpp"
#include "ocimix/version.hpp"

namespace ocimix::nn {

namespace {

constexpr double kLogFloor = 1e-12;

void apply_activation(Tensor& t, Activation act) {
  if (act == Activation::relu) linalg::relu(t.data.data(), t.size());
}

// Runs the extractor, keeping every layer's post-activation output.
// activations[0] is the input batch itself.
std::vector<Tensor> run_extractor(const Model& model, const Tensor& batch) {
  std::vector<Tensor> activations;
  activations.reserve(model.extractor.size() + 1);
  activations.push_back(batch);
  for (const Layer& layer : model.extractor) {
    const Tensor& in = activations.back();
    Tensor out({in.rows(), layer.weight.rows()});
    linalg::linear_forward(in.data.data(), layer.weight.data.data(),
                           layer.bias.data.data(), out.data.data(), in.rows(),
                           layer.weight.rows(), layer.weight.cols());
    apply_activation(out, layer.act);
    activations.push_back(std::move(out));
  }
  return activations;
}

}  // namespace

SoftLabel SoftLabel::one_hot(std::size_t cls, std::size_t class_count) {
  if (cls >= class_count) throw std::invalid_argument("SoftLabel::one_hot: class id out of range");
  SoftLabel y;
  y.p.assign(class_count, 0.0);
  y.p[cls] = 1.0;
  return y;
}

void SoftLabel::validate() const {
  double sum = 0.0;
  for (double v : p) {
    if (v < 0.0 || v > 1.0 || !std::isfinite(v)) {
      throw std::invalid_argument("SoftLabel: entry outside [0,1]");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("SoftLabel: entries do not sum to 1");
}

std::size_t Model::input_dim() const {
  return extractor.empty() ? head_weight.cols() : extractor.front().weight.cols();
}

std::size_t Model::feature_dim() const { return head_weight.cols(); }

void Model::validate() const {
  if (head_weight.shape.size() != 2 || head_weight.rows() != class_count) {
    throw std::invalid_argument("Model: head shape does not match class count");
  }
  if (head_bias.size() != class_count) {
    throw std::invalid_argument("Model: head bias length mismatch");
  }
  std::size_t dim = 0;
  for (std::size_t i = 0; i < extractor.size(); ++i) {
    const Layer& l = extractor[i];
    if (l.weight.shape.size() != 2 || l.bias.size() != l.weight.rows()) {
      throw std::invalid_argument("Model: malformed extractor layer");
    }
    if (i > 0 && l.weight.cols() != dim) {
      throw std::invalid_argument("Model: extractor layer dimension mismatch");
    }
    dim = l.weight.rows();
  }
  if (!extractor.empty()) {
    if (dim != head_weight.cols()) {
      throw std::invalid_argument("Model: extractor output does not match head input");
    }
    if (extractor.back().act != Activation::relu) {
      throw std::invalid_argument("Model: last extractor activation must be relu");
    }
  }
}

Model Model::make(std::size_t input_dim, const std::vector<std::size_t>& hidden,
                  std::size_t class_count, std::uint64_t seed) {
  if (input_dim == 0 || class_count == 0) {
    throw std::invalid_argument("Model::make: zero dimension");
  }
  std::mt19937_64 rng(seed);
  Model m;
  m.class_count = class_count;
  std::size_t in = input_dim;
  for (std::size_t units : hidden) {
    Layer layer;
    layer.weight = Tensor({units, in});
    layer.bias = Tensor({units});
    layer.act = Activation::relu;
    std::normal_distribution<double> init(0.0, std::sqrt(2.0 / static_cast<double>(in)));
    for (double& w : layer.weight.data) w = init(rng);
    m.extractor.push_back(std::move(layer));
    in = units;
  }
  m.head_weight = Tensor({class_count, in});
  m.head_bias = Tensor({class_count});
  m.validate();
  return m;
}

ForwardResult forward(const Model& model, const Tensor& batch) {
  if (batch.shape.size() != 2 || batch.cols() != model.input_dim()) {
    throw std::invalid_argument("forward: batch shape does not match model input");
  }
  if (batch.rows() == 0) throw std::invalid_argument("forward: empty batch");

  auto activations = run_extractor(model, batch);
  ForwardResult out;
  out.features = std::move(activations.back());
  out.probabilities = Tensor({batch.rows(), model.class_count});
  linalg::linear_forward(out.features.data.data(), model.head_weight.data.data(),
                         model.head_bias.data.data(), out.probabilities.data.data(),
                         batch.rows(), model.class_count, model.feature_dim());
  linalg::softmax_rows(out.probabilities.data.data(), batch.rows(), model.class_count);
  check_finite(out.probabilities, "forward probabilities");
  return out;
}

std::vector<double> per_sample_cross_entropy(const Tensor& probabilities,
                                             const std::vector<SoftLabel>& labels) {
  const std::size_t b = probabilities.rows();
  const std::size_t c = probabilities.cols();
  if (labels.size() != b) throw std::invalid_argument("cross_entropy: label count mismatch");
  std::vector<double> losses(b);
  for (std::size_t i = 0; i < b; ++i) {
    if (labels[i].size() != c) throw std::invalid_argument("cross_entropy: label width mismatch");
    double loss = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      const double y = labels[i].p[j];
      if (y != 0.0) loss -= y * std::log(std::max(probabilities.at(i, j), kLogFloor));
    }
    losses[i] = loss;
  }
  return losses;
}

double cross_entropy(const Tensor& probabilities, const std::vector<SoftLabel>& labels) {
  auto losses = per_sample_cross_entropy(probabilities, labels);
  double sum = 0.0;
  for (double l : losses) sum += l;
  return sum / static_cast<double>(losses.size());
}

GradientSet backward(const Model& model, const Tensor& batch,
                     const std::vector<SoftLabel>& labels) {
  if (batch.shape.size() != 2 || batch.cols() != model.input_dim()) {
    throw std::invalid_argument("backward: batch shape does not match model input");
  }
  const std::size_t b = batch.rows();
  if (labels.size() != b) throw std::invalid_argument("backward: label count mismatch");

  auto activations = run_extractor(model, batch);
  const Tensor& features = activations.back();

  Tensor probs({b, model.class_count});
  linalg::linear_forward(features.data.data(), model.head_weight.data.data(),
                         model.head_bias.data.data(), probs.data.data(), b,
                         model.class_count, model.feature_dim());
  linalg::softmax_rows(probs.data.data(), b, model.class_count);

  // dL/dlogits under batch-mean CE: (p - y) / B.
  Tensor dlogits({b, model.class_count});
  const double inv_b = 1.0 / static_cast<double>(b);
  for (std::size_t i = 0; i < b; ++i) {
    if (labels[i].size() != model.class_count) {
      throw std::invalid_argument("backward: label width mismatch");
    }
    for (std::size_t j = 0; j < model.class_count; ++j) {
      dlogits.at(i, j) = (probs.at(i, j) - labels[i].p[j]) * inv_b;
    }
  }

  GradientSet grads;
  grads.head_weight = Tensor({model.class_count, model.feature_dim()});
  linalg::matmul_tn(dlogits.data.data(), features.data.data(),
                    grads.head_weight.data.data(), b, model.class_count,
                    model.feature_dim());

  grads.extractor.resize(model.extractor.size());
  if (!model.extractor.empty()) {
    Tensor delta({b, model.feature_dim()});
    linalg::matmul_nn(dlogits.data.data(), model.head_weight.data.data(),
                      delta.data.data(), b, model.class_count, model.feature_dim());
    for (std::size_t li = model.extractor.size(); li-- > 0;) {
      const Layer& layer = model.extractor[li];
      const Tensor& out_act = activations[li + 1];
      const Tensor& in_act = activations[li];
      if (layer.act == Activation::relu) {
        linalg::relu_backward(out_act.data.data(), delta.data.data(), delta.size());
      }
      grads.extractor[li].weight = Tensor({layer.weight.rows(), layer.weight.cols()});
      grads.extractor[li].bias = Tensor({layer.bias.size()});
      linalg::matmul_tn(delta.data.data(), in_act.data.data(),
                        grads.extractor[li].weight.data.data(), b,
                        layer.weight.rows(), layer.weight.cols());
      linalg::bias_grad(delta.data.data(), grads.extractor[li].bias.data.data(), b,
                        layer.weight.rows());
      if (li > 0) {
        Tensor next({b, layer.weight.cols()});
        linalg::matmul_nn(delta.data.data(), layer.weight.data.data(),
                          next.data.data(), b, layer.weight.rows(), layer.weight.cols());
        delta = std::move(next);
      }
    }
  }
  check_finite(grads.head_weight, "head gradient");
  return grads;
}

void sgd_step(Model& model, const GradientSet& grads, double lr) {
  if (lr <= 0.0) throw std::invalid_argument("sgd_step: learning rate must be positive");
  if (grads.extractor.size() != model.extractor.size() ||
      !same_shape(grads.head_weight, model.head_weight)) {
    throw std::invalid_argument("sgd_step: gradient shapes do not match model");
  }
  for (std::size_t li = 0; li < model.extractor.size(); ++li) {
    Layer& layer = model.extractor[li];
    const LayerGrad& g = grads.extractor[li];
    if (!same_shape(g.weight, layer.weight) || !same_shape(g.bias, layer.bias)) {
      throw std::invalid_argument("sgd_step: extractor gradient shape mismatch");
    }
    for (std::size_t i = 0; i < layer.weight.size(); ++i) layer.weight[i] -= lr * g.weight[i];
    for (std::size_t i = 0; i < layer.bias.size(); ++i) layer.bias[i] -= lr * g.bias[i];
  }
  for (std::size_t i = 0; i < model.head_weight.size(); ++i) {
    model.head_weight[i] -= lr * grads.head_weight[i];
  }
  // head bias stays fixed at zero
}

std::vector<double> classifier_weight_norms(const Model& model,
                                            const std::vector<std::size_t>& class_ids) {
  std::vector<double> norms;
  norms.reserve(class_ids.size());
  for (std::size_t c : class_ids) {
    if (c >= model.class_count) {
      throw std::invalid_argument("classifier_weight_norms: unknown class id");
    }
    double sq = 0.0;
    for (std::size_t j = 0; j < model.feature_dim(); ++j) {
      const double w = model.head_weight.at(c, j);
      sq += w * w;
    }
    norms.push_back(std::sqrt(sq));
  }
  return norms;
}

namespace {

void write_u64(std::ostream& os, std::uint64_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint64_t read_u64(std::istream& is) {
  std::uint64_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!is) throw std::runtime_error("model checkpoint: truncated file");
  return v;
}

void write_tensor(std::ostream& os, const Tensor& t) {
  write_u64(os, t.shape.size());
  for (std::size_t d : t.shape) write_u64(os, d);
  os.write(reinterpret_cast<const char*>(t.data.data()),
           static_cast<std::streamsize>(t.data.size() * sizeof(double)));
}

Tensor read_tensor(std::istream& is) {
  const std::uint64_t rank = read_u64(is);
  if (rank > 8) throw std::runtime_error("model checkpoint: implausible tensor rank");
  std::vector<std::size_t> shape(rank);
  for (auto& d : shape) d = read_u64(is);
  Tensor t(shape);
  is.read(reinterpret_cast<char*>(t.data.data()),
          static_cast<std::streamsize>(t.data.size() * sizeof(double)));
  if (!is) throw std::runtime_error("model checkpoint: truncated tensor data");
  return t;
}

}  // namespace

void save_model(const Model& model, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_model: cannot open " + path);
  const std::string tag = kModelFormatTag;
  write_u64(os, tag.size());
  os.write(tag.data(), static_cast<std::streamsize>(tag.size()));
  write_u64(os, model.class_count);
  write_u64(os, model.extractor.size());
  for (const Layer& l : model.extractor) {
    write_u64(os, l.act == Activation::relu ? 1 : 0);
    write_tensor(os, l.weight);
    write_tensor(os, l.bias);
  }
  write_tensor(os, model.head_weight);
  write_tensor(os, model.head_bias);
  if (!os) throw std::runtime_error("save_model: write failure for " + path);
}

Model load_model(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_model: cannot open " + path);
  const std::uint64_t tag_len = read_u64(is);
  std::string tag(tag_len, '\0');
  is.read(tag.data(), static_cast<std::streamsize>(tag_len));
  if (!is || tag != kModelFormatTag) {
    throw std::runtime_error("load_model: bad format tag in " + path);
  }
  Model m;
  m.class_count = read_u64(is);
  const std::uint64_t layers = read_u64(is);
  for (std::uint64_t i = 0; i < layers; ++i) {
    Layer l;
    l.act = read_u64(is) == 1 ? Activation::relu : Activation::identity;
    l.weight = read_tensor(is);
    l.bias = read_tensor(is);
    m.extractor.push_back(std::move(l));
  }
  m.head_weight = read_tensor(is);
  m.head_bias = read_tensor(is);
  m.validate();
  return m;
}

}  // namespace ocimix::nn
