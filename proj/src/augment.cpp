#include "ocimix/augment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace ocimix::augment {

AugmentOp AugmentOp::crop(double a, double b) {
  if (!(a > 0.0) || a > b || b > 1.0) {
    throw std::invalid_argument("crop: require 0 < a <= b <= 1");
  }
  return {OpKind::random_resized_crop, a, b, 0.0};
}

AugmentOp AugmentOp::jitter(double strength) {
  if (strength < 0.0) throw std::invalid_argument("jitter: negative strength");
  return {OpKind::color_jitter, 1.0, 1.0, strength};
}

AugmentOp AugmentOp::noise(double sigma) {
  if (sigma < 0.0) throw std::invalid_argument("noise: negative sigma");
  return {OpKind::gaussian_noise, 1.0, 1.0, sigma};
}

void MixConfig::validate() const {
  if (alpha <= 0.0) throw std::invalid_argument("MixConfig: alpha must be > 0");
  if (delta < 0.0) throw std::invalid_argument("MixConfig: delta must be >= 0");
  if (kappa <= 0.0) throw std::invalid_argument("MixConfig: kappa must be > 0");
  if (tau < 0.0 || tau > 1.0) throw std::invalid_argument("MixConfig: tau must be in [0,1]");
}

namespace {

struct ImageDims {
  std::size_t h, w, ch;
};

ImageDims image_dims(const Tensor& t, const char* op_name) {
  if (t.shape.size() == 2) return {t.shape[0], t.shape[1], 1};
  if (t.shape.size() == 3) return {t.shape[0], t.shape[1], t.shape[2]};
  throw std::invalid_argument(std::string(op_name) + ": requires image-shaped features");
}

stream::Example flip_image(const stream::Example& e) {
  const ImageDims d = image_dims(e.features, "horizontal_flip");
  stream::Example out = e;
  for (std::size_t r = 0; r < d.h; ++r) {
    for (std::size_t c = 0; c < d.w; ++c) {
      for (std::size_t k = 0; k < d.ch; ++k) {
        out.features[(r * d.w + c) * d.ch + k] =
            e.features[(r * d.w + (d.w - 1 - c)) * d.ch + k];
      }
    }
  }
  return out;
}

// Bilinear sample of channel k at fractional position (y, x) inside the
// crop window.
double bilinear(const Tensor& src, const ImageDims& d, double y, double x, std::size_t k) {
  const double yc = std::clamp(y, 0.0, static_cast<double>(d.h - 1));
  const double xc = std::clamp(x, 0.0, static_cast<double>(d.w - 1));
  const std::size_t y0 = static_cast<std::size_t>(yc);
  const std::size_t x0 = static_cast<std::size_t>(xc);
  const std::size_t y1 = std::min(y0 + 1, d.h - 1);
  const std::size_t x1 = std::min(x0 + 1, d.w - 1);
  const double fy = yc - static_cast<double>(y0);
  const double fx = xc - static_cast<double>(x0);
  auto px = [&](std::size_t r, std::size_t c) { return src[(r * d.w + c) * d.ch + k]; };
  const double top = px(y0, x0) * (1.0 - fx) + px(y0, x1) * fx;
  const double bot = px(y1, x0) * (1.0 - fx) + px(y1, x1) * fx;
  return top * (1.0 - fy) + bot * fy;
}

stream::Example crop_image(const AugmentOp& op, const stream::Example& e,
                           std::mt19937_64& rng) {
  const ImageDims d = image_dims(e.features, "random_resized_crop");
  std::uniform_real_distribution<double> scale_dist(op.a, op.b);
  const double scale = scale_dist(rng);
  const double side = std::sqrt(scale);
  const std::size_t ch = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::lround(side * static_cast<double>(d.h))), 1, d.h);
  const std::size_t cw = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::lround(side * static_cast<double>(d.w))), 1, d.w);
  std::uniform_int_distribution<std::size_t> top_dist(0, d.h - ch);
  std::uniform_int_distribution<std::size_t> left_dist(0, d.w - cw);
  const std::size_t top = top_dist(rng);
  const std::size_t left = left_dist(rng);

  if (ch == d.h && cw == d.w && top == 0 && left == 0) return e;

  stream::Example out = e;
  const double sy = static_cast<double>(ch) / static_cast<double>(d.h);
  const double sx = static_cast<double>(cw) / static_cast<double>(d.w);
  for (std::size_t r = 0; r < d.h; ++r) {
    const double y = static_cast<double>(top) + (static_cast<double>(r) + 0.5) * sy - 0.5;
    for (std::size_t c = 0; c < d.w; ++c) {
      const double x = static_cast<double>(left) + (static_cast<double>(c) + 0.5) * sx - 0.5;
      for (std::size_t k = 0; k < d.ch; ++k) {
        out.features[(r * d.w + c) * d.ch + k] = bilinear(e.features, d, y, x, k);
      }
    }
  }
  return out;
}

stream::Example jitter_image(const AugmentOp& op, const stream::Example& e,
                             std::mt19937_64& rng) {
  std::uniform_real_distribution<double> factor_dist(std::max(0.0, 1.0 - op.strength),
                                                     1.0 + op.strength);
  const double f = factor_dist(rng);
  stream::Example out = e;
  for (double& v : out.features.data) v = std::clamp(v * f, 0.0, 1.0);
  return out;
}

stream::Example gray_image(const stream::Example& e) {
  if (e.features.shape.size() != 3 || e.features.shape[2] < 2) return e;
  const ImageDims d = image_dims(e.features, "grayscale");
  stream::Example out = e;
  for (std::size_t r = 0; r < d.h; ++r) {
    for (std::size_t c = 0; c < d.w; ++c) {
      double mean = 0.0;
      for (std::size_t k = 0; k < d.ch; ++k) mean += e.features[(r * d.w + c) * d.ch + k];
      mean /= static_cast<double>(d.ch);
      for (std::size_t k = 0; k < d.ch; ++k) out.features[(r * d.w + c) * d.ch + k] = mean;
    }
  }
  return out;
}

stream::Example noise_image(const AugmentOp& op, const stream::Example& e,
                            std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, op.strength);
  stream::Example out = e;
  for (double& v : out.features.data) v = std::clamp(v + gauss(rng), 0.0, 1.0);
  return out;
}

}  // namespace

stream::Example apply_op(const AugmentOp& op, const stream::Example& example,
                         std::mt19937_64& rng) {
  switch (op.kind) {
    case OpKind::identity:
      return example;
    case OpKind::horizontal_flip:
      return flip_image(example);
    case OpKind::random_resized_crop:
      return crop_image(op, example, rng);
    case OpKind::color_jitter:
      return jitter_image(op, example, rng);
    case OpKind::grayscale:
      return gray_image(example);
    case OpKind::gaussian_noise:
      return noise_image(op, example, rng);
  }
  throw std::logic_error("apply_op: unknown op kind");
}

stream::Example apply_pipeline(const std::vector<AugmentOp>& ops,
                               const stream::Example& example, std::mt19937_64& rng) {
  stream::Example out = example;
  for (const AugmentOp& op : ops) out = apply_op(op, out, rng);
  return out;
}

double crop_strength(double a, double b) {
  if (a > b) throw std::invalid_argument("crop_strength: a > b");
  return (1.0 - a) + (1.0 - b);
}

double sample_beta(double alpha, std::mt19937_64& rng) {
  if (alpha <= 0.0) throw std::invalid_argument("sample_beta: alpha must be > 0");
  std::gamma_distribution<double> gamma(alpha, 1.0);
  const double x = gamma(rng);
  const double y = gamma(rng);
  const double denom = x + y;
  if (denom <= 0.0) return 0.5;  // both gamma draws underflowed
  return x / denom;
}

MixedExample enmix(const stream::Example& view_i, const stream::Example& view_j,
                   double mu, std::size_t class_count) {
  if (!same_shape(view_i.features, view_j.features)) {
    throw std::invalid_argument("enmix: feature shape mismatch");
  }
  if (mu < 0.0 || mu > 1.0) throw std::invalid_argument("enmix: mu outside [0,1]");
  MixedExample out;
  out.features = view_i.features;
  for (std::size_t i = 0; i < out.features.size(); ++i) {
    out.features[i] = mu * view_i.features[i] + (1.0 - mu) * view_j.features[i];
  }
  out.label.p.assign(class_count, 0.0);
  out.label.p[view_i.label] += mu;
  out.label.p[view_j.label] += 1.0 - mu;
  out.provenance.mu_x = mu;
  out.provenance.mu_y = mu;
  return out;
}

double adaptive_mu_y(double mu_x, double norm_new, double norm_old, const MixConfig& cfg) {
  cfg.validate();
  if (mu_x < 0.0 || mu_x > 1.0) throw std::invalid_argument("adaptive_mu_y: mu_x outside [0,1]");
  if (norm_old < 0.0 || norm_new < 0.0) {
    throw std::invalid_argument("adaptive_mu_y: negative norm");
  }
  if (norm_old == 0.0) {
    // Untrained old head: maximal imbalance.
    return mu_x > cfg.tau ? 1.0 : mu_x;
  }
  const double ratio = norm_new / norm_old;
  if (ratio > cfg.kappa && mu_x > cfg.tau) {
    return std::min(mu_x + cfg.delta * ratio, 1.0);
  }
  return mu_x;
}

MixedExample adpmix(const stream::Example& old_sample, const stream::Example& new_sample,
                    double mu_x, double mu_y, std::size_t class_count) {
  if (!same_shape(old_sample.features, new_sample.features)) {
    throw std::invalid_argument("adpmix: feature shape mismatch");
  }
  if (mu_x < 0.0 || mu_x > 1.0 || mu_y < 0.0 || mu_y > 1.0) {
    throw std::invalid_argument("adpmix: mixing ratio outside [0,1]");
  }
  MixedExample out;
  out.features = old_sample.features;
  for (std::size_t i = 0; i < out.features.size(); ++i) {
    out.features[i] = mu_x * old_sample.features[i] + (1.0 - mu_x) * new_sample.features[i];
  }
  out.label.p.assign(class_count, 0.0);
  out.label.p[old_sample.label] += mu_y;
  out.label.p[new_sample.label] += 1.0 - mu_y;
  out.provenance.mu_x = mu_x;
  out.provenance.mu_y = mu_y;
  return out;
}

std::vector<AugmentOp> parse_pipeline(const std::string& description) {
  std::vector<AugmentOp> ops;
  std::stringstream ss(description);
  std::string token;
  while (std::getline(ss, token, '|')) {
    if (token.empty()) continue;
    const auto colon = token.find(':');
    const std::string name = token.substr(0, colon);
    const std::string args = colon == std::string::npos ? "" : token.substr(colon + 1);
    if (name == "identity") {
      ops.push_back(AugmentOp::identity());
    } else if (name == "flip") {
      ops.push_back(AugmentOp::flip());
    } else if (name == "gray") {
      ops.push_back(AugmentOp::gray());
    } else if (name == "crop") {
      const auto comma = args.find(',');
      if (comma == std::string::npos) throw std::invalid_argument("parse_pipeline: crop needs a,b");
      ops.push_back(AugmentOp::crop(std::stod(args.substr(0, comma)),
                                    std::stod(args.substr(comma + 1))));
    } else if (name == "jitter") {
      if (args.empty()) throw std::invalid_argument("parse_pipeline: jitter needs a strength");
      ops.push_back(AugmentOp::jitter(std::stod(args)));
    } else if (name == "noise") {
      if (args.empty()) throw std::invalid_argument("parse_pipeline: noise needs a sigma");
      ops.push_back(AugmentOp::noise(std::stod(args)));
    } else {
      throw std::invalid_argument("parse_pipeline: unknown op '" + name + "'");
    }
  }
  return ops;
}

std::string pipeline_to_string(const std::vector<AugmentOp>& ops) {
  if (ops.empty()) return "identity";
  std::string out;
  char buf[64];
  for (const AugmentOp& op : ops) {
    if (!out.empty()) out += '|';
    switch (op.kind) {
      case OpKind::identity:
        out += "identity";
        break;
      case OpKind::horizontal_flip:
        out += "flip";
        break;
      case OpKind::grayscale:
        out += "gray";
        break;
      case OpKind::random_resized_crop:
        std::snprintf(buf, sizeof(buf), "crop:%g,%g", op.a, op.b);
        out += buf;
        break;
      case OpKind::color_jitter:
        std::snprintf(buf, sizeof(buf), "jitter:%g", op.strength);
        out += buf;
        break;
      case OpKind::gaussian_noise:
        std::snprintf(buf, sizeof(buf), "noise:%g", op.strength);
        out += buf;
        break;
    }
  }
  return out;
}

double pipeline_strength(const std::vector<AugmentOp>& ops) {
  double s = 0.0;
  for (const AugmentOp& op : ops) {
    if (op.kind == OpKind::random_resized_crop) s += crop_strength(op.a, op.b);
    if (op.kind == OpKind::color_jitter || op.kind == OpKind::gaussian_noise) s += op.strength;
  }
  return s;
}

}  // namespace ocimix::augment
