#include "ocimix/stream.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

namespace ocimix::stream {

BatchStream::BatchStream(const TaskSpec& task, std::size_t batch_size, std::uint64_t seed)
    : task_(&task), batch_size_(batch_size) {
  if (batch_size == 0) throw std::invalid_argument("BatchStream: batch size must be >= 1");
  order_.resize(task.train_examples.size());
  for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
  std::mt19937_64 rng(seed);
  std::shuffle(order_.begin(), order_.end(), rng);
}

std::size_t BatchStream::batches_total() const {
  return (order_.size() + batch_size_ - 1) / batch_size_;
}

std::optional<StreamBatch> BatchStream::next() {
  if (cursor_ >= order_.size()) return std::nullopt;
  StreamBatch batch;
  batch.task_id = task_->task_id;
  batch.batch_index = batch_index_++;
  const std::size_t end = std::min(cursor_ + batch_size_, order_.size());
  batch.examples.reserve(end - cursor_);
  for (; cursor_ < end; ++cursor_) {
    batch.examples.push_back(task_->train_examples[order_[cursor_]]);
  }
  return batch;
}

std::vector<TaskSpec> split_into_tasks(const std::vector<Example>& train,
                                       const std::vector<Example>& test,
                                       std::size_t classes_per_task,
                                       std::uint64_t seed) {
  if (classes_per_task == 0) throw std::invalid_argument("split_into_tasks: classes_per_task must be >= 1");
  std::set<std::size_t> class_set;
  for (const Example& e : train) class_set.insert(e.label);
  for (const Example& e : test) class_set.insert(e.label);
  if (class_set.empty()) throw std::invalid_argument("split_into_tasks: empty dataset");
  if (class_set.size() % classes_per_task != 0) {
    throw std::invalid_argument("split_into_tasks: class count " +
                                std::to_string(class_set.size()) +
                                " not divisible by classes_per_task " +
                                std::to_string(classes_per_task));
  }

  std::vector<std::size_t> classes(class_set.begin(), class_set.end());
  std::mt19937_64 rng(seed);
  std::shuffle(classes.begin(), classes.end(), rng);

  const std::size_t task_count = classes.size() / classes_per_task;
  std::vector<TaskSpec> tasks(task_count);
  std::map<std::size_t, std::size_t> class_to_task;
  for (std::size_t t = 0; t < task_count; ++t) {
    tasks[t].task_id = t;
    for (std::size_t j = 0; j < classes_per_task; ++j) {
      const std::size_t c = classes[t * classes_per_task + j];
      tasks[t].class_ids.push_back(c);
      class_to_task[c] = t;
    }
  }
  for (const Example& e : train) tasks[class_to_task.at(e.label)].train_examples.push_back(e);
  for (const Example& e : test) tasks[class_to_task.at(e.label)].test_examples.push_back(e);
  return tasks;
}

namespace {

std::uint32_t read_be_u32(std::istream& is, const std::string& path) {
  unsigned char buf[4];
  is.read(reinterpret_cast<char*>(buf), 4);
  if (!is) throw std::runtime_error("idx: truncated header in " + path);
  return (static_cast<std::uint32_t>(buf[0]) << 24) |
         (static_cast<std::uint32_t>(buf[1]) << 16) |
         (static_cast<std::uint32_t>(buf[2]) << 8) | static_cast<std::uint32_t>(buf[3]);
}

}  // namespace

std::vector<Example> load_idx(const std::string& images_path, const std::string& labels_path) {
  std::ifstream img(images_path, std::ios::binary);
  if (!img) throw std::runtime_error("idx: cannot open " + images_path);
  if (read_be_u32(img, images_path) != 0x00000803u) {
    throw std::runtime_error("idx: bad image magic in " + images_path);
  }
  const std::uint32_t count = read_be_u32(img, images_path);
  const std::uint32_t rows = read_be_u32(img, images_path);
  const std::uint32_t cols = read_be_u32(img, images_path);

  std::ifstream lab(labels_path, std::ios::binary);
  if (!lab) throw std::runtime_error("idx: cannot open " + labels_path);
  if (read_be_u32(lab, labels_path) != 0x00000801u) {
    throw std::runtime_error("idx: bad label magic in " + labels_path);
  }
  const std::uint32_t label_count = read_be_u32(lab, labels_path);
  if (label_count != count) {
    throw std::runtime_error("idx: image count " + std::to_string(count) +
                             " does not match label count " + std::to_string(label_count));
  }

  const std::size_t pixels = static_cast<std::size_t>(rows) * cols;
  std::vector<unsigned char> img_buf(pixels);
  std::vector<Example> out;
  out.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    img.read(reinterpret_cast<char*>(img_buf.data()), static_cast<std::streamsize>(pixels));
    if (!img) throw std::runtime_error("idx: truncated image data in " + images_path);
    int lb = lab.get();
    if (lb == EOF) throw std::runtime_error("idx: truncated label data in " + labels_path);
    Example e;
    e.features = Tensor({rows, cols});
    for (std::size_t p = 0; p < pixels; ++p) e.features[p] = img_buf[p] / 255.0;
    e.label = static_cast<std::size_t>(lb);
    out.push_back(std::move(e));
  }
  return out;
}

BlobDataset gen_gaussian_blobs(std::size_t class_count, std::size_t dim,
                               double separation, std::size_t per_class_train,
                               std::size_t per_class_test, std::uint64_t seed) {
  if (class_count < 2) throw std::invalid_argument("gen_gaussian_blobs: need >= 2 classes");
  if (dim < 2) throw std::invalid_argument("gen_gaussian_blobs: need dim >= 2");
  if (separation <= 0.0) throw std::invalid_argument("gen_gaussian_blobs: separation must be > 0");
  if (per_class_train == 0) throw std::invalid_argument("gen_gaussian_blobs: need train samples");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // Raw coordinates are mapped into [0,1] by one affine transform; affine
  // keeps the class geometry intact for distance-based checks. The radius
  // covers the per-coordinate mean spread (~separation/sqrt(dim)) plus the
  // unit-variance noise; keeping it tight preserves usable per-coordinate
  // signal after the squeeze.
  const double radius = 1.5 + 3.0 * separation / std::sqrt(static_cast<double>(dim));
  auto to_unit = [radius](double v) {
    return std::clamp((v + radius) / (2.0 * radius), 0.0, 1.0);
  };

  std::vector<std::vector<double>> means(class_count, std::vector<double>(dim));
  for (auto& mean : means) {
    double norm_sq = 0.0;
    for (double& v : mean) {
      v = gauss(rng);
      norm_sq += v * v;
    }
    const double scale = separation / std::sqrt(std::max(norm_sq, 1e-300));
    for (double& v : mean) v *= scale;
  }

  auto draw = [&](std::size_t cls) {
    Example e;
    e.features = Tensor({dim});
    for (std::size_t d = 0; d < dim; ++d) {
      e.features[d] = to_unit(means[cls][d] + gauss(rng));
    }
    e.label = cls;
    return e;
  };

  BlobDataset ds;
  ds.train.reserve(class_count * per_class_train);
  ds.test.reserve(class_count * per_class_test);
  for (std::size_t c = 0; c < class_count; ++c) {
    for (std::size_t i = 0; i < per_class_train; ++i) ds.train.push_back(draw(c));
    for (std::size_t i = 0; i < per_class_test; ++i) ds.test.push_back(draw(c));
  }
  return ds;
}

namespace {

// Smooth random field in [0.1, 0.9]: iid Gaussians blurred with a separable
// kernel, then min-max normalised.
std::vector<double> smooth_field(std::size_t side, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> out(side * side);
  for (double& v : out) v = gauss(rng);

  const double kernel[5] = {0.054, 0.244, 0.404, 0.244, 0.054};  // sigma ~ 1
  auto clampi = [&](long i) { return std::clamp<long>(i, 0, static_cast<long>(side) - 1); };
  std::vector<double> tmp(side * side, 0.0);
  for (std::size_t r = 0; r < side; ++r) {
    for (std::size_t c = 0; c < side; ++c) {
      double acc = 0.0;
      for (int k = -2; k <= 2; ++k) {
        acc += kernel[k + 2] * out[r * side + clampi(static_cast<long>(c) + k)];
      }
      tmp[r * side + c] = acc;
    }
  }
  for (std::size_t r = 0; r < side; ++r) {
    for (std::size_t c = 0; c < side; ++c) {
      double acc = 0.0;
      for (int k = -2; k <= 2; ++k) {
        acc += kernel[k + 2] * tmp[clampi(static_cast<long>(r) + k) * side + c];
      }
      out[r * side + c] = acc;
    }
  }
  const auto [lo, hi] = std::minmax_element(out.begin(), out.end());
  const double span = std::max(*hi - *lo, 1e-12);
  for (double& v : out) v = 0.1 + 0.8 * (v - *lo) / span;
  return out;
}

double sample_shifted(const std::vector<double>& img, std::size_t side, double y, double x) {
  const double yc = std::clamp(y, 0.0, static_cast<double>(side - 1));
  const double xc = std::clamp(x, 0.0, static_cast<double>(side - 1));
  const std::size_t y0 = static_cast<std::size_t>(yc);
  const std::size_t x0 = static_cast<std::size_t>(xc);
  const std::size_t y1 = std::min(y0 + 1, side - 1);
  const std::size_t x1 = std::min(x0 + 1, side - 1);
  const double fy = yc - static_cast<double>(y0);
  const double fx = xc - static_cast<double>(x0);
  const double top = img[y0 * side + x0] * (1 - fx) + img[y0 * side + x1] * fx;
  const double bot = img[y1 * side + x0] * (1 - fx) + img[y1 * side + x1] * fx;
  return top * (1 - fy) + bot * fy;
}

}  // namespace

BlobDataset gen_pattern_images(std::size_t class_count, std::size_t side,
                               double similarity, std::size_t per_class_train,
                               std::size_t per_class_test, std::uint64_t seed) {
  if (class_count < 2) throw std::invalid_argument("gen_pattern_images: need >= 2 classes");
  if (side < 4) throw std::invalid_argument("gen_pattern_images: need side >= 4");
  if (similarity < 0.0 || similarity >= 1.0) {
    throw std::invalid_argument("gen_pattern_images: similarity must be in [0,1)");
  }
  if (per_class_train == 0) throw std::invalid_argument("gen_pattern_images: need train samples");

  std::mt19937_64 rng(seed);
  const auto common = smooth_field(side, rng);
  std::vector<std::vector<double>> templates(class_count);
  for (auto& t : templates) {
    t = smooth_field(side, rng);
    for (std::size_t i = 0; i < t.size(); ++i) {
      t[i] = similarity * common[i] + (1.0 - similarity) * t[i];
    }
  }

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> shift(-1.5, 1.5);
  std::uniform_real_distribution<double> contrast(0.85, 1.15);
  std::normal_distribution<double> pixel_noise(0.0, 0.03);

  auto draw = [&](std::size_t cls) {
    Example e;
    e.features = Tensor({side, side});
    e.label = cls;
    const bool flip = unit(rng) < 0.5;
    const double dy = shift(rng);
    const double dx = shift(rng);
    const double f = contrast(rng);
    for (std::size_t r = 0; r < side; ++r) {
      for (std::size_t c = 0; c < side; ++c) {
        const double cc = flip ? static_cast<double>(side - 1 - c) : static_cast<double>(c);
        double v = sample_shifted(templates[cls], side, r + dy, cc + dx);
        v = 0.5 + f * (v - 0.5) + pixel_noise(rng);
        e.features.at(r, c) = std::clamp(v, 0.0, 1.0);
      }
    }
    return e;
  };

  BlobDataset ds;
  ds.train.reserve(class_count * per_class_train);
  ds.test.reserve(class_count * per_class_test);
  for (std::size_t c = 0; c < class_count; ++c) {
    for (std::size_t i = 0; i < per_class_train; ++i) ds.train.push_back(draw(c));
    for (std::size_t i = 0; i < per_class_test; ++i) ds.test.push_back(draw(c));
  }
  return ds;
}

void write_examples_csv(const std::vector<Example>& examples, const std::string& path) {
  if (examples.empty()) throw std::invalid_argument("write_examples_csv: empty dataset");
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_examples_csv: cannot open " + path);
  const std::size_t dim = examples.front().features.size();
  os << "label";
  for (std::size_t d = 0; d < dim; ++d) os << ",f" << d;
  os << "\n";
  char buf[32];
  for (const Example& e : examples) {
    if (e.features.size() != dim) {
      throw std::invalid_argument("write_examples_csv: inconsistent feature width");
    }
    os << e.label;
    for (std::size_t d = 0; d < dim; ++d) {
      std::snprintf(buf, sizeof(buf), "%.12g", e.features[d]);
      os << ',' << buf;
    }
    os << "\n";
  }
}

std::vector<Example> read_examples_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("read_examples_csv: cannot open " + path);
  std::string line;
  if (!std::getline(is, line) || line.rfind("label", 0) != 0) {
    throw std::runtime_error("read_examples_csv: missing header in " + path);
  }
  std::vector<Example> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    Example e;
    if (!std::getline(ss, cell, ',')) break;
    e.label = static_cast<std::size_t>(std::stoull(cell));
    std::vector<double> values;
    while (std::getline(ss, cell, ',')) values.push_back(std::stod(cell));
    if (values.empty()) throw std::runtime_error("read_examples_csv: row without features");
    const std::size_t dim = values.size();
    e.features = Tensor::from({dim}, std::move(values));
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<Example> reshape_examples(std::vector<Example> examples,
                                      const std::vector<std::size_t>& shape) {
  for (Example& e : examples) {
    if (shape_product(shape) != e.features.size()) {
      throw std::invalid_argument("reshape_examples: size mismatch");
    }
    e.features.shape = shape;
  }
  return examples;
}

}  // namespace ocimix::stream
