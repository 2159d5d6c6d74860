#include "ocimix/memory.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

namespace ocimix::memory {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("ReplayBuffer: capacity must be >= 1");
  items_.reserve(capacity);
}

void ReplayBuffer::insert_with_draw(const stream::Example& example, std::uint64_t draw) {
  if (items_.size() < capacity_) {
    items_.push_back(example);
  } else if (draw < capacity_) {
    items_[static_cast<std::size_t>(draw)] = example;
  }
  ++seen_;
}

void ReplayBuffer::insert(const stream::Example& example, std::mt19937_64& rng) {
  std::uint64_t draw = 0;
  if (items_.size() >= capacity_) {
    std::uniform_int_distribution<std::uint64_t> dist(0, seen_);
    draw = dist(rng);
  }
  insert_with_draw(example, draw);
}

std::vector<stream::Example> random_retrieve(const ReplayBuffer& buffer, std::size_t k,
                                             std::mt19937_64& rng) {
  const auto& items = buffer.items();
  if (items.empty() || k == 0) return {};
  if (k >= items.size()) return items;

  // Partial Fisher-Yates over an index array.
  std::vector<std::size_t> idx(items.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<stream::Example> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> dist(i, idx.size() - 1);
    std::swap(idx[i], idx[dist(rng)]);
    out.push_back(items[idx[i]]);
  }
  return out;
}

namespace {

// Per-item CE losses of buffer items under a model.
std::vector<double> item_losses(const nn::Model& model,
                                const std::vector<stream::Example>& items) {
  const std::size_t dim = model.input_dim();
  Tensor batch({items.size(), dim});
  std::vector<nn::SoftLabel> labels;
  labels.reserve(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].features.size() != dim) {
      throw std::invalid_argument("mir_retrieve: feature width does not match model");
    }
    std::copy(items[i].features.data.begin(), items[i].features.data.end(),
              batch.data.begin() + static_cast<std::ptrdiff_t>(i * dim));
    labels.push_back(nn::SoftLabel::one_hot(items[i].label, model.class_count));
  }
  auto fwd = nn::forward(model, batch);
  return nn::per_sample_cross_entropy(fwd.probabilities, labels);
}

}  // namespace

std::vector<stream::Example> mir_retrieve(const ReplayBuffer& buffer, std::size_t k,
                                          std::size_t candidates, const nn::Model& model,
                                          const stream::StreamBatch& current_batch,
                                          double lr, std::mt19937_64& rng) {
  if (candidates < k) throw std::invalid_argument("mir_retrieve: candidates must be >= k");
  const auto& items = buffer.items();
  if (items.empty() || k == 0) return {};
  if (current_batch.examples.empty()) return random_retrieve(buffer, k, rng);

  // Uniform candidate draw, recorded with buffer indices for tie-breaking.
  const std::size_t cand = std::min(candidates, items.size());
  std::vector<std::size_t> idx(items.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<std::size_t> chosen;
  chosen.reserve(cand);
  for (std::size_t i = 0; i < cand; ++i) {
    std::uniform_int_distribution<std::size_t> dist(i, idx.size() - 1);
    std::swap(idx[i], idx[dist(rng)]);
    chosen.push_back(idx[i]);
  }
  std::sort(chosen.begin(), chosen.end());

  std::vector<stream::Example> pool;
  pool.reserve(cand);
  for (std::size_t i : chosen) pool.push_back(items[i]);
  if (cand <= k) return pool;

  const std::vector<double> before = item_losses(model, pool);

  // Virtual one-step update on the incoming batch; the caller's model stays
  // untouched.
  nn::Model probe = model;
  const std::size_t dim = model.input_dim();
  Tensor cur({current_batch.examples.size(), dim});
  std::vector<nn::SoftLabel> cur_labels;
  cur_labels.reserve(current_batch.examples.size());
  for (std::size_t i = 0; i < current_batch.examples.size(); ++i) {
    const auto& e = current_batch.examples[i];
    std::copy(e.features.data.begin(), e.features.data.end(),
              cur.data.begin() + static_cast<std::ptrdiff_t>(i * dim));
    cur_labels.push_back(nn::SoftLabel::one_hot(e.label, model.class_count));
  }
  if (lr > 0.0) {
    auto grads = nn::backward(probe, cur, cur_labels);
    nn::sgd_step(probe, grads, lr);
  }
  const std::vector<double> after = item_losses(probe, pool);

  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double inc_a = after[a] - before[a];
    const double inc_b = after[b] - before[b];
    if (inc_a != inc_b) return inc_a > inc_b;
    return chosen[a] < chosen[b];
  });

  std::vector<stream::Example> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(pool[order[i]]);
  return out;
}

std::map<std::size_t, std::size_t> label_histogram(const ReplayBuffer& buffer) {
  std::map<std::size_t, std::size_t> hist;
  for (const auto& e : buffer.items()) ++hist[e.label];
  return hist;
}

void write_label_histogram_csv(const ReplayBuffer& buffer, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_label_histogram_csv: cannot open " + path);
  os << "label,count\n";
  for (const auto& [label, count] : label_histogram(buffer)) {
    os << label << ',' << count << "\n";
  }
}

}  // namespace ocimix::memory
