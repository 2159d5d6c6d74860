#include "ocimix/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

namespace ocimix::metrics {

namespace {

const std::vector<double>& checked_row(const AccuracyMatrix& acc, std::size_t task_count) {
  if (task_count == 0 || task_count > acc.size()) {
    throw std::invalid_argument("accuracy matrix: task index out of range");
  }
  const auto& row = acc[task_count - 1];
  if (row.size() != task_count) {
    throw std::invalid_argument("accuracy matrix: row length does not match task index");
  }
  for (double v : row) {
    if (v < 0.0 || v > 1.0) throw std::invalid_argument("accuracy matrix: entry outside [0,1]");
  }
  return row;
}

}  // namespace

double average_accuracy(const AccuracyMatrix& acc, std::size_t task_count) {
  const auto& row = checked_row(acc, task_count);
  double sum = 0.0;
  for (double v : row) sum += v;
  return sum / static_cast<double>(task_count);
}

double average_forgetting(const AccuracyMatrix& acc, std::size_t task_count) {
  if (task_count < 2) throw std::invalid_argument("average_forgetting: needs >= 2 tasks");
  const auto& last = checked_row(acc, task_count);
  double sum = 0.0;
  for (std::size_t j = 1; j < task_count; ++j) {
    // Best accuracy on task j over earlier checkpoints; entries only exist
    // from row j onward.
    double best = 0.0;
    for (std::size_t l = j; l < task_count; ++l) {
      best = std::max(best, checked_row(acc, l)[j - 1]);
    }
    sum += best - last[j - 1];
  }
  return sum / static_cast<double>(task_count - 1);
}

MisclassReport misclass_ratios(const Confusion& confusion,
                               const std::vector<std::size_t>& old_classes,
                               const std::vector<std::size_t>& new_classes) {
  std::set<std::size_t> old_set(old_classes.begin(), old_classes.end());
  std::set<std::size_t> new_set(new_classes.begin(), new_classes.end());
  for (std::size_t c : old_set) {
    if (new_set.count(c)) throw std::invalid_argument("misclass_ratios: class sets overlap");
  }

  MisclassReport report;
  // Without both groups present the cross-group question is undefined.
  if (old_set.empty() || new_set.empty()) return report;
  const std::size_t c_total = confusion.size();
  for (std::size_t t = 0; t < c_total; ++t) {
    if (confusion[t].size() != c_total) {
      throw std::invalid_argument("misclass_ratios: confusion matrix not square");
    }
    const bool is_new = new_set.count(t) > 0;
    const bool is_old = old_set.count(t) > 0;
    if (!is_new && !is_old) continue;
    for (std::size_t p = 0; p < c_total; ++p) {
      if (p == t) continue;
      const std::size_t n = confusion[t][p];
      if (n == 0) continue;
      if (is_new) {
        report.new_misclassified += n;
        if (old_set.count(p)) report.new_as_old += n;
      } else {
        report.old_misclassified += n;
        if (new_set.count(p)) report.old_as_new += n;
      }
    }
  }
  if (report.new_misclassified > 0) {
    report.er_new_as_old = static_cast<double>(report.new_as_old) /
                           static_cast<double>(report.new_misclassified);
  }
  if (report.old_misclassified > 0) {
    report.er_old_as_new = static_cast<double>(report.old_as_new) /
                           static_cast<double>(report.old_misclassified);
  }
  return report;
}

double variance_indicator(const nn::Model& old_model,
                          const std::vector<Tensor>& augmented_features,
                          const std::vector<std::size_t>& old_class_ids) {
  if (augmented_features.empty()) {
    throw std::invalid_argument("variance_indicator: empty augmented set");
  }
  if (old_class_ids.empty()) {
    throw std::invalid_argument("variance_indicator: no old classes");
  }
  const std::size_t n = augmented_features.size();
  const std::size_t dim = old_model.input_dim();
  Tensor batch({n, dim});
  for (std::size_t i = 0; i < n; ++i) {
    if (augmented_features[i].size() != dim) {
      throw std::invalid_argument("variance_indicator: feature width mismatch");
    }
    std::copy(augmented_features[i].data.begin(), augmented_features[i].data.end(),
              batch.data.begin() + static_cast<std::ptrdiff_t>(i * dim));
  }
  const auto fwd = nn::forward(old_model, batch);

  double total = 0.0;
  for (std::size_t c : old_class_ids) {
    if (c >= old_model.class_count) {
      throw std::invalid_argument("variance_indicator: class id out of range");
    }
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += fwd.probabilities.at(i, c);
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = fwd.probabilities.at(i, c) - mean;
      var += d * d;
    }
    var /= static_cast<double>(n);  // population convention
    total += std::sqrt(var);
  }
  return total / static_cast<double>(old_class_ids.size());
}

double variance_indicator(const nn::Model& old_model,
                          const std::vector<stream::Example>& augmented_memory,
                          const std::vector<std::size_t>& old_class_ids) {
  std::vector<Tensor> feats;
  feats.reserve(augmented_memory.size());
  for (const auto& e : augmented_memory) feats.push_back(e.features);
  return variance_indicator(old_model, feats, old_class_ids);
}

double variance_indicator(const nn::Model& old_model,
                          const std::vector<stream::Example>& augmented_memory,
                          std::size_t old_class_count) {
  std::vector<std::size_t> ids(old_class_count);
  std::iota(ids.begin(), ids.end(), 0);
  return variance_indicator(old_model, augmented_memory, ids);
}

}  // namespace ocimix::metrics
