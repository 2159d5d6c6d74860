#pragma once

#include <optional>
#include <vector>

#include "ocimix/model.hpp"
#include "ocimix/stream.hpp"

namespace ocimix::metrics {

// Lower-triangular accuracy record: row t (0-based) holds the per-task test
// accuracies after training tasks 1..t+1, so it has t+1 entries in [0,1].
using AccuracyMatrix = std::vector<std::vector<double>>;

// Mean accuracy over all tasks seen after training `task_count` tasks
// (1-based). Throws when the row is missing or malformed.
double average_accuracy(const AccuracyMatrix& acc, std::size_t task_count);

// Mean over earlier tasks of (best accuracy so far - current accuracy).
// Negative values are possible and accepted. Requires task_count >= 2.
double average_forgetting(const AccuracyMatrix& acc, std::size_t task_count);

using Confusion = std::vector<std::vector<std::size_t>>;  // [true][predicted]

struct MisclassReport {
  // Fraction of misclassified new-class samples predicted as an old class,
  // and vice versa. Absent when the group has no misclassified samples.
  std::optional<double> er_new_as_old;
  std::optional<double> er_old_as_new;
  std::size_t new_misclassified = 0;
  std::size_t new_as_old = 0;
  std::size_t old_misclassified = 0;
  std::size_t old_as_new = 0;
};

MisclassReport misclass_ratios(const Confusion& confusion,
                               const std::vector<std::size_t>& old_classes,
                               const std::vector<std::size_t>& new_classes);

// Augmentation-strength indicator: run the augmented set through the frozen
// pre-task model, take the per-class population variance of the output
// probabilities across the set, and return the mean per-class standard
// deviation over the old classes.
double variance_indicator(const nn::Model& old_model,
                          const std::vector<Tensor>& augmented_features,
                          const std::vector<std::size_t>& old_class_ids);
double variance_indicator(const nn::Model& old_model,
                          const std::vector<stream::Example>& augmented_memory,
                          const std::vector<std::size_t>& old_class_ids);
// Convenience form: old classes are ids 0..old_class_count-1.
double variance_indicator(const nn::Model& old_model,
                          const std::vector<stream::Example>& augmented_memory,
                          std::size_t old_class_count);

}  // namespace ocimix::metrics
