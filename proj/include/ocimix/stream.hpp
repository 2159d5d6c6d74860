#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ocimix/tensor.hpp"

namespace ocimix::stream {

// One labelled sample. Features live in [0,1]; shape is either flat {dim}
// or image-shaped {H,W} / {H,W,Ch}.
struct Example {
  Tensor features;
  std::size_t label = 0;
};

struct TaskSpec {
  std::size_t task_id = 0;
  std::vector<std::size_t> class_ids;
  std::vector<Example> train_examples;
  std::vector<Example> test_examples;
};

struct StreamBatch {
  std::vector<Example> examples;
  std::size_t task_id = 0;
  std::size_t batch_index = 0;
};

// One-shot pass over a task's training set in seeded-shuffled order. The
// final batch may be short. There is no rewind.
class BatchStream {
 public:
  BatchStream(const TaskSpec& task, std::size_t batch_size, std::uint64_t seed);
  std::optional<StreamBatch> next();
  std::size_t batches_total() const;

 private:
  const TaskSpec* task_;
  std::size_t batch_size_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
  std::size_t batch_index_ = 0;
};

// Seeded random partition of the class set into tasks of `classes_per_task`
// classes each. Train/test membership is preserved per class. Throws when
// the class count is not divisible by classes_per_task.
std::vector<TaskSpec> split_into_tasks(const std::vector<Example>& train,
                                       const std::vector<Example>& test,
                                       std::size_t classes_per_task,
                                       std::uint64_t seed);

// IDX (ubyte) ingestion: big-endian, magic 0x00000803 for images and
// 0x00000801 for labels. Pixel bytes are scaled to [0,1].
std::vector<Example> load_idx(const std::string& images_path,
                              const std::string& labels_path);

struct BlobDataset {
  std::vector<Example> train;
  std::vector<Example> test;
};

// Isotropic Gaussian class blobs with seeded random means of norm
// `separation`, affinely mapped into [0,1].
BlobDataset gen_gaussian_blobs(std::size_t class_count, std::size_t dim,
                               double separation, std::size_t per_class_train,
                               std::size_t per_class_test, std::uint64_t seed);

// Synthetic side x side grayscale images: each class is a smooth random
// template; samples vary by horizontal flip, sub-pixel shift, contrast and
// pixel noise, so flip/crop/jitter augmentations generate in-distribution
// views. `similarity` in [0,1) blends a common background into every
// template to control class confusability.
BlobDataset gen_pattern_images(std::size_t class_count, std::size_t side,
                               double similarity, std::size_t per_class_train,
                               std::size_t per_class_test, std::uint64_t seed);

// CSV with header "label,f0,...,f{dim-1}"; features flattened row-major.
void write_examples_csv(const std::vector<Example>& examples, const std::string& path);
std::vector<Example> read_examples_csv(const std::string& path);

// Reshape every example's features to `shape` (sizes must agree).
std::vector<Example> reshape_examples(std::vector<Example> examples,
                                      const std::vector<std::size_t>& shape);

}  // namespace ocimix::stream
