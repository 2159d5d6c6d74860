#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "ocimix/model.hpp"
#include "ocimix/stream.hpp"

namespace ocimix::memory {

// Fixed-capacity replay memory maintained by reservoir sampling: after n
// streamed insertions every example has inclusion probability min(1, M/n).
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return items_.size(); }
  std::uint64_t seen_count() const { return seen_; }
  const std::vector<stream::Example>& items() const { return items_; }

  // Reservoir update with the rng supplying the replacement draw.
  void insert(const stream::Example& example, std::mt19937_64& rng);

  // Deterministic core used by insert: `draw` must be uniform over
  // [0, seen_count()]. When the buffer is full the example replaces slot
  // `draw` iff draw < capacity. Exposed so the exact inclusion-probability
  // enumeration can walk every branch of the choice tree.
  void insert_with_draw(const stream::Example& example, std::uint64_t draw);

 private:
  std::size_t capacity_;
  std::vector<stream::Example> items_;
  std::uint64_t seen_ = 0;
};

// k items uniformly without replacement; all items when k >= size; empty
// list on an empty buffer.
std::vector<stream::Example> random_retrieve(const ReplayBuffer& buffer, std::size_t k,
                                             std::mt19937_64& rng);

// Loss-increase retrieval: draw `candidates` items uniformly, rank them by
// the cross-entropy increase under a virtual one-step SGD update on the
// current batch, and return the k largest. Ties break by ascending buffer
// index. The model passed in is never mutated. An empty current batch falls
// back to random_retrieve.
std::vector<stream::Example> mir_retrieve(const ReplayBuffer& buffer, std::size_t k,
                                          std::size_t candidates, const nn::Model& model,
                                          const stream::StreamBatch& current_batch,
                                          double lr, std::mt19937_64& rng);

// Debug snapshot: label -> count over the buffer contents.
std::map<std::size_t, std::size_t> label_histogram(const ReplayBuffer& buffer);
void write_label_histogram_csv(const ReplayBuffer& buffer, const std::string& path);

}  // namespace ocimix::memory
