// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <condition_variable>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "litchi/data/dataset.hpp"
#include "litchi/nn/tensor.hpp"

namespace litchi::harness {

/// Produces sample i of a dataset; must be safe to call concurrently.
using SampleSource = std::function<data::Sample(size_t)>;

struct Batch {
  size_t index = 0;
  /// (N, 3, S, S) in [0, 1].
  nn::Tensor<float> images;
  std::vector<std::vector<data::BoxAnnotation>> targets;
  std::vector<std::string> ids;
};

/// Resizes to size x size and converts HWC bytes to CHW floats in [0, 1].
nn::Tensor<float> image_to_tensor(const data::Image& image, int size);
Batch make_batch(const std::vector<data::Sample>& samples, int size, size_t index = 0);

/// Order in which an epoch visits the dataset: a Fisher-Yates shuffle seeded
/// by (seed, epoch), or the identity when shuffle is off.
std::vector<size_t> epoch_order(size_t n, uint64_t seed, int epoch, bool shuffle = true);

/// FNV-1a over batch ids and image values, for checking data order.
uint64_t batch_hash(const Batch& batch);

/// A pool of reader threads assembling batches into a bounded queue.
/// Batches are handed out strictly in order, so the result is independent of
/// the worker count.
class BatchLoader {
 public:
  BatchLoader(SampleSource source, std::vector<size_t> order, int batch_size, int image_size, int workers,
              size_t queue_capacity = 4);
  ~BatchLoader();
  BatchLoader(const BatchLoader&) = delete;
  BatchLoader& operator=(const BatchLoader&) = delete;

  size_t num_batches() const noexcept { return num_batches_; }
  /// Next batch in order, or empty once exhausted. Rethrows reader errors.
  std::optional<Batch> next();

 private:
  void work();

  SampleSource source_;
  std::vector<size_t> order_;
  int batch_size_, image_size_;
  size_t num_batches_, capacity_;
  std::mutex mu_;
  std::condition_variable cv_;
  size_t next_claim_ = 0, next_out_ = 0;
  bool stop_ = false;
  std::map<size_t, Batch> ready_;
  std::exception_ptr error_;
  std::vector<std::thread> threads_;
};

}  // namespace litchi::harness
