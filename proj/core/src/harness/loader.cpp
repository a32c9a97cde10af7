// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#include "litchi/harness/loader.hpp"

#include <cstring>
#include <random>

#include "litchi/error.hpp"

namespace litchi::harness {

nn::Tensor<float> image_to_tensor(const data::Image& image, int size) {
  const data::Image& src = (image.width == size && image.height == size) ? image : data::resize(image, size, size);
  nn::Tensor<float> t({1, 3, size, size});
  const int64_t plane = static_cast<int64_t>(size) * size;
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      const uint8_t* p = src.px(x, y);
      for (int c = 0; c < 3; ++c) t.data()[c * plane + y * size + x] = static_cast<float>(p[c]) / 255.0F;
    }
  return t;
}

Batch make_batch(const std::vector<data::Sample>& samples, int size, size_t index) {
  Batch b;
  b.index = index;
  const auto n = static_cast<int64_t>(samples.size());
  b.images = nn::Tensor<float>({n, 3, size, size});
  const int64_t per = 3LL * size * size;
  for (int64_t i = 0; i < n; ++i) {
    const auto t = image_to_tensor(samples[static_cast<size_t>(i)].image, size);
    std::memcpy(b.images.data() + i * per, t.data(), static_cast<size_t>(per) * sizeof(float));
    b.targets.push_back(samples[static_cast<size_t>(i)].record.annotations);
    b.ids.push_back(samples[static_cast<size_t>(i)].record.image_id);
  }
  return b;
}

std::vector<size_t> epoch_order(size_t n, uint64_t seed, int epoch, bool shuffle) {
  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;
  if (!shuffle) return order;
  std::mt19937_64 rng(seed ^ (0x9E3779B97F4A7C15ULL * static_cast<uint64_t>(epoch + 1)));
  for (size_t i = n; i > 1; --i) {
    std::uniform_int_distribution<size_t> pick(0, i - 1);
    std::swap(order[i - 1], order[pick(rng)]);
  }
  return order;
}

uint64_t batch_hash(const Batch& batch) {
  uint64_t h = 0xcbf29ce484222325ULL;
  const auto mix = [&](const void* data, size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < n; ++i) h = (h ^ p[i]) * 0x100000001b3ULL;
  };
  for (const auto& id : batch.ids) mix(id.data(), id.size() + 1);
  mix(batch.images.data(), static_cast<size_t>(batch.images.numel()) * sizeof(float));
  return h;
}

BatchLoader::BatchLoader(SampleSource source, std::vector<size_t> order, int batch_size, int image_size, int workers,
                         size_t queue_capacity)
    : source_(std::move(source)),
      order_(std::move(order)),
      batch_size_(batch_size),
      image_size_(image_size),
      num_batches_((order_.size() + static_cast<size_t>(batch_size) - 1) / static_cast<size_t>(batch_size)),
      capacity_(std::max<size_t>(1, queue_capacity)) {
  if (batch_size < 1) throw DomainError("batch_size", "must be positive");
  if (workers < 1) throw DomainError("workers", "must be positive");
  for (int i = 0; i < workers; ++i) threads_.emplace_back([this] { work(); });
}

BatchLoader::~BatchLoader() {
  {
    std::lock_guard lock(mu_);
    stop_ = true;
  }
  cv_.notify_all();
  for (auto& t : threads_) t.join();
}

void BatchLoader::work() {
  for (;;) {
    size_t idx = 0;
    {
      std::unique_lock lock(mu_);
      cv_.wait(lock, [&] { return stop_ || next_claim_ >= num_batches_ || next_claim_ < next_out_ + capacity_; });
      if (stop_ || next_claim_ >= num_batches_) return;
      idx = next_claim_++;
    }
    try {
      std::vector<data::Sample> samples;
      const size_t begin = idx * static_cast<size_t>(batch_size_);
      const size_t end = std::min(order_.size(), begin + static_cast<size_t>(batch_size_));
      for (size_t i = begin; i < end; ++i) samples.push_back(source_(order_[i]));
      Batch b = make_batch(samples, image_size_, idx);
      std::lock_guard lock(mu_);
      ready_.emplace(idx, std::move(b));
    } catch (...) {
      std::lock_guard lock(mu_);
      if (!error_) error_ = std::current_exception();
    }
    cv_.notify_all();
  }
}

std::optional<Batch> BatchLoader::next() {
  std::unique_lock lock(mu_);
  if (next_out_ >= num_batches_) return std::nullopt;
  cv_.wait(lock, [&] { return error_ || ready_.count(next_out_); });
  if (error_) std::rethrow_exception(error_);
  auto node = ready_.extract(next_out_);
  ++next_out_;
  lock.unlock();
  cv_.notify_all();
  return std::move(node.mapped());
}

}  // namespace litchi::harness
