// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "litchi/nn/drb.hpp"

namespace litchi::nn {

/// Multi-scale residual block. The input is split in halves (a, b); `a`
/// goes through a 3x3 stem and three depthwise paths (3x3; 3x3 + 3x3 d2;
/// 5x5 + 3x3 d2 + 3x3 d3, the last two as reparam blocks), whose
/// concatenation is projected back to C/2 and added to `b`. The output is
/// concat(a, b + projection), so the channel count is preserved.
/// Dilation schedule of the two reparameterised paths. `rates_123` uses
/// {1, 2} and {1, 2, 3} (the 5x5 path carries d = 1); `rates_135` uses the
/// alternative schedule: {1, 3} and {1, 3, 5}.
enum class MsrDilation { rates_123, rates_135 };

template <typename T>
class MsrBlock : public Layer<T> {
 public:
  MsrBlock(int64_t channels, InitRng& rng, MsrDilation dilation = MsrDilation::rates_123);
  Var<T> forward(const Var<T>& x) override;

  /// Merges both reparam paths for inference.
  void switch_to_deploy();
  DilatedReparamConv<T>& path2() { return *d2_; }
  DilatedReparamConv<T>& path3() { return *d3_; }

 private:
  int64_t half_;
  std::shared_ptr<ConvBnAct<T>> stem_, d1_, proj_;
  std::shared_ptr<DilatedReparamConv<T>> d2_, d3_;
};

/// C3 topology with MSR inner blocks: two 1x1 stems, n MSR blocks on the
/// first, concat, 1x1 fuse.
template <typename T>
class C3Msr : public Layer<T> {
 public:
  C3Msr(int64_t c_in, int64_t c_out, int n_blocks, InitRng& rng, double expansion = 0.5,
        MsrDilation dilation = MsrDilation::rates_123);
  Var<T> forward(const Var<T>& x) override;

  int64_t hidden() const noexcept { return hidden_; }
  void switch_to_deploy();

 private:
  int64_t hidden_;
  std::shared_ptr<ConvBnAct<T>> cv1_, cv2_, cv3_;
  std::vector<std::shared_ptr<MsrBlock<T>>> blocks_;
};

extern template class MsrBlock<float>;
extern template class MsrBlock<double>;
extern template class C3Msr<float>;
extern template class C3Msr<double>;

}  // namespace litchi::nn
