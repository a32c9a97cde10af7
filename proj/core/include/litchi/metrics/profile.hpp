// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <string>

#include "litchi/data/image.hpp"
#include "litchi/detect/model.hpp"

namespace litchi::metrics {

/// Exact element count of every trainable parameter.
template <typename T>
int64_t count_params(const nn::Module<T>& model);

/// Multiply-accumulates recorded by the conv and linear kernels during one
/// batch-1 forward pass at input_size x input_size.
template <typename T>
int64_t count_macs(detect::Detector<T>& model, int input_size);

/// Second route: runs a forward pass, then sums the closed-form cost of every
/// Conv2d (from its spec and last input size) and Linear layer in the tree.
template <typename T>
int64_t analytic_macs(detect::Detector<T>& model, int input_size);

inline double gflops_from_macs(int64_t macs) { return 2.0 * static_cast<double>(macs) / 1e9; }

template <typename T>
double count_gflops(detect::Detector<T>& model, int input_size) {
  return gflops_from_macs(count_macs(model, input_size));
}

/// CPU model name and logical core count, e.g. "Intel Xeon ... (8 threads)".
std::string hardware_string();

struct FpsResult {
  double fps = 0;
  double mean_latency_ms = 0;
  int iterations = 0;
  std::string hardware;
};

/// Batch-1 end-to-end latency (forward, decode and suppression) after warmup.
template <typename T>
FpsResult fps_benchmark(detect::Detector<T>& model, int input_size, int warmup, int iters);

/// |d(sum over channels of the centre activation) / d input| summed over
/// input channels and averaged over the batch, as an (H, W) map.
template <typename T>
nn::Tensor<T> erf_gradient(const std::function<nn::Var<T>(const nn::Var<T>&)>& feature_fn,
                           const nn::Tensor<T>& input);

/// Receptive field of the deepest backbone feature map.
template <typename T>
nn::Tensor<T> erf_gradient(detect::Detector<T>& model, const nn::Tensor<T>& input);

/// Normalised colour heatmap with a vertical colorbar on the right.
data::Image render_heatmap(const nn::Tensor<float>& map, int colorbar_width = 24);

}  // namespace litchi::metrics
