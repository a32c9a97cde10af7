// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#include "litchi/metrics/profile.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <thread>

#include <opencv2/imgproc.hpp>

#include "litchi/detect/boxes.hpp"
#include "litchi/error.hpp"

namespace litchi::metrics {

template <typename T>
int64_t count_params(const nn::Module<T>& model) {
  int64_t total = 0;
  for (const auto& p : model.named_parameters()) total += p.var.value().numel();
  return total;
}

namespace {

template <typename T>
nn::Var<T> blank_input(int input_size) {
  return nn::Var<T>(nn::Tensor<T>::full({1, 3, input_size, input_size}, T(0.5)));
}

template <typename T>
struct ModeRestore {
  nn::Module<T>& m;
  bool was_training;
  explicit ModeRestore(nn::Module<T>& module) : m(module), was_training(module.is_training()) { m.eval(); }
  ~ModeRestore() { m.train(was_training); }
};

}  // namespace

template <typename T>
int64_t count_macs(detect::Detector<T>& model, int input_size) {
  ModeRestore<T> restore(model);
  nn::NoGradGuard no_grad;
  nn::MacCounter counter;
  model.forward(blank_input<T>(input_size));
  return counter.macs();
}

template <typename T>
int64_t analytic_macs(detect::Detector<T>& model, int input_size) {
  ModeRestore<T> restore(model);
  {
    nn::NoGradGuard no_grad;
    model.forward(blank_input<T>(input_size));
  }
  int64_t total = 0;
  model.for_each_module([&](const std::string& name, nn::Module<T>& m) {
    if (auto* conv = dynamic_cast<nn::Conv2d<T>*>(&m)) {
      const auto hw = conv->last_input_hw();
      if (!hw) throw ShapeError("conv " + name + " was not reached by the forward pass");
      const auto& s = conv->spec();
      const int64_t ext = s.equivalent_extent();
      const int64_t oh = (hw->first + 2 * s.padding - ext) / s.stride + 1;
      const int64_t ow = (hw->second + 2 * s.padding - ext) / s.stride + 1;
      total += conv->last_input_batch() * oh * ow * s.weight_count();
    } else if (auto* lin = dynamic_cast<nn::Linear<T>*>(&m)) {
      total += lin->in_features() * lin->out_features();
    }
  });
  return total;
}

std::string hardware_string() {
  std::string model = "unknown cpu";
  std::ifstream in("/proc/cpuinfo");
  for (std::string line; std::getline(in, line);) {
    if (line.rfind("model name", 0) == 0) {
      const auto colon = line.find(':');
      if (colon != std::string::npos) model = line.substr(std::min(colon + 2, line.size()));
      break;
    }
  }
  return model + " (" + std::to_string(std::thread::hardware_concurrency()) + " threads)";
}

template <typename T>
FpsResult fps_benchmark(detect::Detector<T>& model, int input_size, int warmup, int iters) {
  if (iters < 1) throw DomainError("iters", "must be at least 1");
  ModeRestore<T> restore(model);
  nn::NoGradGuard no_grad;
  const auto input = blank_input<T>(input_size);
  const auto& strides = model.config().strides;
  auto run = [&] {
    const auto outputs = model.forward(input);
    const auto dets = detect::decode(outputs, strides, input_size, input_size);
    return detect::nms(dets.front(), 0.25, 0.7).size();
  };
  for (int i = 0; i < warmup; ++i) run();
  const auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < iters; ++i) run();
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {iters / seconds, 1000.0 * seconds / iters, iters, hardware_string()};
}

template <typename T>
nn::Tensor<T> erf_gradient(const std::function<nn::Var<T>(const nn::Var<T>&)>& feature_fn,
                           const nn::Tensor<T>& input) {
  if (input.rank() != 4) throw ShapeError("erf input must be (N, C, H, W)");
  nn::Var<T> x(input, true);
  nn::Var<T> y = feature_fn(x);
  if (y.value().rank() != 4) throw ShapeError("erf feature map must be (N, C, H, W)");
  const int64_t n = y.dim(0), c = y.dim(1), fh = y.dim(2), fw = y.dim(3);
  nn::Tensor<T> seed(y.value().shape());
  const int64_t cy = fh / 2, cx = fw / 2;
  for (int64_t b = 0; b < n; ++b)
    for (int64_t ch = 0; ch < c; ++ch) seed.data()[((b * c + ch) * fh + cy) * fw + cx] = T(1);
  y.backward(seed);
  const auto& g = x.grad();
  const int64_t ic = input.shape()[1], h = input.shape()[2], w = input.shape()[3];
  nn::Tensor<T> map({h, w});
  for (int64_t b = 0; b < n; ++b)
    for (int64_t ch = 0; ch < ic; ++ch)
      for (int64_t i = 0; i < h * w; ++i) map.data()[i] += std::abs(g.data()[(b * ic + ch) * h * w + i]);
  for (int64_t i = 0; i < h * w; ++i) map.data()[i] /= static_cast<T>(n);
  return map;
}

template <typename T>
nn::Tensor<T> erf_gradient(detect::Detector<T>& model, const nn::Tensor<T>& input) {
  ModeRestore<T> restore(model);
  return erf_gradient<T>([&](const nn::Var<T>& x) { return model.backbone().forward(x).back(); }, input);
}

data::Image render_heatmap(const nn::Tensor<float>& map, int colorbar_width) {
  if (map.rank() != 2) throw ShapeError("heatmap must be (H, W)");
  const int h = static_cast<int>(map.shape()[0]), w = static_cast<int>(map.shape()[1]);
  const float peak = std::max(*std::max_element(map.data(), map.data() + map.numel()), 1e-30F);
  cv::Mat gray(h, w + 4 + colorbar_width, CV_8UC1, cv::Scalar(0));
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      gray.at<uint8_t>(y, x) = static_cast<uint8_t>(std::lround(255.0F * map.data()[y * w + x] / peak));
    }
    const auto level = static_cast<uint8_t>(h > 1 ? std::lround(255.0 * (h - 1 - y) / (h - 1)) : 255);
    for (int x = w + 4; x < gray.cols; ++x) gray.at<uint8_t>(y, x) = level;
  }
  cv::Mat bgr;
  cv::applyColorMap(gray, bgr, cv::COLORMAP_JET);
  bgr(cv::Rect(w, 0, 4, h)).setTo(cv::Scalar(255, 255, 255));
  data::Image out(bgr.cols, bgr.rows);
  for (int y = 0; y < bgr.rows; ++y)
    for (int x = 0; x < bgr.cols; ++x) {
      const auto& p = bgr.at<cv::Vec3b>(y, x);
      uint8_t* q = out.px(x, y);
      q[0] = p[2], q[1] = p[1], q[2] = p[0];
    }
  return out;
}

#define LITCHI_INSTANTIATE_PROFILE(T)                                                                \
  template int64_t count_params<T>(const nn::Module<T>&);                                            \
  template int64_t count_macs<T>(detect::Detector<T>&, int);                                         \
  template int64_t analytic_macs<T>(detect::Detector<T>&, int);                                      \
  template FpsResult fps_benchmark<T>(detect::Detector<T>&, int, int, int);                          \
  template nn::Tensor<T> erf_gradient<T>(const std::function<nn::Var<T>(const nn::Var<T>&)>&,         \
                                         const nn::Tensor<T>&);                                       \
  template nn::Tensor<T> erf_gradient<T>(detect::Detector<T>&, const nn::Tensor<T>&);
LITCHI_INSTANTIATE_PROFILE(float)
LITCHI_INSTANTIATE_PROFILE(double)

}  // namespace litchi::metrics
