// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>

#include "litchi/detect/model.hpp"
#include "litchi/metrics/profile.hpp"
#include "litchi/nn/layers.hpp"

namespace m = litchi::metrics;
namespace nn = litchi::nn;
namespace detect = litchi::detect;

namespace {

/// Parameter count from layer types alone: conv kernels and biases, norm
/// affine pairs, linear weights and biases, fusion weights.
int64_t typed_param_sum(const nn::Module<float>& model) {
  int64_t total = 0;
  model.for_each_module([&](const std::string& name, const nn::Module<float>& mod) {
    if (const auto* c = dynamic_cast<const nn::Conv2d<float>*>(&mod)) {
      const auto& s = c->spec();
      total += s.out_channels * (s.in_channels / s.groups) * s.kernel * s.kernel + (s.bias ? s.out_channels : 0);
    } else if (const auto* bn = dynamic_cast<const nn::BatchNorm2d<float>*>(&mod)) {
      total += 2 * bn->channels();
    } else if (const auto* gn = dynamic_cast<const nn::GroupNorm<float>*>(&mod)) {
      total += 2 * gn->channels();
    } else if (const auto* lin = dynamic_cast<const nn::Linear<float>*>(&mod)) {
      total += lin->in_features() * lin->out_features() + (lin->has_bias() ? lin->out_features() : 0);
    } else if (const auto* ws = dynamic_cast<const detect::WeightedSum<float>*>(&mod)) {
      total += ws->inputs();
    } else {
      // Containers own no tensors directly.
      int64_t own = static_cast<int64_t>(mod.named_parameters().size());
      for (const auto& [child, sub] : mod.children()) own -= static_cast<int64_t>(sub->named_parameters().size());
      EXPECT_EQ(own, 0) << name << " (" << mod.type_name() << ") owns parameters the walker does not know";
    }
  });
  return total;
}

detect::ModelConfig toggled(bool a, bool b, bool c, int size) {
  detect::ModelConfig cfg;
  cfg.use_c3msr = a;
  cfg.use_f3 = b;
  cfg.use_litchi_head = c;
  cfg.input_size = size;
  return cfg;
}

}  // namespace

TEST(CountParams, SingleConvClosedForm) {
  nn::InitRng rng(0);
  nn::Conv2d<float> conv({16, 32, 3, 1, 1, 1, 1, true}, rng);
  EXPECT_EQ(m::count_params(conv), 4640);
}

TEST(CountMacs, SingleConvClosedForm) {
  nn::InitRng rng(0);
  nn::Conv2d<float> conv({16, 32, 3, 1, 1, 1, 1, true}, rng);
  nn::NoGradGuard no_grad;
  nn::MacCounter counter;
  conv.forward(nn::Var<float>(nn::Tensor<float>({1, 16, 64, 64})));
  EXPECT_EQ(counter.macs(), 4608 * 64 * 64);
  EXPECT_DOUBLE_EQ(m::gflops_from_macs(counter.macs()), 2.0 * 4608 * 64 * 64 / 1e9);
}

TEST(CountParams, FullModelMatchesTypedWalkerForEveryToggle) {
  for (int bits = 0; bits < 8; ++bits) {
    const auto model = detect::build_model<float>(toggled(bits & 1, bits & 2, bits & 4, 64));
    EXPECT_EQ(m::count_params(*model), typed_param_sum(*model)) << "toggles " << bits;
  }
}

TEST(CountMacs, CounterAgreesWithAnalyticWalkerForEveryToggle) {
  for (int bits = 0; bits < 8; ++bits) {
    const auto model = detect::build_model<float>(toggled(bits & 1, bits & 2, bits & 4, 256));
    EXPECT_EQ(m::count_macs(*model, 256), m::analytic_macs(*model, 256)) << "toggles " << bits;
  }
}

TEST(CountParams, FusionNeckReducesParameters) {
  const auto base = detect::build_model<float>(toggled(false, false, false, 64));
  const auto f3 = detect::build_model<float>(toggled(false, true, false, 64));
  const auto full = detect::build_model<float>(toggled(true, true, true, 64));
  EXPECT_LT(m::count_params(*f3), m::count_params(*base));
  EXPECT_LT(m::count_params(*full), m::count_params(*base));
}

TEST(Fps, PositiveWithHardwareString) {
  auto model = detect::build_model<float>(toggled(true, true, true, 64));
  const auto r = m::fps_benchmark(*model, 64, 1, 3);
  EXPECT_GT(r.fps, 0.0);
  EXPECT_TRUE(std::isfinite(r.fps));
  EXPECT_EQ(r.iterations, 3);
  EXPECT_FALSE(r.hardware.empty());
  EXPECT_TRUE(model->is_training());
}

namespace {

int support_extent(const nn::Tensor<double>& map, bool rows) {
  const int64_t h = map.shape()[0], w = map.shape()[1];
  int64_t lo = rows ? h : w, hi = -1;
  for (int64_t y = 0; y < h; ++y)
    for (int64_t x = 0; x < w; ++x) {
      if (map.data()[y * w + x] == 0.0) continue;
      const int64_t v = rows ? y : x;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  return static_cast<int>(hi - lo + 1);
}

}  // namespace

TEST(Erf, SingleConvSupportIsKernelSized) {
  nn::InitRng rng(4);
  nn::Conv2d<double> conv({3, 4, 3, 1, 1, 1, 1, false}, rng);
  nn::Tensor<double> input({2, 3, 15, 15}, 0.3);
  const auto map = m::erf_gradient<double>([&](const nn::Var<double>& x) { return conv.forward(x); }, input);
  EXPECT_EQ(support_extent(map, true), 3);
  EXPECT_EQ(support_extent(map, false), 3);
  EXPECT_GT(map.data()[7 * 15 + 7], 0.0);
}

TEST(Erf, TwoStackedConvsSupportIsFiveByFive) {
  nn::InitRng rng(5);
  nn::Conv2d<double> a({3, 4, 3, 1, 1, 1, 1, false}, rng), b({4, 4, 3, 1, 1, 1, 1, false}, rng);
  nn::Tensor<double> input({1, 3, 15, 15}, 0.3);
  const auto map =
      m::erf_gradient<double>([&](const nn::Var<double>& x) { return b.forward(a.forward(x)); }, input);
  EXPECT_EQ(support_extent(map, true), 5);
  EXPECT_EQ(support_extent(map, false), 5);
}

TEST(Erf, FullModelHeatmapRenders) {
  auto model = detect::build_model<float>(toggled(true, true, true, 64));
  nn::Tensor<float> input({1, 3, 64, 64}, 0.5F);
  const auto map = m::erf_gradient(*model, input);
  ASSERT_EQ(map.shape(), (nn::Shape{64, 64}));
  EXPECT_GT(*std::max_element(map.data(), map.data() + map.numel()), 0.0F);
  const auto img = m::render_heatmap(map);
  EXPECT_EQ(img.height, 64);
  EXPECT_EQ(img.width, 64 + 4 + 24);
}
