// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gradcheck.hpp"
#include "litchi/error.hpp"
#include "litchi/nn/ops.hpp"

namespace nn = litchi::nn;
using litchi::testing::gradcheck;
using litchi::testing::random_tensor;
using nn::Tensor;
using nn::Var;
using Vars = std::vector<Var<double>>;

namespace {

constexpr double kGradTol = 1e-6;

/// Direct 7-loop convolution used as the reference for the GEMM path.
Tensor<double> conv_reference(const Tensor<double>& x, const Tensor<double>& w, const nn::ConvGeometry& g) {
  const int64_t n = x.dim(0), cin = x.dim(1), h = x.dim(2), wd = x.dim(3);
  const int64_t cout = w.dim(0), k = w.dim(2), cin_g = cin / g.groups, cout_g = cout / g.groups;
  const int64_t oh = (h + 2 * g.padding - g.dilation * (k - 1) - 1) / g.stride + 1;
  const int64_t ow = (wd + 2 * g.padding - g.dilation * (k - 1) - 1) / g.stride + 1;
  Tensor<double> y({n, cout, oh, ow});
  for (int64_t b = 0; b < n; ++b)
    for (int64_t o = 0; o < cout; ++o)
      for (int64_t oy = 0; oy < oh; ++oy)
        for (int64_t ox = 0; ox < ow; ++ox) {
          double acc = 0;
          const int64_t grp = o / cout_g;
          for (int64_t c = 0; c < cin_g; ++c)
            for (int64_t i = 0; i < k; ++i)
              for (int64_t j = 0; j < k; ++j) {
                const int64_t iy = oy * g.stride - g.padding + i * g.dilation;
                const int64_t ix = ox * g.stride - g.padding + j * g.dilation;
                if (iy < 0 || iy >= h || ix < 0 || ix >= wd) continue;
                acc += w.at(o, c, i, j) * x.at(b, grp * cin_g + c, iy, ix);
              }
          y.at(b, o, oy, ox) = acc;
        }
  return y;
}

}  // namespace

TEST(Broadcast, ShapesFollowNumpyRules) {
  Var<double> a(Tensor<double>({2, 1, 3}, 1.0));
  Var<double> b(Tensor<double>({4, 1}, 2.0));
  EXPECT_EQ(nn::add(a, b).shape(), (nn::Shape{2, 4, 3}));
  Var<double> c(Tensor<double>({2, 5}));
  EXPECT_THROW(nn::add(a, c), litchi::ShapeError);
}

TEST(Gradcheck, BinaryOpsWithBroadcast) {
  std::mt19937_64 rng(1);
  const auto x = random_tensor({2, 3, 1, 4}, rng);
  const auto y = random_tensor({3, 5, 1}, rng, 0.5, 1.5);
  for (auto op : {nn::add<double>, nn::sub<double>, nn::mul<double>, nn::div<double>}) {
    const auto r = gradcheck([&](const Vars& v) { return op(v[0], v[1]); }, {x, y});
    EXPECT_LT(r.max_rel_error, kGradTol) << r.worst;
  }
  const auto r = gradcheck([](const Vars& v) { return nn::maximum(v[0], v[1]); }, {x, random_tensor({2, 3, 1, 4}, rng)});
  EXPECT_LT(r.max_rel_error, kGradTol) << r.worst;
}

TEST(Gradcheck, UnaryOps) {
  std::mt19937_64 rng(2);
  const auto x = random_tensor({3, 7}, rng, -3, 3);
  const auto pos = random_tensor({3, 7}, rng, 0.2, 3);
  using Fn = Var<double> (*)(const Var<double>&);
  for (Fn op : {static_cast<Fn>(nn::exp<double>), static_cast<Fn>(nn::sigmoid<double>),
                static_cast<Fn>(nn::silu<double>), static_cast<Fn>(nn::gelu<double>),
                static_cast<Fn>(nn::softplus<double>), static_cast<Fn>(nn::atan<double>),
                static_cast<Fn>(nn::square<double>), static_cast<Fn>(nn::tanh<double>),
                static_cast<Fn>(nn::neg<double>)}) {
    const auto r = gradcheck([&](const Vars& v) { return op(v[0]); }, {x});
    EXPECT_LT(r.max_rel_error, kGradTol) << r.worst;
  }
  for (Fn op : {static_cast<Fn>(nn::log<double>), static_cast<Fn>(nn::sqrt<double>)}) {
    const auto r = gradcheck([&](const Vars& v) { return op(v[0]); }, {pos});
    EXPECT_LT(r.max_rel_error, kGradTol) << r.worst;
  }
}

TEST(Gradcheck, Reductions) {
  std::mt19937_64 rng(3);
  const auto x = random_tensor({2, 3, 4, 5}, rng);
  EXPECT_LT(gradcheck([](const Vars& v) { return nn::sum_dims(v[0], {1, 3}); }, {x}).max_rel_error, kGradTol);
  EXPECT_LT(gradcheck([](const Vars& v) { return nn::mean_dims(v[0], {2}); }, {x}).max_rel_error, kGradTol);
  EXPECT_LT(gradcheck([](const Vars& v) { return nn::mean(v[0]); }, {x}).max_rel_error, kGradTol);
}

TEST(Gradcheck, LayoutOps) {
  std::mt19937_64 rng(4);
  const auto x = random_tensor({2, 4, 3, 5}, rng);
  const auto y = random_tensor({2, 2, 3, 5}, rng);
  EXPECT_LT(gradcheck([](const Vars& v) { return nn::permute(v[0], {0, 2, 3, 1}); }, {x}).max_rel_error, kGradTol);
  EXPECT_LT(gradcheck([](const Vars& v) { return nn::concat<double>({v[0], v[1]}, 1); }, {x, y}).max_rel_error,
            kGradTol);
  EXPECT_LT(gradcheck([](const Vars& v) { return nn::slice(v[0], 3, 1, 3); }, {x}).max_rel_error, kGradTol);
  EXPECT_LT(gradcheck(
                [](const Vars& v) {
                  auto parts = nn::split(v[0], 1, {1, 3});
                  return nn::mul(parts[0], nn::sum_dims(parts[1], {1}));
                },
                {x})
                .max_rel_error,
            kGradTol);
  EXPECT_LT(gradcheck([](const Vars& v) { return nn::pad2d(v[0], 1, 2, 0, 3); }, {x}).max_rel_error, kGradTol);
  EXPECT_LT(gradcheck([](const Vars& v) { return nn::upsample_nearest(v[0], 2); }, {x}).max_rel_error, kGradTol);
  EXPECT_LT(gradcheck([](const Vars& v) { return nn::reshape(v[0], {8, 15}); }, {x}).max_rel_error, kGradTol);
}

struct ConvCase {
  int64_t cin, cout, k;
  nn::ConvGeometry g;
};

class ConvTest : public ::testing::TestWithParam<ConvCase> {};

TEST_P(ConvTest, MatchesDirectLoopsAndGradients) {
  const ConvCase c = GetParam();
  std::mt19937_64 rng(5);
  const auto x = random_tensor({2, c.cin, 7, 6}, rng);
  const auto w = random_tensor({c.cout, c.cin / c.g.groups, c.k, c.k}, rng);
  const auto b = random_tensor({c.cout}, rng);
  Var<double> out = nn::conv2d(Var<double>(x), Var<double>(w), Var<double>(), c.g);
  EXPECT_LT(nn::max_abs_diff(out.value(), conv_reference(x, w, c.g)), 1e-12);
  const auto r =
      gradcheck([&](const Vars& v) { return nn::conv2d(v[0], v[1], v[2], c.g); }, {x, w, b});
  EXPECT_LT(r.max_rel_error, kGradTol) << r.worst;
}

INSTANTIATE_TEST_SUITE_P(
    Geometries, ConvTest,
    ::testing::Values(ConvCase{3, 4, 3, {1, 1, 1, 1}}, ConvCase{3, 4, 3, {2, 1, 1, 1}}, ConvCase{4, 6, 1, {1, 0, 1, 1}},
                      ConvCase{4, 4, 3, {1, 2, 2, 4}}, ConvCase{4, 4, 3, {1, 3, 3, 4}},
                      ConvCase{4, 4, 5, {2, 2, 1, 4}}, ConvCase{4, 6, 3, {1, 1, 1, 2}},
                      ConvCase{2, 2, 2, {2, 0, 1, 1}}),
    [](const ::testing::TestParamInfo<ConvCase>& info) {
      const ConvCase& c = info.param;
      return "k" + std::to_string(c.k) + "s" + std::to_string(c.g.stride) + "p" + std::to_string(c.g.padding) + "d" +
             std::to_string(c.g.dilation) + "g" + std::to_string(c.g.groups) + "_" + std::to_string(info.index);
    });

TEST(Conv, RejectsMismatchedChannels) {
  Var<double> x(Tensor<double>({1, 3, 4, 4}));
  Var<double> w(Tensor<double>({4, 2, 3, 3}));
  EXPECT_THROW(nn::conv2d(x, w, Var<double>(), {}), litchi::ShapeError);
}

TEST(MacCounter, CountsConvAndLinear) {
  Var<double> x(Tensor<double>({1, 4, 8, 8}));
  Var<double> w(Tensor<double>({6, 2, 3, 3}));
  nn::MacCounter counter;
  nn::conv2d(x, w, Var<double>(), {1, 1, 1, 2});
  EXPECT_EQ(counter.macs(), 6 * 8 * 8 * 2 * 9);
  {
    nn::MacCounter inner;
    nn::linear(Var<double>(Tensor<double>({2, 5})), Var<double>(Tensor<double>({3, 5})), Var<double>());
    EXPECT_EQ(inner.macs(), 2 * 3 * 5);
  }
  EXPECT_EQ(counter.macs(), 6 * 8 * 8 * 2 * 9);
}

TEST(Gradcheck, LinearAndBmm) {
  std::mt19937_64 rng(6);
  EXPECT_LT(gradcheck([](const Vars& v) { return nn::linear(v[0], v[1], v[2]); },
                      {random_tensor({3, 5}, rng), random_tensor({4, 5}, rng), random_tensor({4}, rng)})
                .max_rel_error,
            kGradTol);
  for (int ta = 0; ta < 2; ++ta) {
    for (int tb = 0; tb < 2; ++tb) {
      const auto a = random_tensor(ta ? nn::Shape{2, 4, 3} : nn::Shape{2, 3, 4}, rng);
      const auto b = random_tensor(tb ? nn::Shape{2, 5, 4} : nn::Shape{2, 4, 5}, rng);
      Var<double> out = nn::bmm(Var<double>(a), Var<double>(b), ta, tb);
      ASSERT_EQ(out.shape(), (nn::Shape{2, 3, 5}));
      for (int64_t i = 0; i < 2; ++i)
        for (int64_t r = 0; r < 3; ++r)
          for (int64_t c = 0; c < 5; ++c) {
            double acc = 0;
            for (int64_t k = 0; k < 4; ++k) {
              const double av = ta ? a[(i * 4 + k) * 3 + r] : a[(i * 3 + r) * 4 + k];
              const double bv = tb ? b[(i * 5 + c) * 4 + k] : b[(i * 4 + k) * 5 + c];
              acc += av * bv;
            }
            EXPECT_NEAR(out.value()[(i * 3 + r) * 5 + c], acc, 1e-12);
          }
      const auto r = gradcheck([&](const Vars& v) { return nn::bmm(v[0], v[1], ta, tb); }, {a, b});
      EXPECT_LT(r.max_rel_error, kGradTol) << r.worst;
    }
  }
}

TEST(Gradcheck, Normalisation) {
  std::mt19937_64 rng(7);
  const auto x = random_tensor({3, 4, 3, 2}, rng, -2, 2);
  const auto gamma = random_tensor({4}, rng, 0.5, 1.5);
  const auto beta = random_tensor({4}, rng);
  auto r = gradcheck(
      [](const Vars& v) {
        Tensor<double> rm({4}), rv({4}, 1.0);
        return nn::batch_norm_train(v[0], v[1], v[2], rm, rv, 0.1, 1e-5);
      },
      {x, gamma, beta});
  EXPECT_LT(r.max_rel_error, 1e-5) << r.worst;
  Tensor<double> rm = random_tensor({4}, rng), rv = random_tensor({4}, rng, 0.5, 2);
  r = gradcheck([&](const Vars& v) { return nn::batch_norm_eval(v[0], v[1], v[2], rm, rv, 1e-5); }, {x, gamma, beta});
  EXPECT_LT(r.max_rel_error, kGradTol) << r.worst;
  r = gradcheck([](const Vars& v) { return nn::group_norm(v[0], 2, v[1], v[2], 1e-5); }, {x, gamma, beta});
  EXPECT_LT(r.max_rel_error, 1e-5) << r.worst;
}

TEST(BatchNorm, TrainingNormalisesAndUpdatesRunningStats) {
  std::mt19937_64 rng(8);
  const auto x = random_tensor({4, 2, 3, 3}, rng, 1, 3);
  Tensor<double> rm({2}), rv({2}, 1.0);
  Var<double> y = nn::batch_norm_train(Var<double>(x), Var<double>(Tensor<double>({2}, 1.0)),
                                       Var<double>(Tensor<double>({2})), rm, rv, 0.1, 0.0);
  for (int64_t c = 0; c < 2; ++c) {
    double s = 0, s2 = 0, xs = 0, xs2 = 0;
    for (int64_t n = 0; n < 4; ++n)
      for (int64_t i = 0; i < 9; ++i) {
        const double v = y.value()[(n * 2 + c) * 9 + i];
        s += v;
        s2 += v * v;
        const double xv = x[(n * 2 + c) * 9 + i];
        xs += xv;
        xs2 += xv * xv;
      }
    EXPECT_NEAR(s / 36, 0.0, 1e-12);
    EXPECT_NEAR(s2 / 36, 1.0, 1e-9);
    const double mu = xs / 36;
    const double unbiased = (xs2 - 36 * mu * mu) / 35;
    EXPECT_NEAR(rm[c], 0.1 * mu, 1e-12);
    EXPECT_NEAR(rv[c], 0.9 + 0.1 * unbiased, 1e-12);
  }
}

TEST(Gradcheck, SoftmaxPoolLoss) {
  std::mt19937_64 rng(9);
  EXPECT_LT(gradcheck([](const Vars& v) { return nn::softmax_last(v[0]); }, {random_tensor({3, 6}, rng, -3, 3)})
                .max_rel_error,
            kGradTol);
  // Distinct values keep the max unique so the finite difference is smooth.
  Tensor<double> x({1, 2, 5, 5});
  for (int64_t i = 0; i < x.numel(); ++i) x[i] = std::sin(1.7 * static_cast<double>(i)) * 3;
  EXPECT_LT(gradcheck([](const Vars& v) { return nn::max_pool2d(v[0], 5, 1, 2); }, {x}).max_rel_error, kGradTol);
  EXPECT_LT(gradcheck([](const Vars& v) { return nn::max_pool2d(v[0], 2, 2, 0); }, {x}).max_rel_error, kGradTol);
  const auto targets = random_tensor({4, 3}, rng, 0, 1);
  EXPECT_LT(gradcheck([&](const Vars& v) { return nn::bce_with_logits_sum(v[0], targets); },
                      {random_tensor({4, 3}, rng, -30, 30)})
                .max_rel_error,
            kGradTol);
}

TEST(MaxPool, MatchesWindowMaximum) {
  std::mt19937_64 rng(10);
  const auto x = random_tensor({1, 1, 6, 6}, rng);
  Var<double> y = nn::max_pool2d(Var<double>(x), 5, 1, 2);
  for (int64_t oy = 0; oy < 6; ++oy)
    for (int64_t ox = 0; ox < 6; ++ox) {
      double m = -1e300;
      for (int64_t iy = std::max<int64_t>(0, oy - 2); iy <= std::min<int64_t>(5, oy + 2); ++iy)
        for (int64_t ix = std::max<int64_t>(0, ox - 2); ix <= std::min<int64_t>(5, ox + 2); ++ix)
          m = std::max(m, x.at(0, 0, iy, ix));
      EXPECT_EQ(y.value().at(0, 0, oy, ox), m);
    }
}

TEST(Gradcheck, GatherCells) {
  std::mt19937_64 rng(11);
  const auto m = random_tensor({2, 3, 4, 4}, rng);
  const std::vector<nn::CellRef> cells{{0, 1, 2}, {1, 3, 0}, {0, 1, 2}};
  Var<double> g = nn::gather_cells(Var<double>(m), cells);
  ASSERT_EQ(g.shape(), (nn::Shape{3, 3}));
  EXPECT_EQ(g.value()[3 + 1], m.at(1, 1, 3, 0));
  EXPECT_LT(gradcheck([&](const Vars& v) { return nn::gather_cells(v[0], cells); }, {m}).max_rel_error, kGradTol);
}

TEST(Autograd, NoGradSkipsRecording) {
  Var<double> x(Tensor<double>({3}, 2.0), true);
  {
    nn::NoGradGuard guard;
    EXPECT_FALSE(nn::mul(x, x).requires_grad());
  }
  Var<double> y = nn::sum(nn::mul(x, x));
  y.backward();
  EXPECT_DOUBLE_EQ(x.grad()[0], 4.0);
}

TEST(Autograd, FloatPathAgreesWithDouble) {
  std::mt19937_64 rng(12);
  const auto x = random_tensor({1, 3, 6, 6}, rng);
  const auto w = random_tensor({4, 3, 3, 3}, rng);
  Var<double> yd = nn::silu(nn::conv2d(Var<double>(x), Var<double>(w), Var<double>(), {1, 1, 1, 1}));
  Var<float> yf = nn::silu(nn::conv2d(Var<float>(x.cast<float>()), Var<float>(w.cast<float>()), Var<float>(),
                                      {1, 1, 1, 1}));
  EXPECT_LT(nn::max_abs_diff(yd.value(), yf.value().cast<double>()), 1e-5);
}
