// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "geometry_oracle.hpp"
#include "litchi/error.hpp"
#include "litchi/geometry/flight.hpp"

namespace geo = litchi::geometry;
using litchi::testing::BigFloat;
using std::numbers::pi;

namespace {

/// Frozen from an independent 50-digit evaluation for R=2, H=8, L=1.5,
/// fov=pi/3 (closed forms: r = 1 + 4 sqrt(3), h = 4 + sqrt(3) + 1.5).
constexpr double kGoldenTilt = 0.2449786631268641541720825;
constexpr double kGoldenRadius = 7.928203230275509174109785;
constexpr double kGoldenHeight = 7.232050807568877293527446;

double rel_err(double got, const BigFloat& want) {
  const BigFloat diff = abs(BigFloat(got) - want);
  const BigFloat scale = std::max(BigFloat(1e-300), BigFloat(abs(want)));
  return static_cast<double>(diff / scale);
}

geo::CanopyMeasurement random_measurement(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> len(0.1, 20.0), trunk(0.0, 5.0), fov(0.05, pi - 0.05);
  return {len(rng), len(rng), trunk(rng), fov(rng)};
}

}  // namespace

TEST(PlanOblique, EqualRadiusAndHeightGiveFortyFiveDegrees) {
  const auto plan = geo::plan_oblique({3, 3, 0, pi / 2});
  EXPECT_DOUBLE_EQ(plan.tilt, pi / 4);
  EXPECT_DOUBLE_EQ(geo::radians_to_degrees(plan.tilt), 45.0);
}

TEST(PlanOblique, ZeroRadiusCancellationCase) {
  const auto plan = geo::plan_oblique({0, 10, 1, pi / 2});
  EXPECT_EQ(plan.tilt, 0.0);
  EXPECT_NEAR(plan.vision_radius, 5.0, 1e-14);
  EXPECT_NEAR(plan.flight_height, 6.0, 1e-14);
}

TEST(PlanOblique, GoldenTriple) {
  const auto plan = geo::plan_oblique({2, 8, 1.5, pi / 3});
  EXPECT_NEAR(plan.tilt, kGoldenTilt, 1e-15);
  EXPECT_NEAR(plan.vision_radius, kGoldenRadius, 1e-14);
  EXPECT_NEAR(plan.flight_height, kGoldenHeight, 1e-14);
}

TEST(PlanOblique, AgreesWithArbitraryPrecision) {
  std::mt19937_64 rng(11);
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto m = random_measurement(rng);
    const auto plan = geo::plan_oblique(m);
    const auto want = litchi::testing::oblique_oracle(m.canopy_radius, m.canopy_height, m.trunk_length, m.fov);
    worst = std::max({worst, rel_err(plan.tilt, want.tilt), rel_err(plan.vision_radius, want.vision_radius),
                      rel_err(plan.flight_height, want.flight_height)});
  }
  EXPECT_LE(worst, 1e-12);
}

TEST(PlanOblique, TiltMonotoneInRadiusAndHeight) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> bump(1e-3, 5.0);
  for (int i = 0; i < 500; ++i) {
    auto m = random_measurement(rng);
    const double base = geo::plan_oblique(m).tilt;
    auto wider = m;
    wider.canopy_radius += bump(rng);
    EXPECT_GT(geo::plan_oblique(wider).tilt, base);
    auto taller = m;
    taller.canopy_height += bump(rng);
    EXPECT_LT(geo::plan_oblique(taller).tilt, base);
  }
}

TEST(PlanOblique, ScaleCovariance) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> scale(0.01, 100.0);
  for (int i = 0; i < 500; ++i) {
    const auto m = random_measurement(rng);
    const double s = scale(rng);
    const auto a = geo::plan_oblique(m);
    const auto b = geo::plan_oblique({s * m.canopy_radius, s * m.canopy_height, s * m.trunk_length, m.fov});
    EXPECT_NEAR(b.tilt, a.tilt, 4e-16 * std::max(1.0, a.tilt));
    EXPECT_NEAR(b.vision_radius, s * a.vision_radius, 1e-14 * s * a.vision_radius);
    EXPECT_NEAR(b.flight_height, s * a.flight_height, 1e-14 * s * a.flight_height);
  }
}

TEST(PlanOblique, PlanInvariantsHold) {
  std::mt19937_64 rng(14);
  for (int i = 0; i < 500; ++i) {
    const auto m = random_measurement(rng);
    const auto plan = geo::plan_oblique(m);
    EXPECT_GT(plan.tilt, 0.0);
    EXPECT_LT(plan.tilt, pi / 2);
    EXPECT_GE(plan.flight_height, m.trunk_length);
  }
}

TEST(PlanOblique, RejectsInvalidFieldsByName) {
  const auto field_of = [](const geo::CanopyMeasurement& m) {
    try {
      geo::plan_oblique(m);
    } catch (const litchi::DomainError& e) {
      return e.field();
    }
    return std::string("<none>");
  };
  EXPECT_EQ(field_of({1, 0, 0, 1}), "canopy_height");
  EXPECT_EQ(field_of({1, -2, 0, 1}), "canopy_height");
  EXPECT_EQ(field_of({1, 1, 0, 0}), "fov");
  EXPECT_EQ(field_of({1, 1, 0, pi}), "fov");
  EXPECT_EQ(field_of({NAN, 1, 0, 1}), "canopy_radius");
  EXPECT_EQ(field_of({1, INFINITY, 0, 1}), "canopy_height");
  EXPECT_EQ(field_of({1, 1, -1, 1}), "trunk_length");
}

TEST(PlanVertical, AddsClearanceInsideSafetyBand) {
  EXPECT_EQ(geo::plan_vertical(6.0, 3.0), 9.0);
  EXPECT_EQ(geo::plan_vertical(6.0, 5.0), 11.0);
  EXPECT_THROW(geo::plan_vertical(6.0, 2.0), litchi::DomainError);
  EXPECT_THROW(geo::plan_vertical(6.0, 5.01), litchi::DomainError);
  EXPECT_THROW(geo::plan_vertical(0.0, 4.0), litchi::DomainError);
}
