// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

// 50-digit re-evaluation of the oblique shooting geometry.

#pragma once

#include <boost/multiprecision/cpp_bin_float.hpp>

namespace litchi::testing {

using BigFloat = boost::multiprecision::cpp_bin_float_50;

struct BigPlan {
  BigFloat tilt, vision_radius, flight_height;
};

inline BigPlan oblique_oracle(const BigFloat& R, const BigFloat& H, const BigFloat& L, const BigFloat& fov) {
  using boost::multiprecision::atan;
  using boost::multiprecision::cos;
  using boost::multiprecision::sin;
  using boost::multiprecision::sqrt;
  const BigFloat alpha = atan(R / H);
  const BigFloat k = sqrt(R * R + H * H) / (2 * sin(fov / 2));
  return {alpha, k * cos(fov / 2 - alpha), k * sin(fov / 2 + alpha) + L};
}

}  // namespace litchi::testing
