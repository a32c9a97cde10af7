// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#include "litchi/geometry/flight.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "litchi/error.hpp"

namespace litchi::geometry {

namespace {

void require_finite(const char* field, double v) {
  if (!std::isfinite(v)) throw DomainError(field, "must be finite, got " + std::to_string(v));
}

}  // namespace

void CanopyMeasurement::validate() const {
  require_finite("canopy_radius", canopy_radius);
  require_finite("canopy_height", canopy_height);
  require_finite("trunk_length", trunk_length);
  require_finite("fov", fov);
  if (canopy_radius < 0) throw DomainError("canopy_radius", "must be >= 0");
  if (canopy_height <= 0) throw DomainError("canopy_height", "must be > 0");
  if (trunk_length < 0) throw DomainError("trunk_length", "must be >= 0");
  if (!(fov > 0 && fov < std::numbers::pi)) throw DomainError("fov", "must lie strictly inside (0, pi)");
}

FlightPlan plan_oblique(const CanopyMeasurement& m) {
  m.validate();
  const double alpha = std::atan(m.canopy_radius / m.canopy_height);
  const double half = m.fov / 2;
  const double diameter = std::hypot(m.canopy_radius, m.canopy_height) / (2 * std::sin(half));
  return {alpha, diameter * std::cos(half - alpha), diameter * std::sin(half + alpha) + m.trunk_length};
}

double plan_vertical(double canopy_height, double clearance) {
  require_finite("canopy_height", canopy_height);
  require_finite("clearance", clearance);
  if (canopy_height <= 0) throw DomainError("canopy_height", "must be > 0");
  if (clearance < kMinClearance || clearance > kMaxClearance) {
    throw DomainError("clearance", "outside the downwash safety band [3, 5] m, got " + std::to_string(clearance));
  }
  return canopy_height + clearance;
}

double degrees_to_radians(double deg) { return deg * std::numbers::pi / 180.0; }
double radians_to_degrees(double rad) { return rad * 180.0 / std::numbers::pi; }

}  // namespace litchi::geometry
