// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

namespace litchi::geometry {

/// Field measurements of one tree. Lengths in meters, angle in radians.
struct CanopyMeasurement {
  double canopy_radius = 0;  ///< R, > 0 (0 allowed for a vertical-axis check)
  double canopy_height = 0;  ///< H, > 0
  double trunk_length = 0;   ///< L, >= 0
  double fov = 0;            ///< full longitudinal field of view, in (0, pi)

  /// Throws DomainError naming the first field that violates its range.
  void validate() const;
};

struct FlightPlan {
  double tilt = 0;           ///< alpha, radians
  double vision_radius = 0;  ///< r, meters
  double flight_height = 0;  ///< h, meters
};

/// Oblique capture: alpha = atan(R/H), and the camera sits on the circle of
/// diameter sqrt(R^2 + H^2) / sin(fov/2) that sees the canopy under `fov`.
FlightPlan plan_oblique(const CanopyMeasurement& m);

inline constexpr double kMinClearance = 3.0;
inline constexpr double kMaxClearance = 5.0;

/// Vertical capture: canopy height plus a downwash clearance in [3, 5] m.
double plan_vertical(double canopy_height, double clearance);

double degrees_to_radians(double deg);
double radians_to_degrees(double rad);

}  // namespace litchi::geometry
