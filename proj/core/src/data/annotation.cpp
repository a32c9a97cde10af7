// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#include "litchi/data/annotation.hpp"

#include <cmath>

#include "litchi/error.hpp"

namespace litchi::data {

void BoxAnnotation::validate() const {
  if (class_id < 0 || class_id >= kNumOcclusionClasses) {
    throw DomainError("class_id", "class out of range: " + std::to_string(class_id));
  }
  const auto unit = [](const char* field, double v) {
    if (!std::isfinite(v) || v < 0 || v > 1) throw DomainError(field, "must lie in [0, 1], got " + std::to_string(v));
  };
  unit("cx", cx);
  unit("cy", cy);
  unit("w", w);
  unit("h", h);
  if (w <= 0) throw DomainError("w", "must be > 0");
  if (h <= 0) throw DomainError("h", "must be > 0");
}

std::string_view provenance_name(Provenance p) {
  switch (p) {
    case Provenance::original: return "original";
    case Provenance::tiled: return "tiled";
    case Provenance::augmented: return "augmented";
    case Provenance::synthetic: return "synthetic";
  }
  return "original";
}

Provenance parse_provenance(std::string_view name) {
  for (auto p : {Provenance::original, Provenance::tiled, Provenance::augmented, Provenance::synthetic}) {
    if (provenance_name(p) == name) return p;
  }
  throw DomainError("provenance", "unknown provenance '" + std::string(name) + "'");
}

}  // namespace litchi::data
