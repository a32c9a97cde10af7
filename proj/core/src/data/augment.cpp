// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#include "litchi/data/augment.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "litchi/error.hpp"

namespace litchi::data {

AugmentOp parse_augment_op(const std::string& name) {
  if (name == "gaussian_noise" || name == "gauss") return AugmentOp::gaussian_noise;
  if (name == "salt_pepper" || name == "sp") return AugmentOp::salt_pepper;
  if (name == "brighten" || name == "bright") return AugmentOp::brighten;
  if (name == "darken" || name == "dark") return AugmentOp::darken;
  throw DomainError("op", "unknown augmentation '" + name + "'");
}

std::string augment_op_name(AugmentOp op) {
  switch (op) {
    case AugmentOp::gaussian_noise: return "gaussian_noise";
    case AugmentOp::salt_pepper: return "salt_pepper";
    case AugmentOp::brighten: return "brighten";
    case AugmentOp::darken: return "darken";
  }
  return "gaussian_noise";
}

std::vector<AugmentOp> parse_augment_ops(const std::string& comma_list) {
  std::vector<AugmentOp> ops;
  std::istringstream in(comma_list);
  for (std::string item; std::getline(in, item, ',');) {
    if (!item.empty()) ops.push_back(parse_augment_op(item));
  }
  if (ops.empty()) throw DomainError("ops", "no augmentation given");
  return ops;
}

namespace {

uint8_t saturate(double v) { return static_cast<uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

}  // namespace

Image apply_augment(const Image& image, AugmentOp op, uint64_t seed, const AugmentParams& params) {
  Image out = image;
  std::mt19937_64 rng(seed);
  switch (op) {
    case AugmentOp::gaussian_noise: {
      if (!(params.gaussian_sigma >= 0)) throw DomainError("gaussian_sigma", "must be >= 0");
      if (params.gaussian_sigma == 0) break;
      std::normal_distribution<double> noise(0.0, params.gaussian_sigma);
      for (auto& p : out.pixels) p = saturate(p + noise(rng));
      break;
    }
    case AugmentOp::salt_pepper: {
      if (!(params.salt_pepper_p >= 0 && params.salt_pepper_p <= 1)) {
        throw DomainError("salt_pepper_p", "must lie in [0, 1]");
      }
      if (params.salt_pepper_p == 0) break;
      std::uniform_real_distribution<double> u(0.0, 1.0);
      const size_t n = static_cast<size_t>(out.width) * out.height;
      for (size_t i = 0; i < n; ++i) {
        if (u(rng) >= params.salt_pepper_p) continue;
        const uint8_t v = u(rng) < 0.5 ? 0 : 255;
        std::fill_n(out.pixels.begin() + static_cast<std::ptrdiff_t>(i * Image::kChannels), Image::kChannels, v);
      }
      break;
    }
    case AugmentOp::brighten:
    case AugmentOp::darken: {
      const double gain = op == AugmentOp::brighten ? params.brighten_gain : params.darken_gain;
      if (!(gain >= 0) || !std::isfinite(gain)) throw DomainError("gain", "must be finite and >= 0");
      for (auto& p : out.pixels) p = saturate(p * gain);
      break;
    }
  }
  return out;
}

AugmentedSample augment(const ImageRecord& rec, const Image& image, AugmentOp op, uint64_t seed,
                        const DatasetSplit& split, const AugmentParams& params) {
  if (!split.contains(Subset::train, rec.image_id)) {
    throw DomainError("image_id", "'" + rec.image_id + "' is not in the train split; only train images are augmented");
  }
  AugmentedSample s{rec, apply_augment(image, op, seed, params)};
  s.record.image_id = rec.image_id + "_" + augment_op_name(op);
  s.record.provenance = Provenance::augmented;
  return s;
}

}  // namespace litchi::data
