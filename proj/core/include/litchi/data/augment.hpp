// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "litchi/data/annotation.hpp"
#include "litchi/data/image.hpp"
#include "litchi/data/split.hpp"

namespace litchi::data {

enum class AugmentOp { gaussian_noise, salt_pepper, brighten, darken };

struct AugmentParams {
  double gaussian_sigma = 10.0;
  double salt_pepper_p = 0.02;
  double brighten_gain = 1.25;
  double darken_gain = 0.75;
};

/// Accepts the long names and the short CLI forms gauss, sp, bright, dark.
AugmentOp parse_augment_op(const std::string& name);
std::string augment_op_name(AugmentOp op);
std::vector<AugmentOp> parse_augment_ops(const std::string& comma_list);

/// Pixel transform only; dimensions and annotations are untouched.
Image apply_augment(const Image& image, AugmentOp op, uint64_t seed, const AugmentParams& params = {});

struct AugmentedSample {
  ImageRecord record;
  Image image;
};

/// Refuses records outside the train split. The result is tagged augmented
/// and named "<id>_<op>".
AugmentedSample augment(const ImageRecord& rec, const Image& image, AugmentOp op, uint64_t seed,
                        const DatasetSplit& split, const AugmentParams& params = {});

}  // namespace litchi::data
