// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace litchi::data {

enum class Subset { train, val, test };

std::string subset_name(Subset s);
Subset parse_subset(const std::string& name);

struct DatasetSplit {
  std::vector<std::string> train, val, test;
  uint64_t seed = 0;

  const std::vector<std::string>& ids(Subset s) const;
  bool contains(Subset s, const std::string& id) const;
  /// Throws DomainError unless the three lists are pairwise disjoint.
  void check_disjoint() const;
};

/// Bucket sizes for n items: val = floor(n / 5), test = floor(n / 10),
/// the remainder to train.
struct SplitSizes {
  size_t train, val, test;
};
SplitSizes split_sizes(size_t n);

/// Sorts the ids, shuffles them with a seeded Fisher-Yates pass and cuts
/// 7:2:1. Duplicate ids are rejected.
DatasetSplit split_dataset(const std::vector<std::string>& ids, uint64_t seed);

/// Everything in train (desk-scale overfitting runs).
DatasetSplit train_only_split(const std::vector<std::string>& ids, uint64_t seed);

nlohmann::json to_json(const DatasetSplit& split);
DatasetSplit split_from_json(const nlohmann::json& j);

}  // namespace litchi::data
