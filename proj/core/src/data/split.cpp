// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#include "litchi/data/split.hpp"

#include <algorithm>
#include <random>
#include <set>

#include <nlohmann/json.hpp>

#include "litchi/error.hpp"

namespace litchi::data {

std::string subset_name(Subset s) {
  switch (s) {
    case Subset::train: return "train";
    case Subset::val: return "val";
    case Subset::test: return "test";
  }
  return "train";
}

Subset parse_subset(const std::string& name) {
  if (name == "train") return Subset::train;
  if (name == "val") return Subset::val;
  if (name == "test") return Subset::test;
  throw DomainError("split", "expected train, val or test, got '" + name + "'");
}

const std::vector<std::string>& DatasetSplit::ids(Subset s) const {
  switch (s) {
    case Subset::val: return val;
    case Subset::test: return test;
    default: return train;
  }
}

bool DatasetSplit::contains(Subset s, const std::string& id) const {
  const auto& v = ids(s);
  return std::find(v.begin(), v.end(), id) != v.end();
}

void DatasetSplit::check_disjoint() const {
  std::set<std::string> seen;
  for (const auto* list : {&train, &val, &test}) {
    for (const auto& id : *list) {
      if (!seen.insert(id).second) throw DomainError("split", "id '" + id + "' appears more than once");
    }
  }
}

SplitSizes split_sizes(size_t n) {
  const size_t val = n / 5, test = n / 10;
  return {n - val - test, val, test};
}

namespace {

std::vector<std::string> sorted_unique(const std::vector<std::string>& ids) {
  if (ids.empty()) throw DomainError("ids", "cannot split an empty id list");
  std::vector<std::string> sorted = ids;
  std::sort(sorted.begin(), sorted.end());
  const auto dup = std::adjacent_find(sorted.begin(), sorted.end());
  if (dup != sorted.end()) throw DomainError("ids", "duplicate id '" + *dup + "'");
  return sorted;
}

/// Unbiased draw in [0, bound) from raw 64-bit engine output, so the result
/// does not depend on the standard library's distribution algorithms.
uint64_t bounded(std::mt19937_64& rng, uint64_t bound) {
  const uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  uint64_t r;
  do {
    r = rng();
  } while (r >= limit);
  return r % bound;
}

}  // namespace

DatasetSplit split_dataset(const std::vector<std::string>& ids, uint64_t seed) {
  std::vector<std::string> order = sorted_unique(ids);
  std::mt19937_64 rng(seed);
  for (size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[bounded(rng, i + 1)]);
  const SplitSizes sizes = split_sizes(order.size());
  DatasetSplit split;
  split.seed = seed;
  split.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(sizes.train));
  split.val.assign(order.begin() + static_cast<std::ptrdiff_t>(sizes.train),
                   order.begin() + static_cast<std::ptrdiff_t>(sizes.train + sizes.val));
  split.test.assign(order.begin() + static_cast<std::ptrdiff_t>(sizes.train + sizes.val), order.end());
  return split;
}

DatasetSplit train_only_split(const std::vector<std::string>& ids, uint64_t seed) {
  DatasetSplit split;
  split.seed = seed;
  split.train = sorted_unique(ids);
  return split;
}

nlohmann::json to_json(const DatasetSplit& split) {
  return {{"seed", split.seed}, {"train", split.train}, {"val", split.val}, {"test", split.test}};
}

DatasetSplit split_from_json(const nlohmann::json& j) {
  DatasetSplit split;
  try {
    split.seed = j.at("seed").get<uint64_t>();
    split.train = j.at("train").get<std::vector<std::string>>();
    split.val = j.at("val").get<std::vector<std::string>>();
    split.test = j.at("test").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw DomainError("split.json", e.what());
  }
  split.check_disjoint();
  return split;
}

}  // namespace litchi::data
