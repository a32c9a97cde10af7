// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "litchi/detect/model.hpp"

namespace litchi::harness {

/// Binary layout (host byte order):
///   "LTCHCKPT", u32 version, u8 scalar size (4 or 8),
///   u64 metadata length, metadata JSON {"model": ..., "extra": ...},
///   u64 entry count, then per entry: u8 kind (0 parameter, 1 buffer),
///   u32 name length, name, u32 rank, i64 dims[rank], raw values.
inline constexpr uint32_t kCheckpointVersion = 1;

template <typename T>
void save_checkpoint(const detect::Detector<T>& model, const std::string& path,
                     const nlohmann::json& extra = nlohmann::json::object());

template <typename T>
struct LoadedCheckpoint {
  std::shared_ptr<detect::Detector<T>> model;
  nlohmann::json extra;
};

/// Rebuilds the model from the embedded config and restores every tensor.
/// Throws IoError naming the path on a missing file, bad magic, truncation,
/// or a name/shape mismatch.
template <typename T>
LoadedCheckpoint<T> load_checkpoint(const std::string& path);

/// Module tree and the static spec of every convolution.
template <typename T>
nlohmann::json model_manifest(const detect::Detector<T>& model);

}  // namespace litchi::harness
