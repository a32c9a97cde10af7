// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "litchi/data/annotation.hpp"
#include "litchi/data/image.hpp"
#include "litchi/data/split.hpp"

namespace litchi::data {

struct Sample {
  ImageRecord record;
  Image image;
};

/// Locations of one item in the on-disk layout
/// images/<subset>/<id>.png, labels/<subset>/<id>.txt.
struct SampleFiles {
  std::string image_id;
  std::string image_path;
  std::string label_path;
};

/// Writes images, labels and split.json under root. Every sample must appear
/// in exactly one split bucket.
void write_dataset(const std::string& root, const std::vector<Sample>& samples, const DatasetSplit& split);

/// Writes one sample into its subset folders without touching split.json.
void write_subset_sample(const std::string& root, Subset subset, const Sample& sample);

DatasetSplit read_split(const std::string& root);
void write_split(const std::string& root, const DatasetSplit& split);

/// Paths for a subset in split order; throws IoError naming each missing file.
std::vector<SampleFiles> subset_files(const std::string& root, Subset subset);
Sample load_sample(const SampleFiles& files);
std::vector<Sample> load_subset(const std::string& root, Subset subset);

/// Unsplit folder layout images/<id>.{png,jpg,jpeg}, labels/<id>.txt, sorted
/// by id. A missing label file is an IoError naming the expected path.
std::vector<SampleFiles> flat_folder_files(const std::string& root);
void write_flat_sample(const std::string& root, const Sample& sample);

}  // namespace litchi::data
