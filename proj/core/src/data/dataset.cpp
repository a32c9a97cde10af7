// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#include "litchi/data/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>

#include <nlohmann/json.hpp>

#include "litchi/data/labels.hpp"
#include "litchi/error.hpp"

namespace fs = std::filesystem;

namespace litchi::data {

namespace {

constexpr Subset kSubsets[] = {Subset::train, Subset::val, Subset::test};

SampleFiles files_for(const std::string& root, Subset s, const std::string& id) {
  const fs::path base(root);
  return {id, (base / "images" / subset_name(s) / (id + ".png")).string(),
          (base / "labels" / subset_name(s) / (id + ".txt")).string()};
}

}  // namespace

void write_subset_sample(const std::string& root, Subset subset, const Sample& sample) {
  const SampleFiles f = files_for(root, subset, sample.record.image_id);
  fs::create_directories(fs::path(f.image_path).parent_path());
  fs::create_directories(fs::path(f.label_path).parent_path());
  write_image(sample.image, f.image_path);
  write_labels(f.label_path, sample.record.annotations);
}

void write_split(const std::string& root, const DatasetSplit& split) {
  const std::string path = (fs::path(root) / "split.json").string();
  std::ofstream out(path);
  if (!out) throw IoError(path, "cannot write split");
  out << to_json(split).dump(2) << "\n";
}

DatasetSplit read_split(const std::string& root) {
  const std::string path = (fs::path(root) / "split.json").string();
  std::ifstream in(path);
  if (!in) throw IoError(path, "cannot open split file");
  try {
    nlohmann::json j;
    in >> j;
    return split_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path, std::string("malformed split: ") + e.what());
  } catch (const DomainError& e) {
    throw IoError(path, e.what());
  }
}

void write_dataset(const std::string& root, const std::vector<Sample>& samples, const DatasetSplit& split) {
  split.check_disjoint();
  std::map<std::string, Subset> bucket;
  for (Subset s : kSubsets)
    for (const auto& id : split.ids(s)) bucket[id] = s;
  for (Subset s : kSubsets) {
    fs::create_directories(fs::path(root) / "images" / subset_name(s));
    fs::create_directories(fs::path(root) / "labels" / subset_name(s));
  }
  size_t written = 0;
  for (const auto& sample : samples) {
    const auto it = bucket.find(sample.record.image_id);
    if (it == bucket.end()) throw DomainError("image_id", "'" + sample.record.image_id + "' is in no split bucket");
    write_subset_sample(root, it->second, sample);
    ++written;
  }
  if (written != bucket.size()) throw DomainError("split", "split lists ids without samples");
  write_split(root, split);
}

std::vector<SampleFiles> subset_files(const std::string& root, Subset subset) {
  const DatasetSplit split = read_split(root);
  std::vector<SampleFiles> out;
  for (const auto& id : split.ids(subset)) {
    SampleFiles f = files_for(root, subset, id);
    if (!fs::exists(f.image_path)) throw IoError(f.image_path, "listed in split.json but missing");
    if (!fs::exists(f.label_path)) throw IoError(f.label_path, "listed in split.json but missing");
    out.push_back(std::move(f));
  }
  return out;
}

Sample load_sample(const SampleFiles& files) {
  Sample s;
  s.image = read_image(files.image_path);
  s.record.image_id = files.image_id;
  s.record.width = s.image.width;
  s.record.height = s.image.height;
  s.record.annotations = read_labels(files.label_path);
  return s;
}

std::vector<Sample> load_subset(const std::string& root, Subset subset) {
  std::vector<Sample> out;
  for (const auto& f : subset_files(root, subset)) out.push_back(load_sample(f));
  return out;
}

std::vector<SampleFiles> flat_folder_files(const std::string& root) {
  const fs::path images = fs::path(root) / "images";
  if (!fs::is_directory(images)) throw IoError(images.string(), "image folder not found");
  std::vector<SampleFiles> out;
  for (const auto& entry : fs::directory_iterator(images)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext != ".png" && ext != ".jpg" && ext != ".jpeg") continue;
    const std::string id = entry.path().stem().string();
    SampleFiles f{id, entry.path().string(), (fs::path(root) / "labels" / (id + ".txt")).string()};
    if (!fs::exists(f.label_path)) throw IoError(f.label_path, "label file missing for image " + f.image_path);
    out.push_back(std::move(f));
  }
  std::sort(out.begin(), out.end(), [](const SampleFiles& a, const SampleFiles& b) { return a.image_id < b.image_id; });
  for (size_t i = 1; i < out.size(); ++i)
    if (out[i].image_id == out[i - 1].image_id) throw IoError(out[i].image_path, "duplicate image id");
  return out;
}

void write_flat_sample(const std::string& root, const Sample& sample) {
  fs::create_directories(fs::path(root) / "images");
  fs::create_directories(fs::path(root) / "labels");
  write_image(sample.image, (fs::path(root) / "images" / (sample.record.image_id + ".png")).string());
  write_labels((fs::path(root) / "labels" / (sample.record.image_id + ".txt")).string(), sample.record.annotations);
}

}  // namespace litchi::data
