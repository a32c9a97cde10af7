// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#include "litchi/harness/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <map>

#include "litchi/error.hpp"
#include "litchi/metrics/profile.hpp"

namespace litchi::harness {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'L', 'T', 'C', 'H', 'C', 'K', 'P', 'T'};

template <typename V>
void put(std::ostream& out, const V& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(V));
}

class Reader {
 public:
  Reader(std::istream& in, std::string path) : in_(in), path_(std::move(path)) {}

  template <typename V>
  V get() {
    V v{};
    bytes(&v, sizeof(V));
    return v;
  }
  void bytes(void* dst, size_t n) {
    in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (static_cast<size_t>(in_.gcount()) != n) throw IoError(path_, "truncated checkpoint");
  }
  std::string str(size_t n) {
    if (n > (1ULL << 30)) throw IoError(path_, "implausible string length in checkpoint");
    std::string s(n, '\0');
    bytes(s.data(), n);
    return s;
  }

 private:
  std::istream& in_;
  std::string path_;
};

}  // namespace

template <typename T>
void save_checkpoint(const detect::Detector<T>& model, const std::string& path, const json& extra) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path, "cannot open for writing");
  out.write(kMagic, sizeof(kMagic));
  put(out, kCheckpointVersion);
  put(out, static_cast<uint8_t>(sizeof(T)));
  const std::string meta = json{{"model", detect::to_json(model.config())}, {"extra", extra}}.dump();
  put(out, static_cast<uint64_t>(meta.size()));
  out.write(meta.data(), static_cast<std::streamsize>(meta.size()));
  const auto params = model.named_parameters();
  const auto buffers = model.named_buffers();
  put(out, static_cast<uint64_t>(params.size() + buffers.size()));
  const auto write_entry = [&](uint8_t kind, const nn::NamedVar<T>& nv) {
    put(out, kind);
    put(out, static_cast<uint32_t>(nv.name.size()));
    out.write(nv.name.data(), static_cast<std::streamsize>(nv.name.size()));
    const auto& v = nv.var.value();
    put(out, static_cast<uint32_t>(v.rank()));
    for (int64_t d : v.shape()) put(out, d);
    out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.numel() * sizeof(T)));
  };
  for (const auto& p : params) write_entry(0, p);
  for (const auto& b : buffers) write_entry(1, b);
  if (!out) throw IoError(path, "write failed");
}

template <typename T>
LoadedCheckpoint<T> load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path, "cannot open checkpoint");
  Reader r(in, path);
  char magic[sizeof(kMagic)];
  r.bytes(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) throw IoError(path, "not a litchi checkpoint");
  const auto version = r.get<uint32_t>();
  if (version != kCheckpointVersion) throw IoError(path, "unsupported checkpoint version " + std::to_string(version));
  const auto scalar = r.get<uint8_t>();
  if (scalar != 4 && scalar != 8) throw IoError(path, "unsupported scalar size " + std::to_string(scalar));
  json meta;
  try {
    meta = json::parse(r.str(r.get<uint64_t>()));
  } catch (const json::parse_error& e) {
    throw IoError(path, std::string("bad metadata: ") + e.what());
  }
  LoadedCheckpoint<T> out;
  out.extra = meta.value("extra", json::object());
  try {
    out.model = detect::build_model<T>(detect::model_config_from_json(meta.at("model")), 0);
  } catch (const std::exception& e) {
    throw IoError(path, std::string("bad model config: ") + e.what());
  }
  std::map<std::string, nn::Var<T>> targets;
  for (auto& p : out.model->named_parameters()) targets.emplace("p:" + p.name, p.var);
  for (auto& b : out.model->named_buffers()) targets.emplace("b:" + b.name, b.var);
  const auto count = r.get<uint64_t>();
  if (count != targets.size()) {
    throw IoError(path, "expected " + std::to_string(targets.size()) + " tensors, found " + std::to_string(count));
  }
  std::vector<double> wide;
  std::vector<float> narrow;
  for (uint64_t e = 0; e < count; ++e) {
    const auto kind = r.get<uint8_t>();
    const std::string name = r.str(r.get<uint32_t>());
    const auto it = targets.find((kind == 0 ? "p:" : "b:") + name);
    if (it == targets.end()) throw IoError(path, "unexpected tensor " + name);
    nn::Shape shape(r.get<uint32_t>());
    for (auto& d : shape) d = r.get<int64_t>();
    auto& dst = it->second.mutable_value();
    if (shape != dst.shape()) throw IoError(path, "shape mismatch for " + name);
    const auto n = static_cast<size_t>(dst.numel());
    if (scalar == sizeof(T)) {
      r.bytes(dst.data(), n * sizeof(T));
    } else if (scalar == 8) {
      wide.resize(n);
      r.bytes(wide.data(), n * 8);
      for (size_t i = 0; i < n; ++i) dst.data()[i] = static_cast<T>(wide[i]);
    } else {
      narrow.resize(n);
      r.bytes(narrow.data(), n * 4);
      for (size_t i = 0; i < n; ++i) dst.data()[i] = static_cast<T>(narrow[i]);
    }
    targets.erase(it);
  }
  return out;
}

template <typename T>
json model_manifest(const detect::Detector<T>& model) {
  json blocks = json::array(), convs = json::array();
  model.for_each_module([&](const std::string& name, const nn::Module<T>& m) {
    blocks.push_back({{"name", name}, {"type", m.type_name()}});
    if (const auto* conv = dynamic_cast<const nn::Conv2d<T>*>(&m)) {
      const auto& s = conv->spec();
      convs.push_back({{"name", name},
                       {"in_channels", s.in_channels},
                       {"out_channels", s.out_channels},
                       {"kernel", s.kernel},
                       {"stride", s.stride},
                       {"padding", s.padding},
                       {"dilation", s.dilation},
                       {"groups", s.groups},
                       {"bias", s.bias}});
    }
  });
  return {{"model", detect::to_json(model.config())},
          {"toggles", model.config().toggle_tag()},
          {"parameters", metrics::count_params(model)},
          {"blocks", blocks},
          {"convs", convs}};
}

#define LITCHI_INSTANTIATE_CKPT(T)                                                              \
  template void save_checkpoint<T>(const detect::Detector<T>&, const std::string&, const json&); \
  template LoadedCheckpoint<T> load_checkpoint<T>(const std::string&);                          \
  template json model_manifest<T>(const detect::Detector<T>&);
LITCHI_INSTANTIATE_CKPT(float)
LITCHI_INSTANTIATE_CKPT(double)

}  // namespace litchi::harness
