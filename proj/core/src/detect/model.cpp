// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#include "litchi/detect/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "litchi/error.hpp"
#include "litchi/nn/yolo.hpp"

namespace litchi::detect {

using nn::Var;

void ModelConfig::validate() const {
  if (!(width_multiple > 0) || !std::isfinite(width_multiple)) throw DomainError("width_multiple", "must be > 0");
  if (!(depth_multiple > 0) || !std::isfinite(depth_multiple)) throw DomainError("depth_multiple", "must be > 0");
  if (num_classes < 1) throw DomainError("num_classes", "must be >= 1");
  if (strides != std::vector<int>{8, 16, 32}) {
    throw DomainError("strides", "the three-level topology produces strides [8, 16, 32] only");
  }
  if (input_size < 32 || input_size % strides.back() != 0) {
    throw DomainError("input_size", "must be a positive multiple of " + std::to_string(strides.back()) + ", got " +
                                        std::to_string(input_size));
  }
  if (max_channels < 8) throw DomainError("max_channels", "must be >= 8");
  if (fusion_width < 8) throw DomainError("fusion_width", "must be >= 8");
  if (!(msr_expansion > 0 && msr_expansion <= 1)) throw DomainError("msr_expansion", "must lie in (0, 1]");
}

int64_t ModelConfig::width(int64_t base) const {
  const double scaled = static_cast<double>(std::min<int64_t>(base, max_channels)) * width_multiple;
  return static_cast<int64_t>(std::ceil(scaled / 8.0)) * 8;
}

int ModelConfig::depth(int base) const {
  return base > 1 ? std::max(1, static_cast<int>(std::lround(base * depth_multiple))) : base;
}

std::string ModelConfig::toggle_tag() const {
  std::string tag;
  const auto add = [&](bool on, const char* name) {
    if (!on) return;
    if (!tag.empty()) tag += "+";
    tag += name;
  };
  add(use_c3msr, "A");
  add(use_f3, "B");
  add(use_litchi_head, "C");
  return tag.empty() ? "baseline" : tag;
}

nlohmann::json to_json(const ModelConfig& cfg) {
  return {{"width_multiple", cfg.width_multiple},
          {"depth_multiple", cfg.depth_multiple},
          {"num_classes", cfg.num_classes},
          {"strides", cfg.strides},
          {"input_size", cfg.input_size},
          {"use_c3msr", cfg.use_c3msr},
          {"use_f3", cfg.use_f3},
          {"use_litchi_head", cfg.use_litchi_head},
          {"max_channels", cfg.max_channels},
          {"fusion_width", cfg.fusion_width},
          {"msr_expansion", cfg.msr_expansion},
          {"msr_dilation", cfg.msr_dilation == nn::MsrDilation::rates_123 ? "rates_123" : "rates_135"},
          {"seam_residual", cfg.seam_residual}};
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw DomainError("model_config", "expected a JSON object");
  ModelConfig cfg;
  const std::set<std::string> known{"width_multiple", "depth_multiple", "num_classes",   "strides",
                                    "input_size",     "use_c3msr",      "use_f3",        "use_litchi_head",
                                    "max_channels",   "fusion_width",   "msr_expansion", "msr_dilation",
                                    "seam_residual"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw DomainError(key, "unknown model config key");
  }
  const auto get = [&](const char* key, auto& field) {
    if (!j.contains(key)) return;
    try {
      j.at(key).get_to(field);
    } catch (const nlohmann::json::exception& e) {
      throw DomainError(key, std::string("wrong type: ") + e.what());
    }
  };
  get("width_multiple", cfg.width_multiple);
  get("depth_multiple", cfg.depth_multiple);
  get("num_classes", cfg.num_classes);
  get("strides", cfg.strides);
  get("input_size", cfg.input_size);
  get("use_c3msr", cfg.use_c3msr);
  get("use_f3", cfg.use_f3);
  get("use_litchi_head", cfg.use_litchi_head);
  get("max_channels", cfg.max_channels);
  get("fusion_width", cfg.fusion_width);
  get("msr_expansion", cfg.msr_expansion);
  get("seam_residual", cfg.seam_residual);
  std::string dilation = "rates_123";
  get("msr_dilation", dilation);
  if (dilation == "rates_123") {
    cfg.msr_dilation = nn::MsrDilation::rates_123;
  } else if (dilation == "rates_135") {
    cfg.msr_dilation = nn::MsrDilation::rates_135;
  } else {
    throw DomainError("msr_dilation", "expected 'rates_123' or 'rates_135', got '" + dilation + "'");
  }
  cfg.validate();
  return cfg;
}

ModelConfig read_model_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path, "cannot open model config");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path, std::string("malformed JSON: ") + e.what());
  }
  return model_config_from_json(j);
}

void write_model_config(const ModelConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError(path, "cannot write model config");
  out << to_json(cfg).dump(2) << "\n";
}

namespace {

template <typename T>
std::shared_ptr<nn::Layer<T>> csp_block(const ModelConfig& cfg, int64_t c_in, int64_t c_out, int n, bool c3k,
                                        double expansion, nn::InitRng& rng) {
  if (cfg.use_c3msr) {
    return std::make_shared<nn::C3Msr<T>>(c_in, c_out, n, rng, cfg.msr_expansion, cfg.msr_dilation);
  }
  return std::make_shared<nn::C3k2<T>>(c_in, c_out, n, c3k, rng, expansion);
}

template <typename T>
std::shared_ptr<nn::ConvBnAct<T>> down_conv(int64_t c_in, int64_t c_out, nn::InitRng& rng) {
  return std::make_shared<nn::ConvBnAct<T>>(c_in, c_out, 3, rng, 2);
}

void check_levels(size_t n) {
  if (n != 3) throw ShapeError("expected 3 feature levels, got " + std::to_string(n));
}

}  // namespace

template <typename T>
Backbone<T>::Backbone(const ModelConfig& cfg, nn::InitRng& rng) : nn::Module<T>("Backbone") {
  const int64_t c64 = cfg.width(64), c128 = cfg.width(128), c256 = cfg.width(256), c512 = cfg.width(512),
                c1024 = cfg.width(1024);
  const int n = cfg.depth(2);
  const auto stage = [&](std::shared_ptr<nn::Layer<T>> layer) {
    stages_.push_back(this->add_module(std::to_string(stages_.size()), std::move(layer)));
  };
  stage(down_conv<T>(3, c64, rng));
  stage(down_conv<T>(c64, c128, rng));
  stage(csp_block<T>(cfg, c128, c256, n, false, 0.25, rng));
  stage(down_conv<T>(c256, c256, rng));
  stage(csp_block<T>(cfg, c256, c512, n, false, 0.25, rng));
  stage(down_conv<T>(c512, c512, rng));
  stage(csp_block<T>(cfg, c512, c512, n, true, 0.5, rng));
  stage(down_conv<T>(c512, c1024, rng));
  stage(csp_block<T>(cfg, c1024, c1024, n, true, 0.5, rng));
  stage(std::make_shared<nn::Sppf<T>>(c1024, c1024, rng));
  stage(std::make_shared<nn::C2Psa<T>>(c1024, n, rng));
  out_channels_ = {c512, c512, c1024};
}

template <typename T>
Features<T> Backbone<T>::forward(const Var<T>& x) {
  Features<T> out;
  Var<T> y = x;
  for (size_t i = 0; i < stages_.size(); ++i) {
    y = stages_[i]->forward(y);
    if (i == 4 || i == 6 || i == 10) out.push_back(y);
  }
  return out;
}

template <typename T>
PanNeck<T>::PanNeck(const ModelConfig& cfg, const std::vector<int64_t>& in, nn::InitRng& rng) : Neck<T>("PanNeck") {
  check_levels(in.size());
  const int64_t c256 = cfg.width(256), c512 = cfg.width(512), c1024 = cfg.width(1024);
  const int n = cfg.depth(2);
  td4_ = this->add_module("td4", std::make_shared<nn::C3k2<T>>(in[2] + in[1], c512, n, false, rng));
  td3_ = this->add_module("td3", std::make_shared<nn::C3k2<T>>(c512 + in[0], c256, n, false, rng));
  down3_ = this->add_module("down3", down_conv<T>(c256, c256, rng));
  bu4_ = this->add_module("bu4", std::make_shared<nn::C3k2<T>>(c256 + c512, c512, n, false, rng));
  down4_ = this->add_module("down4", down_conv<T>(c512, c512, rng));
  bu5_ = this->add_module("bu5", std::make_shared<nn::C3k2<T>>(c512 + in[2], c1024, n, true, rng));
  this->out_channels_ = {c256, c512, c1024};
}

template <typename T>
Features<T> PanNeck<T>::forward(const Features<T>& f) {
  check_levels(f.size());
  const Var<T> t4 = td4_->forward(nn::concat<T>({nn::upsample_nearest(f[2], 2), f[1]}, 1));
  const Var<T> o3 = td3_->forward(nn::concat<T>({nn::upsample_nearest(t4, 2), f[0]}, 1));
  const Var<T> o4 = bu4_->forward(nn::concat<T>({down3_->forward(o3), t4}, 1));
  const Var<T> o5 = bu5_->forward(nn::concat<T>({down4_->forward(o4), f[2]}, 1));
  return {o3, o4, o5};
}

template <typename T>
WeightedSum<T>::WeightedSum(int inputs) : nn::Module<T>("WeightedSum") {
  if (inputs < 2) throw ShapeError("weighted sum needs at least two inputs");
  weight_ = this->add_parameter("weight", nn::Tensor<T>({inputs}, T(1)));
}

template <typename T>
Var<T> WeightedSum<T>::forward(const std::vector<Var<T>>& xs) {
  const int64_t n = weight_.dim(0);
  if (static_cast<int64_t>(xs.size()) != n) {
    throw ShapeError("weighted sum expects " + std::to_string(n) + " inputs, got " + std::to_string(xs.size()));
  }
  const Var<T> w = nn::relu(weight_);
  const Var<T> norm = nn::div(w, nn::add_scalar(nn::sum(w), static_cast<T>(kEps)));
  Var<T> out;
  for (int64_t i = 0; i < n; ++i) {
    const Var<T> term = nn::mul(xs[i], nn::slice(norm, 0, i, 1));
    out = out.defined() ? nn::add(out, term) : term;
  }
  return out;
}

template <typename T>
F3Neck<T>::F3Neck(const ModelConfig& cfg, const std::vector<int64_t>& in, nn::InitRng& rng) : Neck<T>("F3Neck") {
  check_levels(in.size());
  const int64_t w = cfg.width(cfg.fusion_width);
  for (size_t i = 0; i < in.size(); ++i) {
    lateral_.push_back(
        this->add_module("lateral" + std::to_string(i), std::make_shared<nn::ConvBnAct<T>>(in[i], w, 1, rng)));
  }
  w_td4_ = this->add_module("w_td4", std::make_shared<WeightedSum<T>>(2));
  f_td4_ = this->add_module("f_td4", std::make_shared<nn::F3Block<T>>(w, w, rng));
  w_out3_ = this->add_module("w_out3", std::make_shared<WeightedSum<T>>(2));
  f_out3_ = this->add_module("f_out3", std::make_shared<nn::F3Block<T>>(w, w, rng));
  down3_ = this->add_module("down3", down_conv<T>(w, w, rng));
  w_out4_ = this->add_module("w_out4", std::make_shared<WeightedSum<T>>(3));
  f_out4_ = this->add_module("f_out4", std::make_shared<nn::F3Block<T>>(w, w, rng));
  down4_ = this->add_module("down4", down_conv<T>(w, w, rng));
  w_out5_ = this->add_module("w_out5", std::make_shared<WeightedSum<T>>(2));
  f_out5_ = this->add_module("f_out5", std::make_shared<nn::F3Block<T>>(w, w, rng));
  this->out_channels_ = {w, w, w};
}

template <typename T>
Features<T> F3Neck<T>::forward(const Features<T>& f) {
  check_levels(f.size());
  const Var<T> l3 = lateral_[0]->forward(f[0]);
  const Var<T> l4 = lateral_[1]->forward(f[1]);
  const Var<T> l5 = lateral_[2]->forward(f[2]);
  const Var<T> t4 = f_td4_->forward(w_td4_->forward({l4, nn::upsample_nearest(l5, 2)}));
  const Var<T> o3 = f_out3_->forward(w_out3_->forward({l3, nn::upsample_nearest(t4, 2)}));
  const Var<T> o4 = f_out4_->forward(w_out4_->forward({l4, t4, down3_->forward(o3)}));
  const Var<T> o5 = f_out5_->forward(w_out5_->forward({l5, down4_->forward(o4)}));
  return {o3, o4, o5};
}

template <typename T>
Detector<T>::Detector(const ModelConfig& cfg, nn::InitRng& rng) : nn::Module<T>("Detector"), cfg_(cfg) {
  cfg_.validate();
  backbone_ = this->add_module("backbone", std::make_shared<Backbone<T>>(cfg_, rng));
  if (cfg_.use_f3) {
    neck_ = this->add_module("neck", std::make_shared<F3Neck<T>>(cfg_, backbone_->out_channels(), rng));
  } else {
    neck_ = this->add_module("neck", std::make_shared<PanNeck<T>>(cfg_, backbone_->out_channels(), rng));
  }
  if (cfg_.use_litchi_head) {
    head_ = this->add_module("head", std::make_shared<nn::LitchiHead<T>>(neck_->out_channels(), cfg_.num_classes, rng,
                                                                       0, cfg_.seam_residual));
  } else {
    head_ = this->add_module("head",
                             std::make_shared<nn::YoloDetectHead<T>>(neck_->out_channels(), cfg_.num_classes, rng));
  }
  init_head_priors();
}

template <typename T>
std::vector<nn::HeadOutput<T>> Detector<T>::forward(const Var<T>& images) {
  const int stride = cfg_.strides.back();
  if (images.value().rank() != 4 || images.dim(1) != 3 || images.dim(2) % stride != 0 ||
      images.dim(3) % stride != 0) {
    throw ShapeError("detector expects (N, 3, H, W) with H, W multiples of " + std::to_string(stride) + ", got " +
                     nn::shape_str(images.shape()));
  }
  return head_->forward(neck_->forward(backbone_->forward(images)));
}

template <typename T>
void Detector<T>::init_head_priors() {
  auto convs = head_->output_convs();
  for (size_t i = 0; i < convs.size(); ++i) {
    const double cells = std::pow(static_cast<double>(cfg_.input_size) / cfg_.strides[i], 2);
    convs[i].first->bias().mutable_value().fill(T(1));
    convs[i].second->bias().mutable_value().fill(static_cast<T>(std::log(5.0 / cfg_.num_classes / cells)));
  }
}

template <typename T>
void Detector<T>::switch_to_deploy() {
  this->for_each_module([](const std::string&, nn::Module<T>& m) {
    if (auto* drb = dynamic_cast<nn::DilatedReparamConv<T>*>(&m)) drb->switch_to_deploy();
  });
}

template <typename T>
std::shared_ptr<Detector<T>> build_model(const ModelConfig& cfg, uint64_t seed) {
  nn::InitRng rng(seed);
  return std::make_shared<Detector<T>>(cfg, rng);
}

#define LITCHI_INSTANTIATE_MODEL(T)                                                      \
  template class Backbone<T>;                                                            \
  template class Neck<T>;                                                                \
  template class PanNeck<T>;                                                             \
  template class WeightedSum<T>;                                                         \
  template class F3Neck<T>;                                                              \
  template class Detector<T>;                                                            \
  template std::shared_ptr<Detector<T>> build_model<T>(const ModelConfig& cfg, uint64_t seed);
LITCHI_INSTANTIATE_MODEL(float)
LITCHI_INSTANTIATE_MODEL(double)

}  // namespace litchi::detect
