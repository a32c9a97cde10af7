// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#include "litchi/metrics/report.hpp"

#include <array>
#include <fstream>
#include <sstream>

#include <opencv2/imgproc.hpp>

#include "litchi/data/annotation.hpp"
#include "litchi/error.hpp"

namespace litchi::metrics {

using nlohmann::json;

MetricsReport make_report(const EvalResult& r, const std::vector<std::string>& class_names, const EvalOptions& o) {
  MetricsReport rep;
  rep.precision = r.precision;
  rep.recall = r.recall;
  rep.f1 = r.f1;
  rep.map50 = r.map50;
  rep.map5095 = r.map5095;
  rep.class_names = class_names;
  rep.ap50 = r.ap50;
  rep.ap5095 = r.ap5095;
  for (size_t c = 0; c < r.occlusion.size(); ++c) {
    rep.occlusion.push_back({c < class_names.size() ? class_names[c] : std::to_string(c), r.occlusion[c]});
  }
  rep.match_iou = o.match_iou;
  rep.operating_conf = o.operating_conf;
  rep.warnings = r.warnings;
  return rep;
}

namespace {

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }
std::optional<double> optional_from(const json& j) {
  return j.is_null() ? std::nullopt : std::optional<double>(j.get<double>());
}

}  // namespace

json to_json(const MetricsReport& r) {
  json per_class = json::array();
  for (size_t c = 0; c < r.class_names.size(); ++c) {
    per_class.push_back({{"class", r.class_names[c]},
                         {"ap50", optional_json(c < r.ap50.size() ? r.ap50[c] : std::nullopt)},
                         {"ap50_95", optional_json(c < r.ap5095.size() ? r.ap5095[c] : std::nullopt)}});
  }
  json occ = json::array();
  for (const auto& e : r.occlusion) {
    occ.push_back({{"class", e.name},
                   {"actual", e.row.actual},
                   {"undetected", e.row.undetected},
                   {"miss_rate", optional_json(e.row.miss_rate)}});
  }
  return {{"protocol",
           {{"match_iou", r.match_iou},
            {"operating_conf", r.operating_conf},
            {"ap_interpolation_points", r.ap_samples},
            {"occlusion_matching", r.occlusion_class_agnostic ? "class_agnostic" : "class_aware"}}},
          {"precision", r.precision},
          {"recall", r.recall},
          {"f1", r.f1},
          {"map50", r.map50},
          {"map50_95", r.map5095},
          {"per_class_ap", per_class},
          {"occlusion_breakdown", occ},
          {"params_m", r.params_m},
          {"gflops", r.gflops},
          {"fps", r.fps},
          {"hardware", r.hardware},
          {"warnings", r.warnings}};
}

MetricsReport report_from_json(const json& j) {
  try {
    MetricsReport r;
    const auto& p = j.at("protocol");
    r.match_iou = p.at("match_iou").get<double>();
    r.operating_conf = p.at("operating_conf").get<double>();
    r.ap_samples = p.at("ap_interpolation_points").get<int>();
    r.occlusion_class_agnostic = p.at("occlusion_matching").get<std::string>() == "class_agnostic";
    r.precision = j.at("precision").get<double>();
    r.recall = j.at("recall").get<double>();
    r.f1 = j.at("f1").get<double>();
    r.map50 = j.at("map50").get<double>();
    r.map5095 = j.at("map50_95").get<double>();
    for (const auto& c : j.at("per_class_ap")) {
      r.class_names.push_back(c.at("class").get<std::string>());
      r.ap50.push_back(optional_from(c.at("ap50")));
      r.ap5095.push_back(optional_from(c.at("ap50_95")));
    }
    for (const auto& e : j.at("occlusion_breakdown")) {
      r.occlusion.push_back({e.at("class").get<std::string>(),
                             {e.at("actual").get<int64_t>(), e.at("undetected").get<int64_t>(),
                              optional_from(e.at("miss_rate"))}});
    }
    r.params_m = j.at("params_m").get<double>();
    r.gflops = j.at("gflops").get<double>();
    r.fps = j.at("fps").get<double>();
    r.hardware = j.at("hardware").get<std::string>();
    r.warnings = j.at("warnings").get<std::vector<std::string>>();
    return r;
  } catch (const json::exception& e) {
    throw DomainError("metrics report", e.what());
  }
}

void write_report(const MetricsReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError(path, "cannot open for writing");
  out << to_json(report).dump(2) << '\n';
}

MetricsReport read_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path, "cannot open for reading");
  try {
    return report_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw IoError(path, e.what());
  }
}

namespace {

std::string fmt(const std::optional<double>& v) {
  if (!v) return "";
  std::ostringstream s;
  s.precision(6);
  s << std::fixed << *v;
  return s.str();
}

}  // namespace

std::string per_class_ap_csv(const MetricsReport& r) {
  std::string out = "class,ap50,ap50_95\n";
  for (size_t c = 0; c < r.class_names.size(); ++c) {
    out += r.class_names[c] + "," + fmt(c < r.ap50.size() ? r.ap50[c] : std::nullopt) + "," +
           fmt(c < r.ap5095.size() ? r.ap5095[c] : std::nullopt) + "\n";
  }
  return out;
}

std::string occlusion_csv(const MetricsReport& r) {
  constexpr std::array order{data::Occlusion::by_fruit, data::Occlusion::none,
                             data::Occlusion::by_branch_leaf};
  std::string header, values;
  for (auto occ : order) {
    const auto c = static_cast<size_t>(occ);
    if (c >= r.occlusion.size()) throw ShapeError("occlusion table needs one row per occlusion class");
    const auto& e = r.occlusion[c];
    if (!header.empty()) header += ",", values += ",";
    header += e.name + "_actual," + e.name + "_undetected";
    values += std::to_string(e.row.actual) + "," + std::to_string(e.row.undetected);
  }
  return header + "\n" + values + "\n";
}

data::Image plot_pr_curves(const std::vector<PrCurve>& curves, int size) {
  const int margin = 40, plot = size - 2 * margin;
  cv::Mat canvas(size, size, CV_8UC3, cv::Scalar(255, 255, 255));
  const auto to_px = [&](double r, double p) {
    return cv::Point(margin + static_cast<int>(std::lround(r * plot)),
                     margin + static_cast<int>(std::lround((1.0 - p) * plot)));
  };
  cv::rectangle(canvas, to_px(0, 1), to_px(1, 0), cv::Scalar(0, 0, 0), 1);
  for (int t = 0; t <= 10; t += 5) {
    const std::string label = t == 10 ? "1.0" : "0." + std::to_string(t);
    cv::putText(canvas, label, to_px(t / 10.0, 0) + cv::Point(-10, 18), cv::FONT_HERSHEY_SIMPLEX, 0.4,
                cv::Scalar(0, 0, 0));
    cv::putText(canvas, label, to_px(0, t / 10.0) + cv::Point(-34, 4), cv::FONT_HERSHEY_SIMPLEX, 0.4,
                cv::Scalar(0, 0, 0));
  }
  cv::putText(canvas, "recall", cv::Point(size / 2 - 20, size - 6), cv::FONT_HERSHEY_SIMPLEX, 0.45,
              cv::Scalar(0, 0, 0));
  cv::putText(canvas, "precision", cv::Point(4, 16), cv::FONT_HERSHEY_SIMPLEX, 0.45, cv::Scalar(0, 0, 0));
  const std::array<cv::Scalar, 6> colours{cv::Scalar(200, 60, 30), cv::Scalar(40, 160, 40), cv::Scalar(30, 30, 210),
                                          cv::Scalar(160, 40, 160), cv::Scalar(20, 150, 200),
                                          cv::Scalar(90, 90, 90)};
  for (size_t i = 0; i < curves.size(); ++i) {
    const auto& colour = colours[i % colours.size()];
    std::vector<cv::Point> pts;
    for (const auto& p : curves[i].points) pts.push_back(to_px(p.recall, p.precision));
    if (pts.size() > 1) cv::polylines(canvas, pts, false, colour, 2, cv::LINE_AA);
    if (pts.size() == 1) cv::circle(canvas, pts.front(), 3, colour, cv::FILLED);
    cv::putText(canvas, "class " + std::to_string(curves[i].class_id),
                cv::Point(size - margin - 70, margin + 16 + 16 * static_cast<int>(i)), cv::FONT_HERSHEY_SIMPLEX, 0.45,
                colour);
  }
  data::Image out(size, size);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      const auto& p = canvas.at<cv::Vec3b>(y, x);
      uint8_t* q = out.px(x, y);
      q[0] = p[2], q[1] = p[1], q[2] = p[0];
    }
  return out;
}

}  // namespace litchi::metrics
