// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#include "litchi/data/labels.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "litchi/error.hpp"

namespace litchi::data {

std::string format_labels(const std::vector<BoxAnnotation>& boxes) {
  std::string out;
  char line[128];
  for (const auto& b : boxes) {
    b.validate();
    std::snprintf(line, sizeof line, "%d %.6f %.6f %.6f %.6f\n", b.class_id, b.cx, b.cy, b.w, b.h);
    out += line;
  }
  return out;
}

namespace {

template <typename N>
bool parse_token(const std::string& token, N& value) {
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  return ec == std::errc() && ptr == end;
}

}  // namespace

std::vector<BoxAnnotation> parse_labels(const std::string& text, const std::string& source) {
  std::vector<BoxAnnotation> boxes;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const std::string where = source + ":" + std::to_string(line_no);
    std::istringstream fields(line);
    std::vector<std::string> tokens;
    for (std::string t; fields >> t;) tokens.push_back(t);
    if (tokens.size() != 5) throw IoError(where, "expected 5 fields, got " + std::to_string(tokens.size()));
    BoxAnnotation b;
    if (!parse_token(tokens[0], b.class_id)) throw IoError(where, "class id is not an integer: '" + tokens[0] + "'");
    double* dst[4] = {&b.cx, &b.cy, &b.w, &b.h};
    for (int k = 0; k < 4; ++k) {
      if (!parse_token(tokens[k + 1], *dst[k])) throw IoError(where, "not a number: '" + tokens[k + 1] + "'");
    }
    try {
      b.validate();
    } catch (const DomainError& e) {
      throw IoError(where, e.field() == "class_id" ? "class out of range: " + tokens[0] : e.what());
    }
    boxes.push_back(b);
  }
  return boxes;
}

std::vector<BoxAnnotation> read_labels(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path, "cannot open label file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_labels(buf.str(), path);
}

void write_labels(const std::string& path, const std::vector<BoxAnnotation>& boxes) {
  const std::string text = format_labels(boxes);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path, "cannot write label file");
  out << text;
}

}  // namespace litchi::data
