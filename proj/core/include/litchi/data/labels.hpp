// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "litchi/data/annotation.hpp"

namespace litchi::data {

/// One line per box, `class_id cx cy w h`, six decimals, LF endings.
std::string format_labels(const std::vector<BoxAnnotation>& boxes);
/// Throws IoError "<source>:<line>: ..." on malformed or out-of-range lines.
std::vector<BoxAnnotation> parse_labels(const std::string& text, const std::string& source = "<labels>");

std::vector<BoxAnnotation> read_labels(const std::string& path);
void write_labels(const std::string& path, const std::vector<BoxAnnotation>& boxes);

}  // namespace litchi::data
