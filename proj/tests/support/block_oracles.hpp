// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

// Closed-form parameter and multiply-accumulate counts for every block,
// written independently of the module code from the block definitions.

#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

namespace litchi::testing {

inline int64_t conv_params(int64_t ci, int64_t co, int64_t k, int64_t groups = 1, bool bias = false) {
  return co * (ci / groups) * k * k + (bias ? co : 0);
}
inline int64_t bn_params(int64_t c) { return 2 * c; }
/// Conv (no bias) + BN.
inline int64_t cba_params(int64_t ci, int64_t co, int64_t k, int64_t groups = 1) {
  return conv_params(ci, co, k, groups) + bn_params(co);
}
inline int64_t conv_macs(int64_t ci, int64_t co, int64_t k, int64_t oh, int64_t ow, int64_t groups = 1) {
  return co * oh * ow * (ci / groups) * k * k;
}

inline int64_t msr_params(int64_t c) {
  const int64_t h = c / 2;
  return cba_params(h, h, 3) + cba_params(h, h, 3, h) + cba_params(h, h, 3, h) + cba_params(h, h, 3, h) +
         cba_params(h, h, 5, h) + cba_params(h, h, 3, h) + cba_params(h, h, 3, h) + cba_params(3 * h, h, 1);
}
/// Multi-branch (training graph) count at stride 1.
inline int64_t msr_macs(int64_t c, int64_t hgt, int64_t wid) {
  const int64_t h = c / 2, hw = hgt * wid;
  return hw * (9 * h * h + h * (9 + 9 + 9 + 25 + 9 + 9) + 3 * h * h);
}
inline int64_t c3msr_params(int64_t ci, int64_t co, int64_t n, int64_t hidden) {
  return 2 * cba_params(ci, hidden, 1) + n * msr_params(hidden) + cba_params(2 * hidden, co, 1);
}
inline int64_t c3msr_macs(int64_t ci, int64_t co, int64_t n, int64_t hidden, int64_t h, int64_t w) {
  return 2 * conv_macs(ci, hidden, 1, h, w) + n * msr_macs(hidden, h, w) + conv_macs(2 * hidden, co, 1, h, w);
}

inline int64_t pconv_params(int64_t c) {
  const int64_t p = (c + 3) / 4;
  return conv_params(p, p, 3);
}
inline int64_t ema_params(int64_t c, int64_t g) {
  const int64_t cg = c / g;
  return conv_params(cg, cg, 1, 1, true) + conv_params(cg, cg, 3, 1, true) + 2 * cg;
}
inline int64_t ema_macs(int64_t n, int64_t c, int64_t g, int64_t h, int64_t w) {
  const int64_t cg = c / g;
  return n * g * (conv_macs(cg, cg, 1, h + w, 1) + conv_macs(cg, cg, 3, h, w));
}
inline int64_t f3_params(int64_t ci, int64_t co, int64_t g) {
  return cba_params(ci, 2 * co, 3) + pconv_params(co) + ema_params(co, g);
}

inline int64_t csmm_params(int64_t c, int64_t p) {
  return conv_params(c, c, p, c, true) + bn_params(c) + conv_params(c, c, 3, c, true) + bn_params(c) +
         conv_params(c, c, 1, 1, true) + bn_params(c);
}
inline int64_t csmm_macs(int64_t n, int64_t c, int64_t p, int64_t h, int64_t w) {
  const int64_t gh = (h + p - 1) / p, gw = (w + p - 1) / p;
  return n * (conv_macs(c, c, p, gh, gw, c) + conv_macs(c, c, 3, gh, gw, c) + conv_macs(c, c, 1, gh, gw));
}
inline int64_t seam_params(int64_t c) {
  const int64_t r = std::max<int64_t>(1, c / 16);
  return csmm_params(c, 6) + csmm_params(c, 7) + csmm_params(c, 8) + conv_params(3 * c, c, 1, 1, true) + c * r + r * c;
}
inline int64_t seam_macs(int64_t n, int64_t c, int64_t h, int64_t w) {
  const int64_t r = std::max<int64_t>(1, c / 16);
  return csmm_macs(n, c, 6, h, w) + csmm_macs(n, c, 7, h, w) + csmm_macs(n, c, 8, h, w) +
         n * conv_macs(3 * c, c, 1, h, w) + n * 2 * c * r;
}

inline int64_t litchi_head_params(const std::vector<int64_t>& channels, int64_t hidden, int64_t nc) {
  int64_t total = 0;
  for (int64_t c : channels) {
    total += cba_params(c, c, 3, c) + cba_params(c, hidden, 1);
    total += cba_params(hidden, hidden, 3, hidden) + cba_params(hidden, hidden, 1);
    total += cba_params(hidden, hidden, 3);
    total += seam_params(hidden);
    total += conv_params(hidden, 4, 1, 1, true) + conv_params(hidden, nc, 1, 1, true);
  }
  return total;
}

/// The same trunk duplicated into separate box and class branches.
inline int64_t two_branch_head_params(const std::vector<int64_t>& channels, int64_t hidden, int64_t nc) {
  int64_t total = 0;
  for (int64_t c : channels) {
    const int64_t trunk = cba_params(c, c, 3, c) + cba_params(c, hidden, 1) + cba_params(hidden, hidden, 3, hidden) +
                          cba_params(hidden, hidden, 1) + cba_params(hidden, hidden, 3) + seam_params(hidden);
    total += 2 * trunk + conv_params(hidden, 4, 1, 1, true) + conv_params(hidden, nc, 1, 1, true);
  }
  return total;
}

}  // namespace litchi::testing
