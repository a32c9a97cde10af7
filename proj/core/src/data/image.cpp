// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#include "litchi/data/image.hpp"

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "litchi/error.hpp"

namespace litchi::data {

Image::Image(int w, int h, uint8_t fill)
    : width(w), height(h), pixels(static_cast<size_t>(w) * h * kChannels, fill) {
  if (w < 0 || h < 0) throw DomainError("image_size", "negative dimension");
}

namespace {

cv::Mat to_bgr(const Image& image) {
  cv::Mat rgb(image.height, image.width, CV_8UC3, const_cast<uint8_t*>(image.pixels.data()));
  cv::Mat bgr;
  cv::cvtColor(rgb, bgr, cv::COLOR_RGB2BGR);
  return bgr;
}

Image from_bgr(const cv::Mat& bgr) {
  Image image(bgr.cols, bgr.rows);
  cv::Mat rgb(image.height, image.width, CV_8UC3, image.pixels.data());
  cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
  return image;
}

}  // namespace

Image read_image(const std::string& path) {
  const cv::Mat bgr = cv::imread(path, cv::IMREAD_COLOR);
  if (bgr.empty()) throw IoError(path, "cannot read image");
  return from_bgr(bgr);
}

void write_image(const Image& image, const std::string& path) {
  if (image.empty()) throw IoError(path, "refusing to write an empty image");
  bool ok = false;
  try {
    ok = cv::imwrite(path, to_bgr(image));
  } catch (const cv::Exception& e) {
    throw IoError(path, e.what());
  }
  if (!ok) throw IoError(path, "cannot write image");
}

Image resize(const Image& image, int width, int height) {
  if (width <= 0 || height <= 0) throw DomainError("size", "resize target must be positive");
  if (width == image.width && height == image.height) return image;
  const cv::Mat src(image.height, image.width, CV_8UC3, const_cast<uint8_t*>(image.pixels.data()));
  Image out(width, height);
  cv::Mat dst(height, width, CV_8UC3, out.pixels.data());
  const bool shrink = width < image.width && height < image.height;
  cv::resize(src, dst, cv::Size(width, height), 0, 0, shrink ? cv::INTER_AREA : cv::INTER_LINEAR);
  return out;
}

}  // namespace litchi::data
