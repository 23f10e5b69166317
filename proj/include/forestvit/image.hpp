/*
 * Copyright 2026 The ForestViT Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace forestvit {

// H x W x 3 pixel array, row-major, channel-last.
struct Image {
  static constexpr std::size_t kChannels = 3;

  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> pixels;

  Image() = default;
  Image(std::size_t h, std::size_t w, double fill = 0.0)
      : height(h), width(w), pixels(h * w * kChannels, fill) {}

  double at(std::size_t y, std::size_t x, std::size_t c) const {
    return pixels[(y * width + x) * kChannels + c];
  }
  double& at(std::size_t y, std::size_t x, std::size_t c) {
    return pixels[(y * width + x) * kChannels + c];
  }
  bool square() const { return height == width; }

  friend bool operator==(const Image&, const Image&) = default;
};

// Bilinear resize to target x target with half-pixel centers: output pixel i
// samples the source at (i + 0.5) * in / out - 0.5, clamped to the border.
Image resize(const Image& image, std::size_t target);

// Row-major, channel-last flattening (length H*W*3) and its inverse.
std::vector<double> flatten(const Image& image);
Image unflatten(std::span<const double> values, std::size_t height, std::size_t width);

}  // namespace forestvit
