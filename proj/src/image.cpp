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

#include "forestvit/image.hpp"

#include <algorithm>
#include <cmath>

#include "forestvit/errors.hpp"

namespace forestvit {

namespace {

struct Tap {
  std::size_t lo, hi;
  double frac;
};

std::vector<Tap> bilinear_taps(std::size_t in, std::size_t out) {
  std::vector<Tap> taps(out);
  const double ratio = static_cast<double>(in) / static_cast<double>(out);
  const double max_pos = static_cast<double>(in - 1);
  for (std::size_t i = 0; i < out; ++i) {
    double src = (static_cast<double>(i) + 0.5) * ratio - 0.5;
    src = std::clamp(src, 0.0, max_pos);
    const auto lo = static_cast<std::size_t>(std::floor(src));
    const std::size_t hi = std::min(lo + 1, in - 1);
    taps[i] = Tap{lo, hi, src - static_cast<double>(lo)};
  }
  return taps;
}

// a + (b - a) * t reproduces a exactly when a == b.
double lerp(double a, double b, double t) { return a + (b - a) * t; }

}  // namespace

Image resize(const Image& image, std::size_t target) {
  if (target < 2) throw ConfigError("resize: target must be at least 2");
  if (image.height == 0 || image.width == 0) throw ConfigError("resize: empty image");
  if (image.height == target && image.width == target) return image;
  const auto ys = bilinear_taps(image.height, target);
  const auto xs = bilinear_taps(image.width, target);
  Image out(target, target);
  for (std::size_t y = 0; y < target; ++y) {
    const Tap& ty = ys[y];
    for (std::size_t x = 0; x < target; ++x) {
      const Tap& tx = xs[x];
      for (std::size_t c = 0; c < Image::kChannels; ++c) {
        const double top = lerp(image.at(ty.lo, tx.lo, c), image.at(ty.lo, tx.hi, c), tx.frac);
        const double bottom = lerp(image.at(ty.hi, tx.lo, c), image.at(ty.hi, tx.hi, c), tx.frac);
        out.at(y, x, c) = lerp(top, bottom, ty.frac);
      }
    }
  }
  return out;
}

std::vector<double> flatten(const Image& image) { return image.pixels; }

Image unflatten(std::span<const double> values, std::size_t height, std::size_t width) {
  if (values.size() != height * width * Image::kChannels) {
    throw DimensionError("unflatten: " + std::to_string(values.size()) + " values for " +
                         std::to_string(height) + "x" + std::to_string(width) + "x3");
  }
  Image out;
  out.height = height;
  out.width = width;
  out.pixels.assign(values.begin(), values.end());
  return out;
}

}  // namespace forestvit
