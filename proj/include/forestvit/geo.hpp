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

#include "forestvit/autodiff.hpp"
#include "forestvit/image.hpp"

namespace forestvit {

struct GeoCoordinate {
  double latitude = 0.0;   // degrees, [-90, 90]
  double longitude = 0.0;  // degrees, [-180, 180]

  friend bool operator==(const GeoCoordinate&, const GeoCoordinate&) = default;
};

void validate(const GeoCoordinate& c);

// Normalized position: u from longitude, v from latitude, both in [0,1].
struct GeoUV {
  double u = 0.0;
  double v = 0.0;
};

// Coordinate bounds taken from the training split.
struct GeoNormalizer {
  double lat_min = 0.0, lat_max = 0.0;
  double lon_min = 0.0, lon_max = 0.0;

  // Throws ConfigError unless min < max on both axes.
  void validate() const;
  // Bounding box of the given coordinates; ConfigError when degenerate.
  static GeoNormalizer fit(std::span<const GeoCoordinate> coords);

  friend bool operator==(const GeoNormalizer&, const GeoNormalizer&) = default;
};

// Linear map into [0,1]^2, clamping coordinates outside the training bounds.
GeoUV normalize_coord(const GeoCoordinate& c, const GeoNormalizer& n);

// Default bar thickness at 224 px.
inline constexpr std::size_t kDefaultBarPx = 16;

// Paints a bottom bar of gray level u (longitude) and a right bar of gray
// level v (latitude), bar_px thick, in place. The bottom-right corner square
// belongs to the vertical bar. Requires bar_px < min(H, W) / 4.
Image embed_geo_bars(const Image& image, GeoUV uv, std::size_t bar_px);
// True for pixels the bars overwrite.
bool in_geo_bar(std::size_t y, std::size_t x, std::size_t height, std::size_t width,
                std::size_t bar_px);

// Appends (u, v) to the class-token embedding: [1 x D] -> [1 x (D+2)].
Var concat_geo_head(Var cls_embedding, GeoUV uv);
Tensor concat_geo_head(const Tensor& cls_embedding, GeoUV uv);

}  // namespace forestvit
