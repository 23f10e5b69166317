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

#include "forestvit/geo.hpp"

#include <algorithm>

#include "forestvit/errors.hpp"

namespace forestvit {

void validate(const GeoCoordinate& c) {
  if (!(c.latitude >= -90.0 && c.latitude <= 90.0) ||
      !(c.longitude >= -180.0 && c.longitude <= 180.0)) {
    throw DataError("coordinate out of range: lat=" + std::to_string(c.latitude) +
                    " lon=" + std::to_string(c.longitude));
  }
}

void GeoNormalizer::validate() const {
  if (!(lat_min < lat_max) || !(lon_min < lon_max)) {
    throw ConfigError("degenerate geo normalizer: lat [" + std::to_string(lat_min) + ", " +
                      std::to_string(lat_max) + "], lon [" + std::to_string(lon_min) + ", " +
                      std::to_string(lon_max) + "]");
  }
}

GeoNormalizer GeoNormalizer::fit(std::span<const GeoCoordinate> coords) {
  if (coords.empty()) throw ConfigError("geo normalizer needs at least one coordinate");
  GeoNormalizer n{coords[0].latitude, coords[0].latitude, coords[0].longitude, coords[0].longitude};
  for (const auto& c : coords) {
    n.lat_min = std::min(n.lat_min, c.latitude);
    n.lat_max = std::max(n.lat_max, c.latitude);
    n.lon_min = std::min(n.lon_min, c.longitude);
    n.lon_max = std::max(n.lon_max, c.longitude);
  }
  n.validate();
  return n;
}

GeoUV normalize_coord(const GeoCoordinate& c, const GeoNormalizer& n) {
  n.validate();
  const double u = (c.longitude - n.lon_min) / (n.lon_max - n.lon_min);
  const double v = (c.latitude - n.lat_min) / (n.lat_max - n.lat_min);
  return GeoUV{std::clamp(u, 0.0, 1.0), std::clamp(v, 0.0, 1.0)};
}

bool in_geo_bar(std::size_t y, std::size_t x, std::size_t height, std::size_t width,
                std::size_t bar_px) {
  return x >= width - bar_px || y >= height - bar_px;
}

Image embed_geo_bars(const Image& image, GeoUV uv, std::size_t bar_px) {
  const std::size_t limit = std::min(image.height, image.width) / 4;
  if (bar_px == 0 || bar_px >= limit) {
    throw ConfigError("geo bar thickness " + std::to_string(bar_px) + " must be in [1, " +
                      std::to_string(limit) + ")");
  }
  Image out = image;
  for (std::size_t y = 0; y < out.height; ++y) {
    for (std::size_t x = 0; x < out.width; ++x) {
      double level;
      if (x >= out.width - bar_px) {
        level = uv.v;
      } else if (y >= out.height - bar_px) {
        level = uv.u;
      } else {
        continue;
      }
      for (std::size_t c = 0; c < Image::kChannels; ++c) out.at(y, x, c) = level;
    }
  }
  return out;
}

Var concat_geo_head(Var cls_embedding, GeoUV uv) {
  Var geo = cls_embedding.tape->constant(Tensor(Shape{1, 2}, {uv.u, uv.v}));
  const Var parts[] = {cls_embedding, geo};
  return ad::concat_cols(parts);
}

Tensor concat_geo_head(const Tensor& cls_embedding, GeoUV uv) {
  std::vector<double> values(cls_embedding.values().begin(), cls_embedding.values().end());
  values.push_back(uv.u);
  values.push_back(uv.v);
  const std::size_t n = values.size();
  return cls_embedding.rank() == 2 ? Tensor(Shape{1, n}, std::move(values))
                                   : Tensor(Shape{n}, std::move(values));
}

}  // namespace forestvit
