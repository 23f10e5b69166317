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

#include "forestvit/toy_data.hpp"

#include <algorithm>
#include <array>
#include <cstdio>

#include "forestvit/errors.hpp"
#include "forestvit/kv.hpp"
#include "forestvit/png_io.hpp"
#include "forestvit/rng.hpp"

namespace forestvit {

namespace {

using Rgb = std::array<double, 3>;

constexpr Rgb kBackground = {0.25, 0.30, 0.25};
constexpr Rgb kSharedColor = {0.90, 0.90, 0.90};
constexpr std::array<Rgb, 4> kClassColors = {{
    {0.80, 0.80, 0.20},
    {0.60, 0.60, 0.60},
    {0.10, 0.60, 0.10},
    {0.60, 0.30, 0.10},
}};

// Shape masks relative to the top-left of their bounding box.
struct ShapeSpec {
  std::size_t height;
  std::size_t width;
  std::size_t border;  // 0 for a filled shape
};

constexpr std::array<ShapeSpec, 4> kShapes = {{{16, 16, 0}, {20, 20, 4}, {8, 32, 0}, {32, 8, 0}}};

bool shape_covers(const ShapeSpec& s, std::size_t y, std::size_t x) {
  if (y >= s.height || x >= s.width) return false;
  if (s.border == 0) return true;
  return y < s.border || x < s.border || y >= s.height - s.border || x >= s.width - s.border;
}

Image render(std::size_t label, const ToyDatasetOptions& o, SeededRng& rng) {
  const std::size_t n = o.image_size;
  const ShapeSpec& shape = kShapes[label];
  std::size_t oy = (n - shape.height) / 2, ox = (n - shape.width) / 2;
  if (o.translated) {
    oy = rng.below(n);
    ox = rng.below(n);
  }
  const Rgb& color = o.translated ? kSharedColor : kClassColors[label];
  Image img(n, n);
  for (std::size_t y = 0; y < n; ++y) {
    for (std::size_t x = 0; x < n; ++x) {
      // Position inside the shape box with toroidal wrap.
      const std::size_t sy = (y + n - oy) % n, sx = (x + n - ox) % n;
      const Rgb& base = shape_covers(shape, sy, sx) ? color : kBackground;
      for (std::size_t c = 0; c < 3; ++c) {
        const double v = base[c] + o.noise * (2.0 * rng.uniform() - 1.0);
        img.at(y, x, c) = std::clamp(v, 0.0, 1.0);
      }
    }
  }
  return img;
}

}  // namespace

std::vector<ToySample> generate_toy(const ToyDatasetOptions& o) {
  if (o.image_size < 32) throw ConfigError("toy dataset: image_size must be at least 32");
  const std::array<std::size_t, 3> per_class = {o.train_per_class, o.validation_per_class, o.test_per_class};
  std::vector<ToySample> out;
  for (std::size_t s = 0; s < 3; ++s) {
    for (std::size_t label = 0; label < 4; ++label) {
      for (std::size_t i = 0; i < per_class[s]; ++i) {
        SeededRng rng(derive_seed(o.seed, s * 4 + label, i));
        ToySample sample;
        sample.split = static_cast<Split>(s);
        sample.label = label;
        sample.image = render(label, o, rng);
        sample.coord = GeoCoordinate{rng.uniform(-8.0, 4.0), rng.uniform(95.0, 141.0)};
        out.push_back(std::move(sample));
      }
    }
  }
  return out;
}

std::size_t write_toy_dataset(const std::filesystem::path& root, const ToyDatasetOptions& options) {
  const auto samples = generate_toy(options);
  std::vector<std::size_t> counters(12, 0);
  std::string csv = "path,latitude,longitude\n";
  for (const auto& s : samples) {
    const auto si = static_cast<std::size_t>(s.split);
    char name[64];
    std::snprintf(name, sizeof name, "%04zu.png", counters[si * 4 + s.label]++);
    const std::string rel =
        std::string(split_name(s.split)) + "/" + std::string(kClassNames[s.label]) + "/" + name;
    std::filesystem::create_directories((root / rel).parent_path());
    save_image(root / rel, s.image);
    csv += rel + "," + format_double(s.coord.latitude) + "," + format_double(s.coord.longitude) + "\n";
  }
  write_text_file(root / "metadata.csv", csv);
  return samples.size();
}

}  // namespace forestvit
