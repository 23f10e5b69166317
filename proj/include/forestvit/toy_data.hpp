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
#include <cstdint>
#include <filesystem>
#include <vector>

#include "forestvit/dataset.hpp"
#include "forestvit/geo.hpp"
#include "forestvit/image.hpp"

namespace forestvit {

// Synthetic four-class image set used as a small stand-in for the real data.
//
// Each class draws one 256-pixel shape on a 32 px canvas: a filled 16x16
// square, a 20x20 ring with a 4 px border, an 8x32 horizontal bar or a 32x8
// vertical bar. In the plain variant the shape is centred and its colour
// depends on the class. In the translated variant every class uses the same
// colour and the shape is shifted by a uniform toroidal offset, so all
// classes share the same per-pixel mean image.
struct ToyDatasetOptions {
  std::size_t image_size = 32;
  std::size_t train_per_class = 80;
  std::size_t validation_per_class = 20;
  std::size_t test_per_class = 0;
  bool translated = false;
  double noise = 0.05;  // half-width of uniform per-channel noise
  std::uint64_t seed = 0;
};

struct ToySample {
  Split split = Split::kTrain;
  std::size_t label = 0;
  Image image;
  GeoCoordinate coord;
};

// Samples ordered by split, then class, then index.
std::vector<ToySample> generate_toy(const ToyDatasetOptions& options);

// Writes root/<split>/<class>/<index>.png and root/metadata.csv.
// Returns the number of images written.
std::size_t write_toy_dataset(const std::filesystem::path& root, const ToyDatasetOptions& options);

}  // namespace forestvit
