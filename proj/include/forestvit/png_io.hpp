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

#include <cstdint>
#include <filesystem>
#include <vector>

#include "forestvit/image.hpp"

namespace forestvit {

// 8-bit RGB raster as stored on disk.
struct Rgb8Image {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> pixels;  // H*W*3

  friend bool operator==(const Rgb8Image&, const Rgb8Image&) = default;
};

// Decodes any 8/16-bit PNG to 8-bit RGB (palette and gray expanded, alpha
// dropped). Throws FormatError naming the path when the file is unreadable.
Rgb8Image read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const Rgb8Image& image);

// Pixel scaling between [0,1] reals and 8-bit: v / 255 on the way in,
// floor(v * 255 + 0.5) clamped to [0,255] on the way out (round-half-up).
Image to_real(const Rgb8Image& image);
Rgb8Image to_rgb8(const Image& image);
std::uint8_t quantize(double value);

// read_png followed by to_real: values in [0,1].
Image load_image(const std::filesystem::path& path);
void save_image(const std::filesystem::path& path, const Image& image);

}  // namespace forestvit
