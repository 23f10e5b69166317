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

#include <array>
#include <cstddef>
#include <string>

#include "forestvit/image.hpp"
#include "forestvit/kv.hpp"
#include "forestvit/rng.hpp"

namespace forestvit {

struct JitterDeltas {
  double brightness = 0.0;
  double contrast = 0.0;
  double saturation = 0.0;

  bool active() const { return brightness > 0.0 || contrast > 0.0 || saturation > 0.0; }

  friend bool operator==(const JitterDeltas&, const JitterDeltas&) = default;
};

// Probabilities and magnitudes for on-the-fly augmentation. Serialized with
// keys p_hflip, p_vflip, p_rot90, p_gray, jitter.brightness, jitter.contrast,
// jitter.saturation, p_perspective, perspective_scale.
struct AugmentPolicy {
  double p_hflip = 0.0;
  double p_vflip = 0.0;
  double p_rot90 = 0.0;  // rotation by k * 90 degrees, k uniform in {1, 2, 3}
  double p_gray = 0.0;
  JitterDeltas jitter;   // applied to every image whenever any delta is positive
  double p_perspective = 0.0;
  double perspective_scale = 0.0;  // in [0, 1)

  // Throws ConfigError for probabilities outside [0,1], negative deltas or a
  // perspective scale outside [0,1).
  void validate() const;

  static AugmentPolicy none();
  // Horizontal and vertical flips at 0.5 each.
  static AugmentPolicy flip();
  // Flips plus rot90 0.5, gray 0.03, jitter 0.2, perspective 0.2 at scale 0.2.
  static AugmentPolicy augmented();
  // "none", "flip" or "augmented".
  static AugmentPolicy preset(const std::string& name);

  KeyValues to_kv() const;
  // Missing keys keep their default of zero.
  static AugmentPolicy from_kv(const KeyValues& kv);

  friend bool operator==(const AugmentPolicy&, const AugmentPolicy&) = default;
};

Image hflip(const Image& image);
Image vflip(const Image& image);
// Counter-clockwise rotation by k * 90 degrees; requires a square image.
Image rot90(const Image& image, int k);
// Every channel set to 0.299 R + 0.587 G + 0.114 B.
Image grayscale(const Image& image);

double luminance(const Image& image, std::size_t y, std::size_t x);

// Single jitter steps; results clamped to [0,1].
Image adjust_brightness(const Image& image, double factor);
// Blend toward the image's mean luminance.
Image adjust_contrast(const Image& image, double factor);
// Blend toward each pixel's luminance.
Image adjust_saturation(const Image& image, double factor);
// Draws brightness, contrast and saturation factors from [1 - d, 1 + d] (in
// that order, three draws) and applies them in that order.
Image color_jitter(const Image& image, const JitterDeltas& deltas, SeededRng& rng);

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

// Row-major 3x3 projective map with h[8] == 1.
using Homography = std::array<double, 9>;

// Solves the 8x8 system mapping each from[i] to to[i]. Throws
// NumericDomainError when the configuration is degenerate.
Homography solve_homography(const std::array<Point2, 4>& from, const std::array<Point2, 4>& to);
Point2 apply_homography(const Homography& h, Point2 p);

// Output pixel centre p samples the input at out_to_in(p) bilinearly; samples
// outside the input are zero.
Image warp_perspective(const Image& image, const Homography& out_to_in);

// Moves each image corner inward by independent uniform offsets in
// [0, scale * size] on both axes (8 draws, corners in the order top-left,
// top-right, bottom-right, bottom-left) and warps the image onto that
// quadrilateral. Degenerate draws are repeated.
Image perspective(const Image& image, double scale, SeededRng& rng);

struct AugmentTrace {
  bool hflip = false;
  bool vflip = false;
  int rot90 = 0;
  bool gray = false;
  bool jitter = false;
  bool perspective = false;
};

// Applies, in order, hflip, vflip, rot90, grayscale, color jitter and
// perspective. Draw order: one uniform gate per stage (jitter has none),
// immediately followed by that stage's own draws when it runs (rot90: one
// draw for k; jitter: three factors; perspective: eight offsets).
Image apply_policy(const Image& image, const AugmentPolicy& policy, SeededRng& rng,
                   AugmentTrace* trace = nullptr);

}  // namespace forestvit
