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

#include "forestvit/augment.hpp"

#include <algorithm>
#include <cmath>

#include "forestvit/errors.hpp"

namespace forestvit {

namespace {

void check_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ConfigError(std::string("augment policy: ") + name + " must be in [0,1], got " + std::to_string(p));
  }
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

double lerp(double a, double b, double t) { return a + (b - a) * t; }

}  // namespace

void AugmentPolicy::validate() const {
  check_probability(p_hflip, "p_hflip");
  check_probability(p_vflip, "p_vflip");
  check_probability(p_rot90, "p_rot90");
  check_probability(p_gray, "p_gray");
  check_probability(p_perspective, "p_perspective");
  if (!(jitter.brightness >= 0.0) || !(jitter.contrast >= 0.0) || !(jitter.saturation >= 0.0)) {
    throw ConfigError("augment policy: jitter deltas must be non-negative");
  }
  if (!(perspective_scale >= 0.0 && perspective_scale < 1.0)) {
    throw ConfigError("augment policy: perspective_scale must be in [0,1)");
  }
}

AugmentPolicy AugmentPolicy::none() { return {}; }

AugmentPolicy AugmentPolicy::flip() {
  AugmentPolicy p;
  p.p_hflip = 0.5;
  p.p_vflip = 0.5;
  return p;
}

AugmentPolicy AugmentPolicy::augmented() {
  AugmentPolicy p = flip();
  p.p_rot90 = 0.5;
  p.p_gray = 0.03;
  p.jitter = {0.2, 0.2, 0.2};
  p.p_perspective = 0.2;
  p.perspective_scale = 0.2;
  return p;
}

AugmentPolicy AugmentPolicy::preset(const std::string& name) {
  if (name == "none") return none();
  if (name == "flip") return flip();
  if (name == "augmented") return augmented();
  throw ConfigError("unknown augmentation preset '" + name + "' (expected none, flip or augmented)");
}

KeyValues AugmentPolicy::to_kv() const {
  return {
      {"p_hflip", format_double(p_hflip)},
      {"p_vflip", format_double(p_vflip)},
      {"p_rot90", format_double(p_rot90)},
      {"p_gray", format_double(p_gray)},
      {"jitter.brightness", format_double(jitter.brightness)},
      {"jitter.contrast", format_double(jitter.contrast)},
      {"jitter.saturation", format_double(jitter.saturation)},
      {"p_perspective", format_double(p_perspective)},
      {"perspective_scale", format_double(perspective_scale)},
  };
}

AugmentPolicy AugmentPolicy::from_kv(const KeyValues& kv) {
  AugmentPolicy p;
  auto read = [&](const char* key, double& field) {
    if (auto it = kv.find(key); it != kv.end()) field = parse_double(it->second, key);
  };
  read("p_hflip", p.p_hflip);
  read("p_vflip", p.p_vflip);
  read("p_rot90", p.p_rot90);
  read("p_gray", p.p_gray);
  read("jitter.brightness", p.jitter.brightness);
  read("jitter.contrast", p.jitter.contrast);
  read("jitter.saturation", p.jitter.saturation);
  read("p_perspective", p.p_perspective);
  read("perspective_scale", p.perspective_scale);
  p.validate();
  return p;
}

Image hflip(const Image& image) {
  Image out(image.height, image.width);
  for (std::size_t y = 0; y < image.height; ++y) {
    for (std::size_t x = 0; x < image.width; ++x) {
      for (std::size_t c = 0; c < 3; ++c) out.at(y, x, c) = image.at(y, image.width - 1 - x, c);
    }
  }
  return out;
}

Image vflip(const Image& image) {
  Image out(image.height, image.width);
  for (std::size_t y = 0; y < image.height; ++y) {
    for (std::size_t x = 0; x < image.width; ++x) {
      for (std::size_t c = 0; c < 3; ++c) out.at(y, x, c) = image.at(image.height - 1 - y, x, c);
    }
  }
  return out;
}

Image rot90(const Image& image, int k) {
  if (!image.square()) throw ConfigError("rot90 requires a square image");
  const int turns = ((k % 4) + 4) % 4;
  Image out = image;
  const std::size_t n = image.width;
  for (int t = 0; t < turns; ++t) {
    Image next(n, n);
    for (std::size_t y = 0; y < n; ++y) {
      for (std::size_t x = 0; x < n; ++x) {
        for (std::size_t c = 0; c < 3; ++c) next.at(y, x, c) = out.at(x, n - 1 - y, c);
      }
    }
    out = std::move(next);
  }
  return out;
}

double luminance(const Image& image, std::size_t y, std::size_t x) {
  return 0.299 * image.at(y, x, 0) + 0.587 * image.at(y, x, 1) + 0.114 * image.at(y, x, 2);
}

Image grayscale(const Image& image) {
  Image out(image.height, image.width);
  for (std::size_t y = 0; y < image.height; ++y) {
    for (std::size_t x = 0; x < image.width; ++x) {
      const double l = luminance(image, y, x);
      for (std::size_t c = 0; c < 3; ++c) out.at(y, x, c) = l;
    }
  }
  return out;
}

Image adjust_brightness(const Image& image, double factor) {
  Image out = image;
  for (double& v : out.pixels) v = clamp01(v * factor);
  return out;
}

Image adjust_contrast(const Image& image, double factor) {
  double mean = 0.0;
  for (std::size_t y = 0; y < image.height; ++y) {
    for (std::size_t x = 0; x < image.width; ++x) mean += luminance(image, y, x);
  }
  mean /= static_cast<double>(image.height * image.width);
  Image out = image;
  for (double& v : out.pixels) v = clamp01(factor * v + (1.0 - factor) * mean);
  return out;
}

Image adjust_saturation(const Image& image, double factor) {
  Image out = image;
  for (std::size_t y = 0; y < image.height; ++y) {
    for (std::size_t x = 0; x < image.width; ++x) {
      const double l = luminance(image, y, x);
      for (std::size_t c = 0; c < 3; ++c) {
        out.at(y, x, c) = clamp01(factor * image.at(y, x, c) + (1.0 - factor) * l);
      }
    }
  }
  return out;
}

Image color_jitter(const Image& image, const JitterDeltas& deltas, SeededRng& rng) {
  const double b = rng.uniform(1.0 - deltas.brightness, 1.0 + deltas.brightness);
  const double c = rng.uniform(1.0 - deltas.contrast, 1.0 + deltas.contrast);
  const double s = rng.uniform(1.0 - deltas.saturation, 1.0 + deltas.saturation);
  Image out = image;
  if (deltas.brightness > 0.0) out = adjust_brightness(out, b);
  if (deltas.contrast > 0.0) out = adjust_contrast(out, c);
  if (deltas.saturation > 0.0) out = adjust_saturation(out, s);
  return out;
}

Homography solve_homography(const std::array<Point2, 4>& from, const std::array<Point2, 4>& to) {
  // Unknowns h0..h7 with h8 = 1:
  //   x' (h6 x + h7 y + 1) = h0 x + h1 y + h2
  //   y' (h6 x + h7 y + 1) = h3 x + h4 y + h5
  double a[8][9] = {};
  for (std::size_t i = 0; i < 4; ++i) {
    const double x = from[i].x, y = from[i].y, u = to[i].x, v = to[i].y;
    double* r0 = a[2 * i];
    double* r1 = a[2 * i + 1];
    r0[0] = x, r0[1] = y, r0[2] = 1, r0[6] = -u * x, r0[7] = -u * y, r0[8] = u;
    r1[3] = x, r1[4] = y, r1[5] = 1, r1[6] = -v * x, r1[7] = -v * y, r1[8] = v;
  }
  double scale = 0.0;
  for (auto& row : a) {
    for (double v : row) scale = std::max(scale, std::abs(v));
  }
  for (int col = 0; col < 8; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 8; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    }
    if (std::abs(a[pivot][col]) <= 1e-12 * scale) {
      throw NumericDomainError("solve_homography: degenerate corner configuration");
    }
    if (pivot != col) std::swap(a[pivot], a[col]);
    for (int r = 0; r < 8; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      if (f == 0.0) continue;
      for (int c = col; c < 9; ++c) a[r][c] -= f * a[col][c];
    }
  }
  Homography h{};
  for (int i = 0; i < 8; ++i) h[i] = a[i][8] / a[i][i];
  h[8] = 1.0;
  return h;
}

Point2 apply_homography(const Homography& h, Point2 p) {
  const double w = h[6] * p.x + h[7] * p.y + h[8];
  return {(h[0] * p.x + h[1] * p.y + h[2]) / w, (h[3] * p.x + h[4] * p.y + h[5]) / w};
}

Image warp_perspective(const Image& image, const Homography& out_to_in) {
  const double w = static_cast<double>(image.width), hgt = static_cast<double>(image.height);
  Image out(image.height, image.width);
  for (std::size_t y = 0; y < image.height; ++y) {
    for (std::size_t x = 0; x < image.width; ++x) {
      const Point2 q = apply_homography(out_to_in, {static_cast<double>(x) + 0.5, static_cast<double>(y) + 0.5});
      if (!(q.x >= 0.0 && q.x <= w && q.y >= 0.0 && q.y <= hgt)) continue;
      const double fx = std::clamp(q.x - 0.5, 0.0, w - 1.0);
      const double fy = std::clamp(q.y - 0.5, 0.0, hgt - 1.0);
      const auto x0 = static_cast<std::size_t>(fx), y0 = static_cast<std::size_t>(fy);
      const std::size_t x1 = std::min(x0 + 1, image.width - 1), y1 = std::min(y0 + 1, image.height - 1);
      const double tx = fx - static_cast<double>(x0), ty = fy - static_cast<double>(y0);
      for (std::size_t c = 0; c < 3; ++c) {
        const double top = lerp(image.at(y0, x0, c), image.at(y0, x1, c), tx);
        const double bottom = lerp(image.at(y1, x0, c), image.at(y1, x1, c), tx);
        out.at(y, x, c) = lerp(top, bottom, ty);
      }
    }
  }
  return out;
}

namespace {

bool convex(const std::array<Point2, 4>& q) {
  int sign = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    const Point2& a = q[i];
    const Point2& b = q[(i + 1) % 4];
    const Point2& c = q[(i + 2) % 4];
    const double cross = (b.x - a.x) * (c.y - b.y) - (b.y - a.y) * (c.x - b.x);
    if (std::abs(cross) < 1e-9) return false;
    const int s = cross > 0 ? 1 : -1;
    if (sign != 0 && s != sign) return false;
    sign = s;
  }
  return true;
}

}  // namespace

Image perspective(const Image& image, double scale, SeededRng& rng) {
  if (!(scale >= 0.0 && scale < 1.0)) throw ConfigError("perspective: scale must be in [0,1)");
  const double w = static_cast<double>(image.width), h = static_cast<double>(image.height);
  const std::array<Point2, 4> corners{{{0, 0}, {w, 0}, {w, h}, {0, h}}};
  // Inward direction per corner.
  const double dir[4][2] = {{1, 1}, {-1, 1}, {-1, -1}, {1, -1}};
  constexpr int kMaxAttempts = 100;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    std::array<Point2, 4> target;
    for (std::size_t i = 0; i < 4; ++i) {
      const double dx = rng.uniform(0.0, scale * w);
      const double dy = rng.uniform(0.0, scale * h);
      target[i] = {corners[i].x + dir[i][0] * dx, corners[i].y + dir[i][1] * dy};
    }
    if (!convex(target)) continue;
    try {
      // Output pixels inside the target quadrilateral come from the full input.
      return warp_perspective(image, solve_homography(target, corners));
    } catch (const NumericDomainError&) {
      continue;
    }
  }
  return image;
}

Image apply_policy(const Image& image, const AugmentPolicy& policy, SeededRng& rng, AugmentTrace* trace) {
  AugmentTrace local;
  AugmentTrace& t = trace ? *trace : local;
  t = AugmentTrace{};
  Image out = image;
  if (rng.uniform() < policy.p_hflip) {
    out = hflip(out);
    t.hflip = true;
  }
  if (rng.uniform() < policy.p_vflip) {
    out = vflip(out);
    t.vflip = true;
  }
  if (rng.uniform() < policy.p_rot90) {
    t.rot90 = 1 + static_cast<int>(rng.below(3));
    out = rot90(out, t.rot90);
  }
  if (rng.uniform() < policy.p_gray) {
    out = grayscale(out);
    t.gray = true;
  }
  if (policy.jitter.active()) {
    out = color_jitter(out, policy.jitter, rng);
    t.jitter = true;
  }
  if (rng.uniform() < policy.p_perspective) {
    out = perspective(out, policy.perspective_scale, rng);
    t.perspective = true;
  }
  return out;
}

}  // namespace forestvit
