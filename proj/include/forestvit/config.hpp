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
#include <string>

#include "forestvit/geo.hpp"
#include "forestvit/kv.hpp"
#include "forestvit/vit.hpp"

namespace forestvit {

enum class ModelKind { kVit, kLr };
enum class GeoMode { kNone, kBars, kHeadConcat };
enum class OptimizerKind { kAdamW, kSgd };

std::string to_string(ModelKind m);
std::string to_string(GeoMode g);
std::string to_string(OptimizerKind o);
ModelKind parse_model_kind(const std::string& s);
GeoMode parse_geo_mode(const std::string& s);
OptimizerKind parse_optimizer(const std::string& s);

struct TrainConfig {
  ModelKind model = ModelKind::kVit;
  VitConfig vit;
  std::string augment = "none";  // AugmentPolicy preset name
  GeoMode geo = GeoMode::kNone;
  std::size_t bar_px = kDefaultBarPx;
  std::size_t batch_size = 32;
  double learning_rate = 5e-5;
  std::size_t epochs = 150;
  OptimizerKind optimizer = OptimizerKind::kAdamW;
  double weight_decay = 0.0;
  std::uint64_t seed = 0;
  std::filesystem::path root;
  std::filesystem::path output;
  // Single-threaded, bitwise reproducible execution. Always honoured; the
  // flag is kept so configs state the contract explicitly.
  bool deterministic = true;

  // Throws ConfigError for batch_size 0, a non-positive learning rate, an
  // unknown augmentation preset or an invalid model shape.
  void validate() const;

  // Model input side length (both model kinds read square images).
  std::size_t input_size() const { return vit.image_size; }

  // Flat keys: model, augment, geo, bar_px, batch_size, learning_rate,
  // epochs, optimizer, weight_decay, seed, deterministic, root, output and
  // vit.<field>. Paths are omitted when include_paths is false.
  KeyValues to_kv(bool include_paths = true) const;
  // Unknown keys raise ConfigError; missing keys keep their defaults.
  static TrainConfig from_kv(const KeyValues& kv);
  // Applies the keys present in kv on top of this config.
  void apply(const KeyValues& kv);
};

}  // namespace forestvit
