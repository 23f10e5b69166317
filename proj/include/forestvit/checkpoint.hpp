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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "forestvit/config.hpp"
#include "forestvit/dataset.hpp"
#include "forestvit/geo.hpp"
#include "forestvit/model.hpp"

namespace forestvit {

struct HistoryRow {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double train_acc = 0.0;
  double val_loss = 0.0;
  double val_acc = 0.0;

  friend bool operator==(const HistoryRow&, const HistoryRow&) = default;
};

struct Checkpoint {
  static constexpr std::uint32_t kVersion = 1;

  TrainConfig config;
  std::size_t epoch = 0;  // 0 is the initial model
  Model model;
  ChannelStats stats;
  std::optional<GeoNormalizer> geo_bounds;
  std::vector<HistoryRow> history;
};

// Layout, all integers u32 little-endian and reals f64 little-endian:
//   "PWCK", version, config length, config text (sorted key=value lines,
//   paths omitted), epoch, block count, then per block: name length, name,
//   rank, dims..., values.
// Parameter blocks come first in canonical order, followed by the meta
// blocks meta.channel_mean, meta.channel_std, meta.geo_bounds (lat_min,
// lat_max, lon_min, lon_max; only when present) and meta.history (rows x 5:
// epoch, train_loss, train_acc, val_loss, val_acc; only when non-empty).
std::string encode_checkpoint(const Checkpoint& checkpoint);
// Throws FormatError for bad magic, an unsupported version, truncation or
// parameter blocks that do not match the stored config.
Checkpoint decode_checkpoint(std::string_view bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace forestvit
