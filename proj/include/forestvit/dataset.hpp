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
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "forestvit/geo.hpp"
#include "forestvit/image.hpp"
#include "forestvit/kv.hpp"

namespace forestvit {

// Alphabetical; the index is the class label.
inline constexpr std::array<std::string_view, 4> kClassNames = {
    "grassland_shrubland", "other", "plantation", "smallholder_agriculture"};
std::vector<std::string> class_names();
std::optional<std::size_t> class_index(std::string_view name);

enum class Split { kTrain = 0, kValidation = 1, kTest = 2 };
inline constexpr std::array<std::string_view, 3> kSplitNames = {"train", "validation", "test"};
std::string_view split_name(Split s);
std::optional<Split> parse_split(std::string_view name);

struct ManifestRecord {
  Split split = Split::kTrain;
  std::size_t label = 0;
  std::filesystem::path path;     // absolute or root-joined
  std::string relative_path;      // "<split>/<class>/<file>" as written in metadata.csv
  std::optional<GeoCoordinate> coord;

  friend bool operator==(const ManifestRecord&, const ManifestRecord&) = default;
};

struct DatasetManifest {
  std::filesystem::path root;
  std::vector<ManifestRecord> records;

  std::vector<const ManifestRecord*> split(Split s) const;
};

// Reads root/<split>/<class>/*.png and joins root/metadata.csv (header
// "path,latitude,longitude") by relative path when the file exists. Records
// are sorted by (split, class, filename bytes). Unknown class directories
// raise DataError; records without a metadata row have no coordinate.
DatasetManifest scan(const std::filesystem::path& root);

struct ChannelStats {
  std::array<double, 3> mean{0.0, 0.0, 0.0};
  std::array<double, 3> std{1.0, 1.0, 1.0};

  // Keys mean_r, mean_g, mean_b, std_r, std_g, std_b (17 significant digits).
  KeyValues to_kv() const;
  static ChannelStats from_kv(const KeyValues& kv);

  friend bool operator==(const ChannelStats&, const ChannelStats&) = default;
};

// Population mean/std per channel over every pixel of every image, in a
// single ordered pass. Throws DataError when images is empty.
ChannelStats channel_stats(const std::vector<Image>& images);
// Loads the split's images from the manifest and accumulates their stats.
ChannelStats channel_stats(const DatasetManifest& manifest, Split split = Split::kTrain);

inline constexpr double kStdFloor = 1e-6;

// (x - mean) / max(std, 1e-6) per channel, and its inverse.
Image normalize(const Image& image, const ChannelStats& stats);
Image denormalize(const Image& image, const ChannelStats& stats);

// Expected split sizes of the reference deforestation-driver dataset.
inline constexpr std::array<std::size_t, 3> kReferenceSplitCounts = {1615, 473, 668};

struct SplitReport {
  std::array<std::size_t, 3> split_counts{};
  std::array<std::array<std::size_t, 4>, 3> class_counts{};
  std::size_t geo_missing = 0;
  bool matches_reference = false;

  std::size_t total() const { return split_counts[0] + split_counts[1] + split_counts[2]; }
  std::string to_text() const;
};

SplitReport validate_splits(const DatasetManifest& manifest);

}  // namespace forestvit
