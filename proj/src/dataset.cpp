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

#include "forestvit/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "forestvit/errors.hpp"
#include "forestvit/png_io.hpp"

namespace forestvit {

namespace fs = std::filesystem;

std::vector<std::string> class_names() { return {kClassNames.begin(), kClassNames.end()}; }

std::optional<std::size_t> class_index(std::string_view name) {
  for (std::size_t i = 0; i < kClassNames.size(); ++i) {
    if (kClassNames[i] == name) return i;
  }
  return std::nullopt;
}

std::string_view split_name(Split s) { return kSplitNames[static_cast<std::size_t>(s)]; }

std::optional<Split> parse_split(std::string_view name) {
  for (std::size_t i = 0; i < kSplitNames.size(); ++i) {
    if (kSplitNames[i] == name) return static_cast<Split>(i);
  }
  return std::nullopt;
}

std::vector<const ManifestRecord*> DatasetManifest::split(Split s) const {
  std::vector<const ManifestRecord*> out;
  for (const auto& r : records) {
    if (r.split == s) out.push_back(&r);
  }
  return out;
}

namespace {

bool is_png(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string strip(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && s[i] == ' ') ++i;
  return s.substr(i);
}

std::map<std::string, GeoCoordinate> read_metadata(const fs::path& csv) {
  std::map<std::string, GeoCoordinate> out;
  std::istringstream in(read_text_file(csv));
  std::string line;
  if (!std::getline(in, line)) throw DataError(csv.string() + ": missing header");
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line = line.substr(3);
  const auto header = split_csv_line(strip(line));
  if (header.size() != 3 || strip(header[0]) != "path" || strip(header[1]) != "latitude" ||
      strip(header[2]) != "longitude") {
    throw DataError(csv.string() + ": header must be 'path,latitude,longitude'");
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip(line);
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 3) {
      throw DataError(csv.string() + ":" + std::to_string(line_no) + ": expected 3 fields");
    }
    GeoCoordinate c;
    try {
      c.latitude = parse_double(strip(f[1]), "latitude");
      c.longitude = parse_double(strip(f[2]), "longitude");
    } catch (const ConfigError& e) {
      throw DataError(csv.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    validate(c);
    out[strip(f[0])] = c;
  }
  return out;
}

}  // namespace

DatasetManifest scan(const fs::path& root) {
  if (!fs::is_directory(root)) throw DataError("dataset root is not a directory: " + root.string());
  DatasetManifest manifest;
  manifest.root = root;
  std::map<std::string, GeoCoordinate> metadata;
  const fs::path csv = root / "metadata.csv";
  if (fs::exists(csv)) metadata = read_metadata(csv);

  for (std::size_t si = 0; si < kSplitNames.size(); ++si) {
    const fs::path split_dir = root / std::string(kSplitNames[si]);
    if (!fs::is_directory(split_dir)) continue;
    for (const auto& class_entry : fs::directory_iterator(split_dir)) {
      if (!class_entry.is_directory()) continue;
      const std::string class_dir = class_entry.path().filename().string();
      const auto label = class_index(class_dir);
      if (!label) {
        throw DataError("unknown class directory '" + class_dir + "' in " + split_dir.string());
      }
      for (const auto& file : fs::directory_iterator(class_entry.path())) {
        if (!file.is_regular_file() || !is_png(file.path())) continue;
        ManifestRecord r;
        r.split = static_cast<Split>(si);
        r.label = *label;
        r.relative_path = std::string(kSplitNames[si]) + "/" + class_dir + "/" + file.path().filename().string();
        r.path = root / r.relative_path;
        if (auto it = metadata.find(r.relative_path); it != metadata.end()) r.coord = it->second;
        manifest.records.push_back(std::move(r));
      }
    }
  }
  std::sort(manifest.records.begin(), manifest.records.end(), [](const ManifestRecord& a, const ManifestRecord& b) {
    if (a.split != b.split) return a.split < b.split;
    if (a.label != b.label) return a.label < b.label;
    return a.path.filename().string() < b.path.filename().string();
  });
  return manifest;
}

KeyValues ChannelStats::to_kv() const {
  return {{"mean_r", format_double(mean[0])}, {"mean_g", format_double(mean[1])},
          {"mean_b", format_double(mean[2])}, {"std_r", format_double(std[0])},
          {"std_g", format_double(std[1])},   {"std_b", format_double(std[2])}};
}

ChannelStats ChannelStats::from_kv(const KeyValues& kv) {
  ChannelStats s;
  const char* keys[2][3] = {{"mean_r", "mean_g", "mean_b"}, {"std_r", "std_g", "std_b"}};
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t k = 0; k < 2; ++k) {
      auto it = kv.find(keys[k][c]);
      if (it == kv.end()) throw FormatError(std::string("channel stats: missing key ") + keys[k][c]);
      (k == 0 ? s.mean : s.std)[c] = parse_double(it->second, keys[k][c]);
    }
  }
  return s;
}

namespace {

// Per-channel count/mean/M2 merged image by image in a fixed order.
struct StatsAccumulator {
  double count = 0.0;
  std::array<double, 3> mean{};
  std::array<double, 3> m2{};

  void add(const Image& image) {
    const double n = static_cast<double>(image.height * image.width);
    if (n == 0.0) return;
    for (std::size_t c = 0; c < 3; ++c) {
      double s = 0.0;
      for (std::size_t i = c; i < image.pixels.size(); i += 3) s += image.pixels[i];
      const double local_mean = s / n;
      double local_m2 = 0.0;
      for (std::size_t i = c; i < image.pixels.size(); i += 3) {
        const double d = image.pixels[i] - local_mean;
        local_m2 += d * d;
      }
      const double total = count + n;
      const double delta = local_mean - mean[c];
      mean[c] += delta * n / total;
      m2[c] += local_m2 + delta * delta * count * n / total;
    }
    count += n;
  }

  ChannelStats finish() const {
    ChannelStats s;
    for (std::size_t c = 0; c < 3; ++c) {
      s.mean[c] = mean[c];
      s.std[c] = std::sqrt(std::max(0.0, m2[c] / count));
    }
    return s;
  }
};

}  // namespace

ChannelStats channel_stats(const std::vector<Image>& images) {
  if (images.empty()) throw DataError("channel_stats: no images");
  StatsAccumulator acc;
  for (const auto& img : images) acc.add(img);
  if (acc.count == 0.0) throw DataError("channel_stats: images contain no pixels");
  return acc.finish();
}

ChannelStats channel_stats(const DatasetManifest& manifest, Split split) {
  const auto records = manifest.split(split);
  if (records.empty()) throw DataError("channel_stats: split '" + std::string(split_name(split)) + "' is empty");
  StatsAccumulator acc;
  for (const auto* r : records) acc.add(load_image(r->path));
  return acc.finish();
}

Image normalize(const Image& image, const ChannelStats& stats) {
  Image out = image;
  std::array<double, 3> inv;
  for (std::size_t c = 0; c < 3; ++c) inv[c] = 1.0 / std::max(stats.std[c], kStdFloor);
  for (std::size_t i = 0; i < out.pixels.size(); ++i) {
    const std::size_t c = i % 3;
    out.pixels[i] = (out.pixels[i] - stats.mean[c]) * inv[c];
  }
  return out;
}

Image denormalize(const Image& image, const ChannelStats& stats) {
  Image out = image;
  for (std::size_t i = 0; i < out.pixels.size(); ++i) {
    const std::size_t c = i % 3;
    out.pixels[i] = out.pixels[i] * std::max(stats.std[c], kStdFloor) + stats.mean[c];
  }
  return out;
}

SplitReport validate_splits(const DatasetManifest& manifest) {
  SplitReport r;
  for (const auto& rec : manifest.records) {
    const auto s = static_cast<std::size_t>(rec.split);
    ++r.split_counts[s];
    ++r.class_counts[s][rec.label];
    if (!rec.coord) ++r.geo_missing;
  }
  r.matches_reference = r.split_counts == kReferenceSplitCounts;
  return r;
}

std::string SplitReport::to_text() const {
  std::ostringstream out;
  for (std::size_t s = 0; s < 3; ++s) {
    out << kSplitNames[s] << '=' << split_counts[s] << '\n';
    for (std::size_t c = 0; c < 4; ++c) {
      out << kSplitNames[s] << '.' << kClassNames[c] << '=' << class_counts[s][c] << '\n';
    }
  }
  out << "total=" << total() << '\n';
  out << "geo_missing=" << geo_missing << '\n';
  return out.str();
}

}  // namespace forestvit
