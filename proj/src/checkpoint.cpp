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

#include "forestvit/checkpoint.hpp"

#include <bit>
#include <map>

#include "forestvit/errors.hpp"

namespace forestvit {

namespace {

constexpr char kMagic[4] = {'P', 'W', 'C', 'K'};

class Writer {
 public:
  void bytes(std::string_view s) { out_.append(s); }
  void u32(std::uint64_t v) {
    if (v > 0xffffffffu) throw FormatError("checkpoint: value does not fit in u32");
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void f64(double d) {
    const auto v = std::bit_cast<std::uint64_t>(d);
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void block(const std::string& name, const Shape& shape, std::span<const double> values) {
    u32(name.size());
    bytes(name);
    u32(shape.size());
    for (std::size_t d : shape) u32(d);
    for (double v : values) f64(v);
  }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}
  std::string_view bytes(std::size_t n) {
    if (in_.size() - pos_ < n) throw FormatError("checkpoint: truncated at byte " + std::to_string(pos_));
    const auto s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::uint32_t u32() {
    const auto s = bytes(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(s[i])) << (8 * i);
    return v;
  }
  double f64() {
    const auto s = bytes(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(s[i])) << (8 * i);
    return std::bit_cast<double>(v);
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  std::string_view in_;
  std::size_t pos_ = 0;
};

struct Block {
  Shape shape;
  std::vector<double> values;
};

constexpr std::size_t kHistoryColumns = 5;

}  // namespace

std::string encode_checkpoint(const Checkpoint& ck) {
  Writer w;
  w.bytes(std::string_view(kMagic, 4));
  w.u32(Checkpoint::kVersion);
  const std::string config = format_kv(ck.config.to_kv(false));
  w.u32(config.size());
  w.bytes(config);
  w.u32(ck.epoch);
  const auto params = ck.model.parameters();
  const std::size_t meta = 2 + (ck.geo_bounds ? 1 : 0) + (ck.history.empty() ? 0 : 1);
  w.u32(params.size() + meta);
  for (const auto& [name, t] : params) w.block(name, t->shape(), t->values());
  w.block("meta.channel_mean", Shape{3}, ck.stats.mean);
  w.block("meta.channel_std", Shape{3}, ck.stats.std);
  if (ck.geo_bounds) {
    const auto& g = *ck.geo_bounds;
    const std::vector<double> v = {g.lat_min, g.lat_max, g.lon_min, g.lon_max};
    w.block("meta.geo_bounds", Shape{4}, v);
  }
  if (!ck.history.empty()) {
    std::vector<double> v;
    for (const auto& r : ck.history) {
      v.insert(v.end(), {static_cast<double>(r.epoch), r.train_loss, r.train_acc, r.val_loss, r.val_acc});
    }
    w.block("meta.history", Shape{ck.history.size(), kHistoryColumns}, v);
  }
  return w.take();
}

Checkpoint decode_checkpoint(std::string_view bytes) {
  Reader r(bytes);
  if (r.bytes(4) != std::string_view(kMagic, 4)) throw FormatError("checkpoint: bad magic");
  const std::uint32_t version = r.u32();
  if (version != Checkpoint::kVersion) {
    throw FormatError("checkpoint: unsupported version " + std::to_string(version));
  }
  Checkpoint ck;
  const std::uint32_t config_len = r.u32();
  try {
    ck.config = TrainConfig::from_kv(parse_kv(r.bytes(config_len)));
  } catch (const ConfigError& e) {
    throw FormatError(std::string("checkpoint: invalid config: ") + e.what());
  }
  ck.epoch = r.u32();
  const std::uint32_t count = r.u32();
  std::map<std::string, Block> blocks;
  std::vector<std::string> order;
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name(r.bytes(r.u32()));
    Block b;
    const std::uint32_t rank = r.u32();
    for (std::uint32_t d = 0; d < rank; ++d) b.shape.push_back(r.u32());
    const std::size_t n = shape_size(b.shape);
    b.values.reserve(n);
    for (std::size_t k = 0; k < n; ++k) b.values.push_back(r.f64());
    if (blocks.count(name)) throw FormatError("checkpoint: duplicate block " + name);
    order.push_back(name);
    blocks.emplace(std::move(name), std::move(b));
  }
  if (!r.done()) throw FormatError("checkpoint: trailing bytes");

  ck.model = Model::zeros(ck.config);
  std::size_t used = 0;
  for (auto& [name, t] : ck.model.parameters()) {
    auto it = blocks.find(name);
    if (it == blocks.end()) throw FormatError("checkpoint: missing parameter " + name);
    if (it->second.shape != t->shape()) {
      throw FormatError("checkpoint: parameter " + name + " has shape " + shape_string(it->second.shape) +
                        ", config expects " + shape_string(t->shape()));
    }
    *t = Tensor(it->second.shape, std::move(it->second.values));
    ++used;
  }
  auto take = [&](const std::string& name, std::size_t expected) -> const Block* {
    auto it = blocks.find(name);
    if (it == blocks.end()) return nullptr;
    if (it->second.values.size() != expected && expected != 0) {
      throw FormatError("checkpoint: block " + name + " has the wrong size");
    }
    ++used;
    return &it->second;
  };
  const Block* mean = take("meta.channel_mean", 3);
  const Block* std = take("meta.channel_std", 3);
  if (!mean || !std) throw FormatError("checkpoint: missing channel statistics");
  for (std::size_t c = 0; c < 3; ++c) {
    ck.stats.mean[c] = mean->values[c];
    ck.stats.std[c] = std->values[c];
  }
  if (const Block* g = take("meta.geo_bounds", 4)) {
    ck.geo_bounds = GeoNormalizer{g->values[0], g->values[1], g->values[2], g->values[3]};
  }
  if (const Block* h = take("meta.history", 0)) {
    if (h->shape.size() != 2 || h->shape[1] != kHistoryColumns) {
      throw FormatError("checkpoint: meta.history must be rows x 5");
    }
    for (std::size_t i = 0; i < h->shape[0]; ++i) {
      const double* row = h->values.data() + i * kHistoryColumns;
      ck.history.push_back(HistoryRow{static_cast<std::size_t>(row[0]), row[1], row[2], row[3], row[4]});
    }
  }
  if (used != blocks.size()) throw FormatError("checkpoint: unexpected blocks present");
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  write_text_file(path, encode_checkpoint(checkpoint));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  try {
    return decode_checkpoint(read_text_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace forestvit
