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

#include "forestvit/config.hpp"

#include "forestvit/augment.hpp"
#include "forestvit/errors.hpp"

namespace forestvit {

std::string to_string(ModelKind m) { return m == ModelKind::kVit ? "vit" : "lr"; }

std::string to_string(GeoMode g) {
  switch (g) {
    case GeoMode::kNone: return "none";
    case GeoMode::kBars: return "bars";
    case GeoMode::kHeadConcat: return "head_concat";
  }
  return "none";
}

std::string to_string(OptimizerKind o) { return o == OptimizerKind::kAdamW ? "adamw" : "sgd"; }

ModelKind parse_model_kind(const std::string& s) {
  if (s == "vit") return ModelKind::kVit;
  if (s == "lr") return ModelKind::kLr;
  throw ConfigError("model must be 'vit' or 'lr', got '" + s + "'");
}

GeoMode parse_geo_mode(const std::string& s) {
  if (s == "none") return GeoMode::kNone;
  if (s == "bars") return GeoMode::kBars;
  if (s == "head_concat") return GeoMode::kHeadConcat;
  throw ConfigError("geo must be 'none', 'bars' or 'head_concat', got '" + s + "'");
}

OptimizerKind parse_optimizer(const std::string& s) {
  if (s == "adamw") return OptimizerKind::kAdamW;
  if (s == "sgd") return OptimizerKind::kSgd;
  throw ConfigError("optimizer must be 'adamw' or 'sgd', got '" + s + "'");
}

void TrainConfig::validate() const {
  if (batch_size == 0) throw ConfigError("batch_size must be at least 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (weight_decay < 0.0) throw ConfigError("weight_decay must be non-negative");
  AugmentPolicy::preset(augment).validate();
  VitConfig v = vit;
  v.head_extra_inputs = geo == GeoMode::kHeadConcat ? 2 : 0;
  if (model == ModelKind::kVit) {
    v.validate();
  } else if (vit.image_size < 2 || vit.num_classes < 2) {
    throw ConfigError("lr model needs image_size >= 2 and num_classes >= 2");
  }
  if (geo == GeoMode::kBars && !(bar_px > 0 && bar_px < vit.image_size / 4)) {
    throw ConfigError("bar_px must be in (0, image_size / 4)");
  }
}

KeyValues TrainConfig::to_kv(bool include_paths) const {
  KeyValues kv;
  kv["model"] = to_string(model);
  kv["augment"] = augment;
  kv["geo"] = to_string(geo);
  kv["bar_px"] = std::to_string(bar_px);
  kv["batch_size"] = std::to_string(batch_size);
  kv["learning_rate"] = format_double(learning_rate);
  kv["epochs"] = std::to_string(epochs);
  kv["optimizer"] = to_string(optimizer);
  kv["weight_decay"] = format_double(weight_decay);
  kv["seed"] = std::to_string(seed);
  kv["deterministic"] = deterministic ? "true" : "false";
  kv["vit.image_size"] = std::to_string(vit.image_size);
  kv["vit.patch_size"] = std::to_string(vit.patch_size);
  kv["vit.embed_dim"] = std::to_string(vit.embed_dim);
  kv["vit.num_heads"] = std::to_string(vit.num_heads);
  kv["vit.depth"] = std::to_string(vit.depth);
  kv["vit.mlp_ratio"] = format_double(vit.mlp_ratio);
  kv["vit.num_classes"] = std::to_string(vit.num_classes);
  kv["vit.eps"] = format_double(vit.eps);
  if (include_paths) {
    kv["root"] = root.string();
    kv["output"] = output.string();
  }
  return kv;
}

void TrainConfig::apply(const KeyValues& kv) {
  for (const auto& [key, value] : kv) {
    if (key == "model") model = parse_model_kind(value);
    else if (key == "augment") augment = value;
    else if (key == "geo") geo = parse_geo_mode(value);
    else if (key == "bar_px") bar_px = parse_size(value, key);
    else if (key == "batch_size") batch_size = parse_size(value, key);
    else if (key == "learning_rate") learning_rate = parse_double(value, key);
    else if (key == "epochs") epochs = parse_size(value, key);
    else if (key == "optimizer") optimizer = parse_optimizer(value);
    else if (key == "weight_decay") weight_decay = parse_double(value, key);
    else if (key == "seed") seed = parse_size(value, key);
    else if (key == "deterministic") deterministic = parse_bool(value, key);
    else if (key == "root") root = value;
    else if (key == "output") output = value;
    else if (key == "vit.image_size") vit.image_size = parse_size(value, key);
    else if (key == "vit.patch_size") vit.patch_size = parse_size(value, key);
    else if (key == "vit.embed_dim") vit.embed_dim = parse_size(value, key);
    else if (key == "vit.num_heads") vit.num_heads = parse_size(value, key);
    else if (key == "vit.depth") vit.depth = parse_size(value, key);
    else if (key == "vit.mlp_ratio") vit.mlp_ratio = parse_double(value, key);
    else if (key == "vit.num_classes") vit.num_classes = parse_size(value, key);
    else if (key == "vit.eps") vit.eps = parse_double(value, key);
    else throw ConfigError("unknown config key '" + key + "'");
  }
}

TrainConfig TrainConfig::from_kv(const KeyValues& kv) {
  TrainConfig c;
  c.apply(kv);
  return c;
}

}  // namespace forestvit
