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

#include "forestvit/train.hpp"

#include <cmath>
#include <numeric>

#include "forestvit/augment.hpp"
#include "forestvit/errors.hpp"
#include "forestvit/ops.hpp"
#include "forestvit/optim.hpp"
#include "forestvit/png_io.hpp"
#include "forestvit/rng.hpp"

namespace forestvit {

namespace {

// Seed streams derived from the run seed.
constexpr std::uint64_t kShuffleStream = 1;
constexpr std::uint64_t kAugmentStream = 2;

// Decoded, resized images are kept in memory up to this many bytes.
constexpr std::size_t kCacheBudgetBytes = std::size_t{1} << 30;

}  // namespace

Preprocessor::Preprocessor(const TrainConfig& config, ChannelStats stats, std::optional<GeoNormalizer> geo_bounds)
    : config_(config), stats_(stats), geo_bounds_(geo_bounds), policy_(AugmentPolicy::preset(config.augment)) {
  if (config_.geo != GeoMode::kNone && !geo_bounds_) {
    throw ConfigError("geo mode " + to_string(config_.geo) + " needs coordinate bounds");
  }
}

std::optional<GeoUV> Preprocessor::coordinates(const ManifestRecord& record) const {
  if (config_.geo == GeoMode::kNone) return std::nullopt;
  if (!record.coord) throw DataError("record has no coordinates: " + record.relative_path);
  return normalize_coord(*record.coord, *geo_bounds_);
}

Image Preprocessor::load(const ManifestRecord& record) const {
  return resize(load_image(record.path), config_.input_size());
}

Image Preprocessor::prepare(const Image& resized, std::optional<GeoUV> uv, bool augment,
                            SeededRng& policy_rng) const {
  Image img = augment ? apply_policy(resized, policy_, policy_rng) : resized;
  if (config_.geo == GeoMode::kBars) img = embed_geo_bars(img, *uv, config_.bar_px);
  return normalize(img, stats_);
}

void require_coordinates(const std::vector<const ManifestRecord*>& records) {
  std::vector<std::string> missing;
  for (const auto* r : records) {
    if (!r->coord) missing.push_back(r->relative_path);
  }
  if (missing.empty()) return;
  std::string msg = std::to_string(missing.size()) + " record(s) lack coordinates:";
  for (std::size_t i = 0; i < missing.size() && i < 10; ++i) msg += " " + missing[i];
  if (missing.size() > 10) msg += " ...";
  throw DataError(msg);
}

namespace {

// Resized images of one split, cached when they fit the budget.
class SplitImages {
 public:
  SplitImages(std::vector<const ManifestRecord*> records, const Preprocessor& pre, std::size_t side)
      : records_(std::move(records)), pre_(pre) {
    const std::size_t bytes = records_.size() * side * side * 3 * sizeof(double);
    if (bytes <= kCacheBudgetBytes) {
      for (const auto* r : records_) cache_.push_back(pre_.load(*r));
    }
  }

  std::size_t size() const { return records_.size(); }
  const ManifestRecord& record(std::size_t i) const { return *records_[i]; }
  Image image(std::size_t i) const { return cache_.empty() ? pre_.load(*records_[i]) : cache_[i]; }
  const std::vector<const ManifestRecord*>& records() const { return records_; }

 private:
  std::vector<const ManifestRecord*> records_;
  const Preprocessor& pre_;
  std::vector<Image> cache_;
};

struct SplitScore {
  double loss = 0.0;
  double accuracy = 0.0;
};

SplitScore score(const Model& model, const SplitImages& split, const Preprocessor& pre) {
  SeededRng unused(0);
  double loss = 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < split.size(); ++i) {
    const auto uv = pre.coordinates(split.record(i));
    const Image x = pre.prepare(split.image(i), uv, false, unused);
    const Tensor z = model.logits(x, model.takes_coordinates() ? uv : std::nullopt);
    loss += ops::cross_entropy(z, split.record(i).label);
    correct += ops::argmax(z.values()) == split.record(i).label ? 1 : 0;
  }
  const double n = static_cast<double>(split.size());
  return {loss / n, static_cast<double>(correct) / n};
}

std::optional<GeoNormalizer> fit_bounds(const TrainConfig& config, const std::vector<const ManifestRecord*>& train) {
  if (config.geo == GeoMode::kNone) return std::nullopt;
  require_coordinates(train);
  std::vector<GeoCoordinate> coords;
  for (const auto* r : train) coords.push_back(*r->coord);
  return GeoNormalizer::fit(coords);
}

}  // namespace

TrainResult train(const TrainConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  const DatasetManifest manifest = scan(config.root);
  const auto train_records = manifest.split(Split::kTrain);
  const auto val_records = manifest.split(Split::kValidation);
  if (train_records.empty()) throw DataError("no training images under " + config.root.string());
  if (val_records.empty()) throw DataError("no validation images under " + config.root.string());
  if (config.geo != GeoMode::kNone) require_coordinates(val_records);

  Checkpoint ck;
  ck.config = config;
  ck.stats = channel_stats(manifest, Split::kTrain);
  ck.geo_bounds = fit_bounds(config, train_records);
  ck.model = Model::init(config);

  const Preprocessor pre(config, ck.stats, ck.geo_bounds);
  const SplitImages train_images(train_records, pre, config.input_size());
  const SplitImages val_images(val_records, pre, config.input_size());
  const bool coords_to_model = ck.model.takes_coordinates();

  TrainResult result;
  const SplitScore initial = score(ck.model, val_images, pre);
  result.initial_val_loss = initial.loss;
  result.initial_val_acc = initial.accuracy;
  result.best = ck;

  auto named = ck.model.parameters();
  std::vector<Tensor*> params;
  std::vector<std::vector<double>> grads;
  for (auto& [name, t] : named) {
    params.push_back(t);
    grads.emplace_back(t->size(), 0.0);
  }
  std::vector<std::span<const double>> grad_views(grads.begin(), grads.end());
  AdamWState adam;
  const AdamWOptions adam_options{config.learning_rate, 0.9, 0.999, 1e-8, config.weight_decay};

  std::vector<std::size_t> order(train_images.size());
  const std::size_t n = order.size();
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    SeededRng shuffle_rng(derive_seed(config.seed, kShuffleStream, epoch));
    shuffle_rng.shuffle(order);
    const std::uint64_t epoch_seed = derive_seed(config.seed, kAugmentStream, epoch);

    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0, step = 0; start < n; start += config.batch_size, ++step) {
      const std::size_t end = std::min(n, start + config.batch_size);
      const double weight = 1.0 / static_cast<double>(end - start);
      for (auto& g : grads) std::fill(g.begin(), g.end(), 0.0);
      double batch_loss = 0.0;
      for (std::size_t pos = start; pos < end; ++pos) {
        const std::size_t idx = order[pos];
        const ManifestRecord& rec = train_images.record(idx);
        SeededRng policy_rng(derive_seed(epoch_seed, pos));
        const auto uv = pre.coordinates(rec);
        const Image x = pre.prepare(train_images.image(idx), uv, true, policy_rng);
        std::size_t predicted = 0;
        batch_loss += ck.model.loss_and_gradient(x, rec.label, coords_to_model ? uv : std::nullopt, grads,
                                                 weight, &predicted);
        correct += predicted == rec.label ? 1 : 0;
      }
      if (!std::isfinite(batch_loss)) {
        throw IterationError("non-finite training loss at epoch " + std::to_string(epoch) + ", step " +
                             std::to_string(step));
      }
      loss_sum += batch_loss;
      if (config.optimizer == OptimizerKind::kAdamW) {
        adamw_step(params, grad_views, adam, adam_options);
      } else {
        sgd_step(params, grad_views, config.learning_rate);
      }
    }

    const SplitScore val = score(ck.model, val_images, pre);
    if (!std::isfinite(val.loss)) {
      throw IterationError("non-finite validation loss at epoch " + std::to_string(epoch));
    }
    const HistoryRow row{epoch, loss_sum / static_cast<double>(n), static_cast<double>(correct) / static_cast<double>(n),
                         val.loss, val.accuracy};
    result.history.push_back(row);
    ck.epoch = epoch;
    if (epoch == 1 || val.loss < result.best.history.back().val_loss) {
      result.best = ck;
      result.best.history = result.history;
    }
    if (on_epoch) on_epoch(row);
  }
  ck.history = result.history;
  result.last = std::move(ck);
  result.best.history = result.history;
  return result;
}

std::string history_to_csv(const std::vector<HistoryRow>& history) {
  std::string out = "epoch,train_loss,val_loss,val_acc\n";
  for (const auto& r : history) {
    out += std::to_string(r.epoch) + "," + format_double(r.train_loss) + "," + format_double(r.val_loss) + "," +
           format_double(r.val_acc) + "\n";
  }
  return out;
}

void write_training_outputs(const std::filesystem::path& dir, const TrainResult& result) {
  std::filesystem::create_directories(dir);
  save_checkpoint(dir / "best.ckpt", result.best);
  save_checkpoint(dir / "last.ckpt", result.last);
  write_text_file(dir / "history.csv", history_to_csv(result.history));
  KeyValues summary = result.last.config.to_kv();
  summary["best_epoch"] = std::to_string(result.best.epoch);
  summary["initial_val_loss"] = format_double(result.initial_val_loss);
  summary["initial_val_acc"] = format_double(result.initial_val_acc);
  write_kv_file(dir / "config.txt", summary);
}

EvalOutput evaluate(const Checkpoint& checkpoint, const DatasetManifest& manifest, Split split) {
  const auto records = manifest.split(split);
  if (records.empty()) {
    throw ContractError("evaluate: split '" + std::string(split_name(split)) + "' is empty");
  }
  const TrainConfig& config = checkpoint.config;
  if (config.geo != GeoMode::kNone) require_coordinates(records);
  const Preprocessor pre(config, checkpoint.stats, checkpoint.geo_bounds);
  const Model& model = checkpoint.model;
  const std::size_t k = model.num_classes();

  EvalOutput out;
  out.class_names = class_names();
  if (out.class_names.size() != k) {
    throw ConfigError("evaluate: model has " + std::to_string(k) + " classes, dataset has " +
                      std::to_string(out.class_names.size()));
  }
  SeededRng unused(0);
  double loss = 0.0;
  for (const auto* r : records) {
    const auto uv = pre.coordinates(*r);
    const Image x = pre.prepare(pre.load(*r), uv, false, unused);
    const Tensor z = model.logits(x, model.takes_coordinates() ? uv : std::nullopt);
    loss += ops::cross_entropy(z, r->label);
    out.paths.push_back(r->relative_path);
    out.labels.push_back(r->label);
    out.predictions.push_back(ops::argmax(z.values()));
    out.logits.insert(out.logits.end(), z.values().begin(), z.values().end());
  }
  out.mean_loss = loss / static_cast<double>(records.size());
  out.probabilities = metrics::logits_to_probs(out.logits);
  out.confusion = metrics::confusion(out.predictions, out.labels, k);
  out.report = metrics::build_report(out.predictions, out.labels, out.probabilities, out.class_names);
  return out;
}

std::string eval_table_to_csv(const EvalOutput& o) {
  std::string out = "path,label,prediction";
  for (const auto& c : o.class_names) out += ",logit_" + c;
  for (const auto& c : o.class_names) out += ",prob_" + c;
  out += "\n";
  const std::size_t k = o.class_names.size();
  for (std::size_t i = 0; i < o.labels.size(); ++i) {
    out += o.paths[i] + "," + std::to_string(o.labels[i]) + "," + std::to_string(o.predictions[i]);
    for (std::size_t c = 0; c < k; ++c) out += "," + format_double(o.logits[i * k + c]);
    for (std::size_t c = 0; c < k; ++c) out += "," + format_double(o.probabilities[i * k + c]);
    out += "\n";
  }
  return out;
}

void write_eval_outputs(const std::filesystem::path& dir, const EvalOutput& o) {
  std::filesystem::create_directories(dir);
  KeyValues kv = metrics::report_to_kv(o.report);
  kv["mean_loss"] = format_double(o.mean_loss);
  write_kv_file(dir / "report.txt", kv);
  write_text_file(dir / "confusion.csv", metrics::confusion_to_csv(o.confusion, o.class_names));
  write_text_file(dir / "confusion_normalized.csv", metrics::normalized_confusion_to_csv(o.confusion, o.class_names));
  write_text_file(dir / "probabilities.csv", eval_table_to_csv(o));
}

}  // namespace forestvit
