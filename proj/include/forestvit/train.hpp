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
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "forestvit/augment.hpp"
#include "forestvit/checkpoint.hpp"
#include "forestvit/config.hpp"
#include "forestvit/dataset.hpp"
#include "forestvit/metrics.hpp"
#include "forestvit/rng.hpp"

namespace forestvit {

// Turns a manifest record into model input: load, resize to the model size,
// augment (training only), paint geo bars, normalize.
class Preprocessor {
 public:
  Preprocessor(const TrainConfig& config, ChannelStats stats, std::optional<GeoNormalizer> geo_bounds);

  // Normalized coordinates of a record, or nullopt when the geo mode is none.
  // Throws DataError when the mode needs a coordinate the record lacks.
  std::optional<GeoUV> coordinates(const ManifestRecord& record) const;

  // policy_rng is only consulted when augment is true.
  Image prepare(const Image& resized, std::optional<GeoUV> uv, bool augment, SeededRng& policy_rng) const;
  Image load(const ManifestRecord& record) const;

 private:
  TrainConfig config_;
  ChannelStats stats_;
  std::optional<GeoNormalizer> geo_bounds_;
  AugmentPolicy policy_;
};

// Throws DataError listing the records that lack coordinates.
void require_coordinates(const std::vector<const ManifestRecord*>& records);

struct TrainResult {
  Checkpoint best;  // minimum validation loss; ties keep the earlier epoch
  Checkpoint last;
  std::vector<HistoryRow> history;  // one row per epoch, epochs counted from 1
  double initial_val_loss = 0.0;
  double initial_val_acc = 0.0;
};

using EpochCallback = std::function<void(const HistoryRow&)>;

// Channel statistics and geo bounds come from the training split. Each epoch
// shuffles the training split with a seed derived from (seed, epoch), draws
// augmentation from a per-sample seed derived from (seed, epoch, position),
// takes minibatch steps on the mean cross-entropy and then scores the
// validation split without augmentation. Throws IterationError on a
// non-finite loss, naming the epoch and step.
TrainResult train(const TrainConfig& config, const EpochCallback& on_epoch = {});

// "epoch,train_loss,val_loss,val_acc" with 17 significant digits.
std::string history_to_csv(const std::vector<HistoryRow>& history);

// Writes best.ckpt, last.ckpt, history.csv and config.txt into dir.
void write_training_outputs(const std::filesystem::path& dir, const TrainResult& result);

struct EvalOutput {
  std::vector<std::string> class_names;
  std::vector<std::string> paths;  // relative to the dataset root
  std::vector<std::size_t> labels;
  std::vector<std::size_t> predictions;
  std::vector<double> logits;         // n x k
  std::vector<double> probabilities;  // n x k, sigmoid of the logits
  double mean_loss = 0.0;
  metrics::ConfusionMatrix confusion;
  metrics::EvalReport report;  // ranking metrics over the probabilities
};

// Deterministic single pass without augmentation, using the checkpoint's
// channel statistics and geo bounds. Throws ContractError for an empty split.
EvalOutput evaluate(const Checkpoint& checkpoint, const DatasetManifest& manifest, Split split);

// Header "path,label,prediction,logit_<class>...,prob_<class>...".
std::string eval_table_to_csv(const EvalOutput& output);

// Writes report.txt, confusion.csv, confusion_normalized.csv and
// probabilities.csv into dir.
void write_eval_outputs(const std::filesystem::path& dir, const EvalOutput& output);

}  // namespace forestvit
