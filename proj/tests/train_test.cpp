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

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "forestvit/checkpoint.hpp"
#include "forestvit/config.hpp"
#include "forestvit/errors.hpp"
#include "forestvit/kv.hpp"
#include "forestvit/optim.hpp"
#include "forestvit/toy_data.hpp"
#include "forestvit/train.hpp"
#include "test_util.hpp"

namespace forestvit {
namespace {

namespace fs = std::filesystem;

fs::path toy_root(const std::string& name, std::size_t train_per_class, std::size_t val_per_class) {
  const fs::path root = testing::temp_dir(name);
  ToyDatasetOptions o;
  o.train_per_class = train_per_class;
  o.validation_per_class = val_per_class;
  o.test_per_class = 2;
  write_toy_dataset(root, o);
  return root;
}

TrainConfig toy_config(const fs::path& root, std::size_t epochs) {
  TrainConfig c;
  c.vit = VitConfig::toy();
  c.root = root;
  c.epochs = epochs;
  c.batch_size = 8;
  c.bar_px = 4;
  return c;
}

TEST(AdamW, ZeroGradientKeepsParams) {
  Tensor w = Tensor::vector({0.3, -1.2, 2.0});
  const Tensor before = w;
  const std::vector<double> g(3, 0.0);
  Tensor* params[] = {&w};
  const std::span<const double> grads[] = {g};
  AdamWState state;
  for (int i = 0; i < 5; ++i) adamw_step(params, grads, state, AdamWOptions{});
  EXPECT_EQ(w, before);
  EXPECT_EQ(state.step, 5u);
}

TEST(AdamW, FirstStepIsSignOfGradient) {
  Tensor w = Tensor::vector({0.0, 1.0, -1.0, 5.0});
  const Tensor before = w;
  const std::vector<double> g = {0.5, -3.0, 1e-3, -20.0};
  Tensor* params[] = {&w};
  const std::span<const double> grads[] = {g};
  AdamWState state;
  AdamWOptions o;
  o.learning_rate = 0.01;
  adamw_step(params, grads, state, o);
  for (std::size_t i = 0; i < 4; ++i) {
    const double expected = -o.learning_rate * g[i] / (std::abs(g[i]) + o.epsilon);
    EXPECT_NEAR(w[i] - before[i], expected, 1e-15);
    EXPECT_NEAR(w[i] - before[i], -0.01 * (g[i] > 0 ? 1 : -1), 1e-7);
  }
}

TEST(AdamW, ConvergesOnQuadratic) {
  Tensor w = Tensor::vector({1.0});
  AdamWState state;
  AdamWOptions o;
  o.learning_rate = 0.1;
  for (int i = 0; i < 100; ++i) {
    const std::vector<double> g = {2.0 * w[0]};
    Tensor* params[] = {&w};
    const std::span<const double> grads[] = {g};
    adamw_step(params, grads, state, o);
  }
  EXPECT_LT(std::abs(w[0]), 0.1);
}

TEST(AdamW, DecoupledWeightDecay) {
  Tensor w = Tensor::vector({2.0});
  const std::vector<double> g = {0.0};
  Tensor* params[] = {&w};
  const std::span<const double> grads[] = {g};
  AdamWState state;
  AdamWOptions o;
  o.learning_rate = 0.1;
  o.weight_decay = 0.5;
  adamw_step(params, grads, state, o);
  EXPECT_NEAR(w[0], 2.0 - 0.1 * 0.5 * 2.0, 1e-15);
}

TEST(Sgd, PlainStep) {
  Tensor w = Tensor::vector({1.0, 2.0});
  const std::vector<double> g = {0.5, -1.0};
  Tensor* params[] = {&w};
  const std::span<const double> grads[] = {g};
  sgd_step(params, grads, 0.1);
  EXPECT_EQ(w, Tensor::vector({0.95, 2.1}));
}

TEST(TrainConfig, DefaultsAndRoundTrip) {
  TrainConfig c;
  EXPECT_EQ(c.batch_size, 32u);
  EXPECT_EQ(c.learning_rate, 5e-5);
  EXPECT_EQ(c.epochs, 150u);
  EXPECT_EQ(c.optimizer, OptimizerKind::kAdamW);
  c.model = ModelKind::kLr;
  c.geo = GeoMode::kHeadConcat;
  c.augment = "flip";
  c.seed = 17;
  c.root = "/data/x";
  const TrainConfig back = TrainConfig::from_kv(c.to_kv());
  EXPECT_EQ(back.to_kv(), c.to_kv());
  EXPECT_EQ(c.to_kv(false).count("root"), 0u);
  EXPECT_THROW(TrainConfig::from_kv(KeyValues{{"batchsize", "3"}}), ConfigError);
  EXPECT_THROW(TrainConfig::from_kv(KeyValues{{"batch_size", "0"}}).validate(), ConfigError);
  EXPECT_THROW(TrainConfig::from_kv(KeyValues{{"learning_rate", "0"}}).validate(), ConfigError);
  EXPECT_THROW(TrainConfig::from_kv(KeyValues{{"augment", "spin"}}).validate(), ConfigError);
}

TEST(Checkpoint, RoundTripIsByteIdentical) {
  TrainConfig c;
  c.vit = VitConfig::toy();
  c.geo = GeoMode::kHeadConcat;
  Checkpoint ck{c, 3, Model::init(c), ChannelStats{{0.1, 0.2, 0.3}, {0.4, 0.5, 0.6}},
                GeoNormalizer{-8, 4, 95, 141}, {{1, 0.9, 0.4, 1.1, 0.3}, {2, 0.7, 0.6, 0.95, 0.45}}};
  const std::string bytes = encode_checkpoint(ck);
  EXPECT_EQ(bytes.substr(0, 4), "PWCK");
  const Checkpoint back = decode_checkpoint(bytes);
  EXPECT_EQ(encode_checkpoint(back), bytes);
  EXPECT_EQ(back.epoch, 3u);
  EXPECT_EQ(back.history, ck.history);
  EXPECT_EQ(back.geo_bounds, ck.geo_bounds);
  EXPECT_EQ(back.stats, ck.stats);

  const fs::path dir = testing::temp_dir("ckpt");
  save_checkpoint(dir / "a.ckpt", ck);
  save_checkpoint(dir / "b.ckpt", load_checkpoint(dir / "a.ckpt"));
  EXPECT_EQ(read_text_file(dir / "a.ckpt"), read_text_file(dir / "b.ckpt"));
}

TEST(Checkpoint, CorruptInputRaisesFormatError) {
  TrainConfig c;
  c.model = ModelKind::kLr;
  c.vit = VitConfig::toy();
  const std::string bytes = encode_checkpoint(Checkpoint{c, 0, Model::init(c), {}, {}, {}});
  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(decode_checkpoint(bad_magic), FormatError);
  std::string bad_version = bytes;
  bad_version[4] = 9;
  EXPECT_THROW(decode_checkpoint(bad_version), FormatError);
  EXPECT_THROW(decode_checkpoint(bytes.substr(0, bytes.size() - 3)), FormatError);
  EXPECT_THROW(decode_checkpoint(bytes + "x"), FormatError);
}

TEST(Train, ZeroEpochsReturnsInitialModel) {
  const fs::path root = toy_root("train_zero", 4, 2);
  TrainConfig c = toy_config(root, 0);
  const TrainResult r = train(c);
  EXPECT_TRUE(r.history.empty());
  EXPECT_EQ(r.best.epoch, 0u);
  TrainConfig init_cfg = c;
  Model init = Model::init(init_cfg);
  Model best = r.best.model;
  const auto a = init.parameters(), b = best.parameters();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(*a[i].second, *b[i].second) << a[i].first;
}

TEST(Train, SelectionDeterminismAndOutputs) {
  const fs::path root = toy_root("train_select", 8, 4);
  const TrainConfig c = toy_config(root, 4);
  std::vector<HistoryRow> seen;
  const TrainResult r = train(c, [&](const HistoryRow& row) { seen.push_back(row); });
  ASSERT_EQ(r.history.size(), 4u);
  EXPECT_EQ(seen, r.history);
  for (std::size_t i = 0; i < r.history.size(); ++i) EXPECT_EQ(r.history[i].epoch, i + 1);

  std::size_t best = 0;
  for (std::size_t i = 1; i < r.history.size(); ++i) {
    if (r.history[i].val_loss < r.history[best].val_loss) best = i;
  }
  EXPECT_EQ(r.best.epoch, r.history[best].epoch);
  for (const auto& row : r.history) EXPECT_LE(r.history[best].val_loss, row.val_loss);
  EXPECT_LE(r.history[best].val_loss, r.initial_val_loss);
  EXPECT_EQ(r.last.epoch, 4u);

  // The selected checkpoint reproduces its recorded validation loss.
  const EvalOutput ev = evaluate(r.best, scan(root), Split::kValidation);
  EXPECT_NEAR(ev.mean_loss, r.history[best].val_loss, 1e-12);
  EXPECT_NEAR(ev.report.accuracy, r.history[best].val_acc, 1e-12);

  const TrainResult again = train(c);
  EXPECT_EQ(encode_checkpoint(again.best), encode_checkpoint(r.best));
  EXPECT_EQ(encode_checkpoint(again.last), encode_checkpoint(r.last));

  const fs::path out = testing::temp_dir("train_select_out");
  write_training_outputs(out, r);
  for (const char* f : {"best.ckpt", "last.ckpt", "history.csv", "config.txt"}) EXPECT_TRUE(fs::exists(out / f)) << f;
  const std::string csv = read_text_file(out / "history.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "epoch,train_loss,val_loss,val_acc");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
  const KeyValues summary = read_kv_file(out / "config.txt");
  EXPECT_EQ(summary.at("best_epoch"), std::to_string(r.best.epoch));
}

TEST(Train, EmptySplitsAreDataErrors) {
  const fs::path root = testing::temp_dir("train_empty");
  ToyDatasetOptions o;
  o.train_per_class = 2;
  o.validation_per_class = 0;
  write_toy_dataset(root, o);
  EXPECT_THROW(train(toy_config(root, 1)), DataError);
  EXPECT_THROW(train(toy_config(testing::temp_dir("train_none"), 1)), DataError);
}

TEST(Evaluate, MemorizedTrainSplitAndSelfConsistency) {
  const fs::path root = toy_root("eval_memorize", 20, 5);
  TrainConfig c = toy_config(root, 30);
  c.model = ModelKind::kLr;
  c.optimizer = OptimizerKind::kSgd;
  c.learning_rate = 0.01;
  const TrainResult r = train(c);
  const DatasetManifest m = scan(root);
  const EvalOutput ev = evaluate(r.last, m, Split::kTrain);
  EXPECT_EQ(ev.report.accuracy, 1.0);

  // Recompute the report from the emitted per-sample table.
  const fs::path out = testing::temp_dir("eval_memorize_out");
  write_eval_outputs(out, ev);
  std::istringstream table(read_text_file(out / "probabilities.csv"));
  std::string line;
  std::getline(table, line);
  EXPECT_EQ(line,
            "path,label,prediction,logit_grassland_shrubland,logit_other,logit_plantation,"
            "logit_smallholder_agriculture,prob_grassland_shrubland,prob_other,prob_plantation,"
            "prob_smallholder_agriculture");
  std::vector<std::size_t> labels, preds;
  std::vector<double> probs;
  while (std::getline(table, line)) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string x; std::getline(ss, x, ',');) f.push_back(x);
    ASSERT_EQ(f.size(), 11u);
    labels.push_back(std::stoul(f[1]));
    preds.push_back(std::stoul(f[2]));
    for (std::size_t k = 7; k < 11; ++k) probs.push_back(std::stod(f[k]));
  }
  const KeyValues recomputed = metrics::report_to_kv(metrics::build_report(preds, labels, probs, class_names()));
  const KeyValues written = read_kv_file(out / "report.txt");
  for (const auto& [key, value] : recomputed) {
    ASSERT_TRUE(written.count(key)) << key;
    if (key == "skipped_ranking_classes") {
      EXPECT_EQ(written.at(key), value);
    } else {
      EXPECT_NEAR(std::stod(written.at(key)), std::stod(value), 1e-12) << key;
    }
  }
  for (const char* f : {"confusion.csv", "confusion_normalized.csv"}) EXPECT_TRUE(fs::exists(out / f));

  // Evaluation is a deterministic pass.
  const EvalOutput twice = evaluate(r.last, m, Split::kTrain);
  EXPECT_EQ(twice.logits, ev.logits);

  DatasetManifest empty = m;
  empty.records.clear();
  EXPECT_THROW(evaluate(r.last, empty, Split::kTest), ContractError);
}

TEST(Evaluate, GeoBarsUsePersistedNormalizer) {
  const fs::path root = toy_root("eval_geo", 4, 2);
  TrainConfig c = toy_config(root, 1);
  c.geo = GeoMode::kBars;
  const TrainResult r = train(c);
  const DatasetManifest m = scan(root);
  std::vector<GeoCoordinate> train_coords;
  for (const auto* rec : m.split(Split::kTrain)) train_coords.push_back(*rec->coord);
  ASSERT_TRUE(r.best.geo_bounds.has_value());
  EXPECT_EQ(*r.best.geo_bounds, GeoNormalizer::fit(train_coords));

  const fs::path dir = testing::temp_dir("eval_geo_ckpt");
  save_checkpoint(dir / "best.ckpt", r.best);
  const Checkpoint loaded = load_checkpoint(dir / "best.ckpt");
  EXPECT_EQ(loaded.geo_bounds, r.best.geo_bounds);
  EXPECT_EQ(evaluate(loaded, m, Split::kValidation).logits, evaluate(r.best, m, Split::kValidation).logits);

  // The preprocessed validation image carries the training-split bars.
  const Preprocessor pre(loaded.config, loaded.stats, loaded.geo_bounds);
  const ManifestRecord& rec = *m.split(Split::kValidation)[0];
  const GeoUV uv = normalize_coord(*rec.coord, *loaded.geo_bounds);
  SeededRng unused(0);
  const Image x = denormalize(pre.prepare(pre.load(rec), pre.coordinates(rec), false, unused), loaded.stats);
  EXPECT_NEAR(x.at(31, 0, 0), uv.u, 1e-12);
  EXPECT_NEAR(x.at(0, 31, 1), uv.v, 1e-12);

  DatasetManifest missing = m;
  missing.records[0].coord.reset();
  EXPECT_THROW(evaluate(loaded, missing, Split::kTrain), DataError);
}

}  // namespace
}  // namespace forestvit
