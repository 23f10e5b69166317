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

// Command-line front end: dataset statistics, training, evaluation, t-SNE,
// augmentation previews, geo-bar rendering and split validation.
//
// Every option has a key=value name (the long flag with '-' replaced by '_').
// A --config file supplies values for those keys; flags given on the command
// line win. Exit codes: 0 success, 1 usage error, 2 data or runtime error.

#include <cstdio>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "forestvit/augment.hpp"
#include "forestvit/dataset.hpp"
#include "forestvit/errors.hpp"
#include "forestvit/geo.hpp"
#include "forestvit/kv.hpp"
#include "forestvit/png_io.hpp"
#include "forestvit/rng.hpp"
#include "forestvit/train.hpp"
#include "forestvit/tsne.hpp"

namespace fv = forestvit;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Options of one subcommand, collected as text under their config keys.
class Command {
 public:
  Command(CLI::App& parent, const std::string& name, const std::string& description)
      : app_(parent.add_subcommand(name, description)) {
    app_->add_option("--config", config_path_, "key=value file with option defaults");
    option("--seed", "random seed", "0");
  }

  CLI::App* app() const { return app_; }

  void option(const std::string& flag, const std::string& help, std::string default_value = {},
              const std::string& key = {}) {
    Slot& s = slot(flag, key, std::move(default_value));
    s.option = app_->add_option(flag, s.value, help);
  }

  void flag(const std::string& flag, const std::string& help, const std::string& key = {}) {
    Slot& s = slot(flag, key, {});
    s.is_flag = true;
    s.option = app_->add_flag(flag, s.flag_count, help);
  }

  // Config file values overlaid with the flags given on the command line.
  fv::KeyValues resolve() const {
    fv::KeyValues kv;
    if (!config_path_.empty()) kv = fv::read_kv_file(config_path_);
    for (const auto& [key, s] : slots_) {
      if (kv.count(key) == 0 && !s.default_value.empty()) kv[key] = s.default_value;
      if (s.is_flag ? s.flag_count > 0 : s.option->count() > 0) kv[key] = s.is_flag ? "true" : s.value;
    }
    for (const auto& [key, value] : kv) {
      if (slots_.count(key) == 0) throw UsageError("unknown key '" + key + "' for " + app_->get_name());
    }
    return kv;
  }

 private:
  struct Slot {
    std::string value;
    int flag_count = 0;
    bool is_flag = false;
    std::string default_value;
    CLI::Option* option = nullptr;
  };

  Slot& slot(const std::string& flag, std::string key, std::string default_value) {
    if (key.empty()) {
      key = flag.substr(2);
      for (char& c : key) {
        if (c == '-') c = '_';
      }
    }
    Slot& s = slots_[key];
    s.default_value = std::move(default_value);
    return s;
  }

  CLI::App* app_;
  std::string config_path_;
  std::map<std::string, Slot> slots_;
};

std::string require(const fv::KeyValues& kv, const std::string& key) {
  auto it = kv.find(key);
  if (it == kv.end() || it->second.empty()) throw UsageError("missing required option '" + key + "'");
  return it->second;
}

std::string get(const fv::KeyValues& kv, const std::string& key) {
  auto it = kv.find(key);
  return it == kv.end() ? std::string() : it->second;
}

bool has(const fv::KeyValues& kv, const std::string& key) { return !get(kv, key).empty(); }

fv::Split split_option(const fv::KeyValues& kv) {
  const std::string name = require(kv, "split");
  const auto s = fv::parse_split(name);
  if (!s) throw UsageError("split must be train, validation or test, got '" + name + "'");
  return *s;
}

int run_stats(const fv::KeyValues& kv) {
  const auto manifest = fv::scan(require(kv, "root"));
  const fv::ChannelStats stats = fv::channel_stats(manifest, split_option(kv));
  const std::string text = fv::format_kv(stats.to_kv());
  std::cout << text;
  if (has(kv, "output")) fv::write_text_file(get(kv, "output"), text);
  return 0;
}

int run_train(fv::KeyValues kv) {
  fv::TrainConfig config = fv::TrainConfig::from_kv(kv);
  if (config.root.empty()) throw UsageError("missing required option 'root'");
  if (config.output.empty()) throw UsageError("missing required option 'output'");
  const auto result = fv::train(config, [](const fv::HistoryRow& r) {
    std::printf("epoch %zu train_loss %.6f train_acc %.4f val_loss %.6f val_acc %.4f\n", r.epoch, r.train_loss,
                r.train_acc, r.val_loss, r.val_acc);
    std::fflush(stdout);
  });
  fv::write_training_outputs(config.output, result);
  std::printf("best_epoch %zu\n", result.best.epoch);
  return 0;
}

int run_eval(const fv::KeyValues& kv) {
  const fv::Checkpoint ck = fv::load_checkpoint(require(kv, "checkpoint"));
  const auto manifest = fv::scan(require(kv, "root"));
  const auto out = fv::evaluate(ck, manifest, split_option(kv));
  fv::write_eval_outputs(require(kv, "output"), out);
  std::printf("samples %zu accuracy %.6f macro_f1 %.6f\n", out.report.samples, out.report.accuracy,
              out.report.macro.f1);
  return 0;
}

int run_tsne(const fv::KeyValues& kv) {
  const auto manifest = fv::scan(require(kv, "root"));
  auto records = manifest.split(split_option(kv));
  const std::size_t limit = fv::parse_size(require(kv, "limit"), "limit");
  if (limit > 0 && records.size() > limit) records.resize(limit);
  if (records.size() < 3) throw fv::DataError("tsne needs at least 3 images");
  const std::size_t size = fv::parse_size(require(kv, "size"), "size");
  std::vector<double> values;
  std::vector<std::size_t> labels;
  for (const auto* r : records) {
    const auto flat = fv::flatten(fv::resize(fv::load_image(r->path), size));
    values.insert(values.end(), flat.begin(), flat.end());
    labels.push_back(r->label);
  }
  const fv::Tensor points(fv::Shape{records.size(), size * size * 3}, std::move(values));

  fv::tsne::TsneConfig config;
  config.perplexity = fv::parse_double(require(kv, "perplexity"), "perplexity");
  config.learning_rate = fv::parse_double(require(kv, "eta"), "eta");
  config.max_iters = fv::parse_size(require(kv, "iterations"), "iterations");
  config.early_exaggeration = has(kv, "exaggerate") && fv::parse_bool(get(kv, "exaggerate"), "exaggerate");
  config.seed = fv::parse_size(require(kv, "seed"), "seed");
  const auto result = fv::tsne::run_tsne(points, config);

  std::string csv = "index,y1,y2,label\n";
  for (std::size_t i = 0; i < records.size(); ++i) {
    csv += std::to_string(i) + "," + fv::format_double(result.embedding.at(i, 0)) + "," +
           fv::format_double(result.embedding.at(i, 1)) + "," + std::string(fv::kClassNames[labels[i]]) + "\n";
  }
  const std::string output = require(kv, "output");
  fv::write_text_file(output, csv);
  fv::KeyValues meta;
  meta["affinity"] = "gaussian, entropy matched to log2(perplexity), symmetrized (p_ij + p_ji) / 2n";
  meta["q_kernel"] = "student_t_1dof";
  meta["perplexity"] = fv::format_double(config.perplexity);
  meta["eta"] = fv::format_double(config.learning_rate);
  meta["iterations"] = std::to_string(config.max_iters);
  meta["momentum"] = "0.5 before iteration 250, 0.8 after";
  meta["early_exaggeration"] = config.early_exaggeration ? "4x for 100 iterations" : "off";
  meta["seed"] = std::to_string(config.seed);
  meta["initial_kl"] = fv::format_double(result.kl_trace.front());
  meta["final_kl"] = fv::format_double(result.kl_trace.back());
  meta["degenerate_rows"] = std::to_string(result.degenerate_rows.size());
  fv::write_kv_file(output + ".meta", meta);
  std::printf("points %zu initial_kl %.6f final_kl %.6f\n", records.size(), result.kl_trace.front(),
              result.kl_trace.back());
  return 0;
}

int run_augment_preview(const fv::KeyValues& kv) {
  const fv::Image image = fv::load_image(require(kv, "image"));
  fv::AugmentPolicy policy = fv::AugmentPolicy::preset(require(kv, "preset"));
  if (has(kv, "policy")) policy = fv::AugmentPolicy::from_kv(fv::read_kv_file(get(kv, "policy")));
  policy.validate();
  const std::size_t count = fv::parse_size(require(kv, "count"), "count");
  const std::uint64_t seed = fv::parse_size(require(kv, "seed"), "seed");
  const std::filesystem::path dir = require(kv, "output");
  std::filesystem::create_directories(dir);
  std::string log = "file,hflip,vflip,rot90,gray,jitter,perspective\n";
  for (std::size_t i = 0; i < count; ++i) {
    fv::SeededRng rng(fv::derive_seed(seed, i));
    fv::AugmentTrace t;
    const fv::Image out = fv::apply_policy(image, policy, rng, &t);
    char name[32];
    std::snprintf(name, sizeof name, "augment_%03zu.png", i);
    fv::save_image(dir / name, out);
    log += std::string(name) + "," + std::to_string(t.hflip) + "," + std::to_string(t.vflip) + "," +
           std::to_string(t.rot90) + "," + std::to_string(t.gray) + "," + std::to_string(t.jitter) + "," +
           std::to_string(t.perspective) + "\n";
  }
  fv::write_text_file(dir / "augmentations.csv", log);
  std::printf("wrote %zu variants to %s\n", count, dir.string().c_str());
  return 0;
}

fv::GeoNormalizer parse_bounds(const std::string& text) {
  std::vector<double> v;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find(',', start), text.size());
    v.push_back(fv::parse_double(text.substr(start, end - start), "bounds"));
    start = end + 1;
  }
  if (v.size() != 4) throw UsageError("bounds must be lat_min,lat_max,lon_min,lon_max");
  fv::GeoNormalizer n{v[0], v[1], v[2], v[3]};
  n.validate();
  return n;
}

int run_geo_embed(const fv::KeyValues& kv) {
  fv::Image image = fv::load_image(require(kv, "image"));
  const std::size_t size = fv::parse_size(require(kv, "size"), "size");
  if (size > 0) image = fv::resize(image, size);
  const fv::GeoCoordinate coord{fv::parse_double(require(kv, "latitude"), "latitude"),
                                fv::parse_double(require(kv, "longitude"), "longitude")};
  fv::validate(coord);
  fv::GeoNormalizer bounds;
  if (has(kv, "bounds")) {
    bounds = parse_bounds(get(kv, "bounds"));
  } else if (has(kv, "root")) {
    const auto manifest = fv::scan(get(kv, "root"));
    const auto train = manifest.split(fv::Split::kTrain);
    fv::require_coordinates(train);
    std::vector<fv::GeoCoordinate> coords;
    for (const auto* r : train) coords.push_back(*r->coord);
    bounds = fv::GeoNormalizer::fit(coords);
  } else {
    throw UsageError("geo-embed needs --bounds or --root");
  }
  const fv::GeoUV uv = fv::normalize_coord(coord, bounds);
  const std::size_t bar_px = fv::parse_size(require(kv, "bar_px"), "bar_px");
  fv::save_image(require(kv, "output"), fv::embed_geo_bars(image, uv, bar_px));
  std::printf("u %.17g v %.17g\n", uv.u, uv.v);
  return 0;
}

int run_validate(const fv::KeyValues& kv) {
  const auto manifest = fv::scan(require(kv, "root"));
  const fv::SplitReport report = fv::validate_splits(manifest);
  std::cout << report.to_text();
  std::cout << "matches_reference=" << (report.matches_reference ? "true" : "false") << "\n";
  const bool assert_reference = has(kv, "reference") && fv::parse_bool(get(kv, "reference"), "reference");
  if (assert_reference && !report.matches_reference) {
    std::cerr << "error: split counts differ from the reference 1615/473/668\n";
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deforestation-driver classification toolkit"};
  app.require_subcommand(1);

  Command stats(app, "stats", "per-channel mean and std of a split");
  stats.option("--root", "dataset root");
  stats.option("--split", "split to read", "train");
  stats.option("--output", "also write the stats to this key=value file");

  Command train(app, "train", "train a model and write checkpoints and history");
  train.option("--root", "dataset root");
  train.option("--output", "output directory");
  train.option("--model", "vit or lr");
  train.option("--augment", "augmentation preset: none, flip or augmented");
  train.option("--geo", "geo mode: none, bars or head_concat");
  train.option("--bar-px", "geo bar thickness in pixels");
  train.option("--batch-size", "minibatch size");
  train.option("--learning-rate", "optimizer learning rate");
  train.option("--epochs", "number of epochs");
  train.option("--optimizer", "adamw or sgd");
  train.option("--weight-decay", "decoupled weight decay");
  train.flag("--deterministic", "single-threaded bitwise-reproducible run");
  train.option("--image-size", "model input size", {}, "vit.image_size");
  train.option("--patch-size", "patch size", {}, "vit.patch_size");
  train.option("--embed-dim", "token width", {}, "vit.embed_dim");
  train.option("--num-heads", "attention heads", {}, "vit.num_heads");
  train.option("--depth", "encoder blocks", {}, "vit.depth");
  train.option("--mlp-ratio", "MLP hidden width over token width", {}, "vit.mlp_ratio");
  train.option("--num-classes", "number of classes", {}, "vit.num_classes");
  train.option("--eps", "LayerNorm epsilon", {}, "vit.eps");

  Command eval(app, "eval", "evaluate a checkpoint on a split and write reports");
  eval.option("--checkpoint", "checkpoint file");
  eval.option("--root", "dataset root");
  eval.option("--split", "split to evaluate", "test");
  eval.option("--output", "report directory");

  Command tsne(app, "tsne", "2-D t-SNE embedding of flattened images");
  tsne.option("--root", "dataset root");
  tsne.option("--split", "split to embed", "train");
  tsne.option("--size", "resize images to this side before flattening", "32");
  tsne.option("--limit", "use at most this many images (0 for all)", "0");
  tsne.option("--perplexity", "target perplexity", "30");
  tsne.option("--eta", "learning rate", "100");
  tsne.option("--iterations", "gradient steps", "1000");
  tsne.flag("--exaggerate", "early exaggeration (4x for 100 iterations)");
  tsne.option("--output", "CSV output path");

  Command preview(app, "augment-preview", "write augmented variants of one image");
  preview.option("--image", "input PNG");
  preview.option("--count", "number of variants", "8");
  preview.option("--preset", "policy preset", "augmented");
  preview.option("--policy", "key=value policy file (overrides the preset)");
  preview.option("--output", "output directory");

  Command geo(app, "geo-embed", "paint normalized coordinate bars into an image");
  geo.option("--image", "input PNG");
  geo.option("--latitude", "latitude in degrees");
  geo.option("--longitude", "longitude in degrees");
  geo.option("--bounds", "lat_min,lat_max,lon_min,lon_max");
  geo.option("--root", "fit bounds from this dataset's training split");
  geo.option("--size", "resize to this side first (0 keeps the input size)", "0");
  geo.option("--bar-px", "bar thickness in pixels", std::to_string(fv::kDefaultBarPx));
  geo.option("--output", "output PNG");

  Command validate(app, "validate", "report split and class counts");
  validate.option("--root", "dataset root");
  validate.flag("--reference", "fail unless the counts match the reference dataset");

  if (argc <= 1) {
    std::cerr << app.help();
    return 1;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (stats.app()->parsed()) return run_stats(stats.resolve());
    if (train.app()->parsed()) return run_train(train.resolve());
    if (eval.app()->parsed()) return run_eval(eval.resolve());
    if (tsne.app()->parsed()) return run_tsne(tsne.resolve());
    if (preview.app()->parsed()) return run_augment_preview(preview.resolve());
    if (geo.app()->parsed()) return run_geo_embed(geo.resolve());
    if (validate.app()->parsed()) return run_validate(validate.resolve());
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const fv::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
