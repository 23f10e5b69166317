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

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "forestvit/augment.hpp"
#include "forestvit/checkpoint.hpp"
#include "forestvit/dataset.hpp"
#include "forestvit/geo.hpp"
#include "forestvit/kv.hpp"
#include "forestvit/logistic.hpp"
#include "forestvit/metrics.hpp"
#include "forestvit/ops.hpp"
#include "forestvit/png_io.hpp"
#include "forestvit/toy_data.hpp"
#include "forestvit/train.hpp"
#include "forestvit/tsne.hpp"
#include "forestvit/vit.hpp"
#include "metric_oracles.hpp"
#include "test_util.hpp"

namespace forestvit {
namespace {

namespace fs = std::filesystem;
using testing::max_gradient_error;
using testing::random_image;
using testing::random_tensor;
using testing::relative_error;

// Thrown by check() so a criterion stops at its first violated condition.
struct CriterionFailure {
  std::string what;
};

void check(bool ok, const std::string& what) {
  if (!ok) throw CriterionFailure{what};
}

struct Outcome {
  std::string detail;
  double time_limit_s = 0.0;  // 0: no runtime bound
};

int g_failures = 0;

void run_criterion(const std::string& name, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  std::string status = "PASS", detail;
  try {
    const Outcome o = body();
    detail = o.detail;
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (o.time_limit_s > 0.0 && elapsed >= o.time_limit_s) {
      status = "FAIL";
      detail += "; runtime over the " + format_double(o.time_limit_s) + " s limit";
    }
  } catch (const CriterionFailure& f) {
    status = "FAIL";
    detail = f.what;
  } catch (const std::exception& e) {
    status = "FAIL";
    detail = std::string("exception: ") + e.what();
  }
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (status == "FAIL") ++g_failures;
  std::printf("%s %s (%.2f s): %s\n", status.c_str(), name.c_str(), elapsed, detail.c_str());
  std::fflush(stdout);
}

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

// ---------------------------------------------------------------- gradients

constexpr double kGradTol = 1e-4;

// Scalar readout sum(y W) with a constant W, so every output entry carries a
// distinct weight.
Var project(Tape& tape, Var y, const Tensor& w) { return ad::sum(ad::matmul(y, tape.constant(w))); }

using BindingLoss = std::function<Var(Tape&, const VitBinding&, std::optional<Var>)>;

// Central differences over every entry of every parameter tensor (and of x
// when given), against the tape's gradients.
double vit_gradient_error(const VitParams& params, const std::optional<Tensor>& x, const BindingLoss& f) {
  Tape tape;
  const VitBinding w = bind(tape, params);
  std::optional<Var> xv;
  if (x) xv = tape.leaf(*x);
  tape.backward(f(tape, w, xv));
  VitParams grads = params;
  collect_gradients(tape, w, grads);

  auto evaluate = [&](const VitParams& p, const std::optional<Tensor>& xx) {
    Tape t;
    t.set_grad_enabled(false);
    const VitBinding b = bind(t, p);
    std::optional<Var> v;
    if (xx) v = t.leaf(*xx);
    return f(t, b, v).value().item();
  };

  const double h = 1e-5;
  double worst = 0.0;
  VitParams probe = params;
  std::vector<Tensor*> probe_tensors;
  std::vector<const Tensor*> grad_tensors;
  visit_weights(probe, [&](const std::string&, Tensor& t) { probe_tensors.push_back(&t); });
  visit_weights(grads, [&](const std::string&, const Tensor& t) { grad_tensors.push_back(&t); });
  for (std::size_t k = 0; k < probe_tensors.size(); ++k) {
    Tensor& t = *probe_tensors[k];
    const auto g = grad_tensors[k]->grad();
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double orig = t[i];
      t[i] = orig + h;
      const double up = evaluate(probe, x);
      t[i] = orig - h;
      const double down = evaluate(probe, x);
      t[i] = orig;
      worst = std::max(worst, relative_error(g[i], (up - down) / (2 * h)));
    }
  }
  if (x) {
    const auto gx = tape.grad(*xv);
    Tensor xp = *x;
    for (std::size_t i = 0; i < xp.size(); ++i) {
      const double orig = xp[i];
      xp[i] = orig + h;
      const double up = evaluate(params, xp);
      xp[i] = orig - h;
      const double down = evaluate(params, xp);
      xp[i] = orig;
      worst = std::max(worst, relative_error(gx[i], (up - down) / (2 * h)));
    }
  }
  return worst;
}

VitConfig tiny_vit() {
  VitConfig c;
  c.image_size = 8;
  c.patch_size = 4;
  c.embed_dim = 8;
  c.num_heads = 2;
  c.depth = 1;
  c.mlp_ratio = 2.0;
  return c;
}

// Uniform entries so every path carries signal; LayerNorm gammas near 1.
VitParams perturbed_vit(const VitConfig& c, SeededRng& rng) {
  VitParams p = zero_vit(c);
  visit_weights(p, [&](const std::string& name, Tensor& t) {
    const bool gamma = name.find("gamma") != std::string::npos;
    for (double& v : t.values()) v = gamma ? rng.uniform(0.5, 1.5) : rng.uniform(-0.5, 0.5);
  });
  return p;
}

Tensor random_p(std::size_t n, SeededRng& rng) {
  Tensor p(Shape{n, n});
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = rng.uniform(0.01, 1.0);
      p.at(i, j) = p.at(j, i) = v;
      total += 2 * v;
    }
  }
  for (double& v : p.values()) v /= total;
  return p;
}

double lr_case(SeededRng& rng) {
  const std::size_t n = 1 + rng.below(6), f = 3 + rng.below(10);
  std::vector<std::vector<double>> x(n, std::vector<double>(f));
  for (auto& row : x) {
    for (double& v : row) v = rng.uniform(-1, 1);
  }
  std::vector<std::size_t> y(n);
  for (auto& v : y) v = rng.below(4);
  LrParams p{random_tensor({f, 4}, rng), random_tensor({4}, rng)};
  p.w.zero_grad();
  p.b.zero_grad();
  lr_loss_and_gradient(x, y, p);
  double worst = 0.0;
  for (Tensor* t : {&p.w, &p.b}) {
    const std::vector<double> g(t->grad().begin(), t->grad().end());
    for (std::size_t i = 0; i < t->size(); ++i) {
      const double orig = (*t)[i];
      (*t)[i] = orig + 1e-5;
      const double up = lr_mean_loss(x, y, p);
      (*t)[i] = orig - 1e-5;
      const double down = lr_mean_loss(x, y, p);
      (*t)[i] = orig;
      worst = std::max(worst, relative_error(g[i], (up - down) / 2e-5));
    }
  }
  return worst;
}

double tsne_case(SeededRng& rng) {
  const std::size_t n = 3 + rng.below(6);
  const Tensor p = random_p(n, rng);
  Tensor y = random_tensor({n, 2}, rng, -2, 2);
  const Tensor g = tsne::gradient(p, y);
  double worst = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double orig = y[i];
    y[i] = orig + 1e-5;
    const double up = tsne::kl(p, tsne::compute_q(y));
    y[i] = orig - 1e-5;
    const double down = tsne::kl(p, tsne::compute_q(y));
    y[i] = orig;
    worst = std::max(worst, relative_error(g[i], (up - down) / 2e-5));
  }
  return worst;
}

const char* const kFamilies[] = {"matmul",      "matmul_transposed", "add",         "add_bias",   "scale",
                                 "gelu",        "relu",              "sigmoid",     "softmax",    "layer_norm",
                                 "cross_entropy", "slice_cols",      "concat_cols", "concat_rows", "row",
                                 "sum_mean",    "attention",         "encoder_block", "vit_cross_entropy",
                                 "lr_loss",     "tsne_objective"};
constexpr std::size_t kFamilyCount = sizeof(kFamilies) / sizeof(kFamilies[0]);

double gradient_case(std::size_t family, SeededRng& rng) {
  const std::size_t r = 1 + rng.below(4), c = 2 + rng.below(4), k = 1 + rng.below(4);
  const Tensor a = random_tensor({r, c}, rng);
  const Tensor wc = random_tensor({c, 1}, rng);
  auto unary = [&](const std::function<Var(Var)>& op, const Tensor& x) {
    return max_gradient_error({x}, [&](Tape& t, const std::vector<Var>& v) { return project(t, op(v[0]), wc); });
  };
  switch (family) {
    case 0: {
      const Tensor b = random_tensor({c, k}, rng), wk = random_tensor({k, 1}, rng);
      return max_gradient_error({a, b}, [&](Tape& t, const std::vector<Var>& v) {
        return project(t, ad::matmul(v[0], v[1]), wk);
      });
    }
    case 1: {
      const Tensor b = random_tensor({k, c}, rng), wk = random_tensor({k, 1}, rng);
      return max_gradient_error({a, b}, [&](Tape& t, const std::vector<Var>& v) {
        return project(t, ad::matmul_transposed(v[0], v[1]), wk);
      });
    }
    case 2: {
      const Tensor b = random_tensor({r, c}, rng);
      return max_gradient_error({a, b}, [&](Tape& t, const std::vector<Var>& v) {
        return project(t, ad::add(v[0], v[1]), wc);
      });
    }
    case 3: {
      const Tensor bias = random_tensor({c}, rng);
      return max_gradient_error({a, bias}, [&](Tape& t, const std::vector<Var>& v) {
        return project(t, ad::add_bias(v[0], v[1]), wc);
      });
    }
    case 4: {
      const double s = rng.uniform(-3, 3);
      return unary([&](Var x) { return ad::scale(x, s); }, a);
    }
    case 5:
      return unary([](Var x) { return ad::gelu(x); }, random_tensor({r, c}, rng, -3, 3));
    case 6: {
      // Differences are taken at least 0.1 away from the kink at zero.
      Tensor x = a;
      for (double& v : x.values()) v += v >= 0 ? 0.1 : -0.1;
      return unary([](Var v) { return ad::relu(v); }, x);
    }
    case 7:
      return unary([](Var x) { return ad::sigmoid(x); }, random_tensor({r, c}, rng, -4, 4));
    case 8:
      return unary([](Var x) { return ad::softmax(x); }, random_tensor({r, c}, rng, -3, 3));
    case 9: {
      const Tensor gamma = random_tensor({c}, rng, 0.5, 1.5), beta = random_tensor({c}, rng);
      return max_gradient_error({a, gamma, beta}, [&](Tape& t, const std::vector<Var>& v) {
        return project(t, ad::layer_norm(v[0], v[1], v[2], 1e-6), wc);
      });
    }
    case 10: {
      const Tensor z = random_tensor({1, c}, rng, -3, 3);
      const std::size_t label = rng.below(c);
      return max_gradient_error({z}, [&](Tape&, const std::vector<Var>& v) { return ad::cross_entropy(v[0], label); });
    }
    case 11: {
      const std::size_t begin = rng.below(c), end = begin + 1 + rng.below(c - begin);
      const Tensor w = random_tensor({end - begin, 1}, rng);
      return max_gradient_error({a}, [&](Tape& t, const std::vector<Var>& v) {
        return project(t, ad::slice_cols(v[0], begin, end), w);
      });
    }
    case 12: {
      const Tensor b = random_tensor({r, k}, rng), w = random_tensor({c + k, 1}, rng);
      return max_gradient_error({a, b}, [&](Tape& t, const std::vector<Var>& v) {
        const Var parts[] = {v[0], v[1]};
        return project(t, ad::concat_cols(parts), w);
      });
    }
    case 13: {
      const Tensor b = random_tensor({k, c}, rng);
      return max_gradient_error({a, b}, [&](Tape& t, const std::vector<Var>& v) {
        const Var parts[] = {v[0], v[1]};
        return project(t, ad::concat_rows(parts), wc);
      });
    }
    case 14: {
      const std::size_t which = rng.below(r);
      return unary([&](Var x) { return ad::row(x, which); }, a);
    }
    case 15: {
      const Tensor b = random_tensor({r, c}, rng);
      return max_gradient_error({a, b}, [&](Tape&, const std::vector<Var>& v) {
        const Var s[] = {ad::sum(ad::gelu(v[0])), ad::sum(ad::sigmoid(v[1]))};
        return ad::mean(s);
      });
    }
    case 16: {
      const VitConfig cfg = tiny_vit();
      const VitParams p = perturbed_vit(cfg, rng);
      const Tensor x = random_tensor({cfg.num_tokens(), cfg.embed_dim}, rng, -1.5, 1.5);
      const Tensor w = random_tensor({cfg.embed_dim, 1}, rng);
      return vit_gradient_error(p, x, [&](Tape& t, const VitBinding& b, std::optional<Var> xv) {
        return project(t, attention(*xv, b.blocks[0], cfg.num_heads), w);
      });
    }
    case 17: {
      const VitConfig cfg = tiny_vit();
      const VitParams p = perturbed_vit(cfg, rng);
      const Tensor x = random_tensor({cfg.num_tokens(), cfg.embed_dim}, rng, -1.5, 1.5);
      const Tensor w = random_tensor({cfg.embed_dim, 1}, rng);
      return vit_gradient_error(p, x, [&](Tape& t, const VitBinding& b, std::optional<Var> xv) {
        return project(t, encoder_block(*xv, b.blocks[0], cfg), w);
      });
    }
    case 18: {
      VitConfig cfg = tiny_vit();
      const bool geo = rng.below(2) == 1;
      if (geo) cfg.head_extra_inputs = 2;
      const VitParams p = perturbed_vit(cfg, rng);
      const Image img = random_image(cfg.image_size, cfg.image_size, rng);
      const std::size_t label = rng.below(cfg.num_classes);
      const std::optional<GeoUV> uv = geo ? std::optional<GeoUV>(GeoUV{rng.uniform(), rng.uniform()}) : std::nullopt;
      return vit_gradient_error(p, std::nullopt, [&](Tape& t, const VitBinding& b, std::optional<Var>) {
        return ad::cross_entropy(forward(t, img, cfg, b, uv), label);
      });
    }
    case 19:
      return lr_case(rng);
    default:
      return tsne_case(rng);
  }
}

Outcome gradient_suite() {
  std::vector<double> worst(kFamilyCount, 0.0);
  std::vector<std::size_t> count(kFamilyCount, 0);
  for (std::size_t seed = 0; seed < 100; ++seed) {
    SeededRng rng(derive_seed(2024, seed, 0));
    const std::size_t family = seed % kFamilyCount;
    const double err = gradient_case(family, rng);
    worst[family] = std::max(worst[family], err);
    ++count[family];
    check(err < kGradTol, std::string("case ") + std::to_string(seed) + " (" + kFamilies[family] +
                              ") relative error " + fmt(err));
  }
  double overall = 0.0;
  std::size_t worst_family = 0;
  for (std::size_t f = 0; f < kFamilyCount; ++f) {
    if (worst[f] > overall) {
      overall = worst[f];
      worst_family = f;
    }
  }
  return {"100 cases over " + std::to_string(kFamilyCount) + " operation families, worst relative error " +
              fmt(overall) + " (" + kFamilies[worst_family] + ") < 1e-4",
          60.0};
}

// ----------------------------------------------------------- ranking oracle

Outcome ranking_oracle() {
  SeededRng rng(11);
  double worst = 0.0;
  std::size_t classes_checked = 0;
  for (int instance = 0; instance < 50; ++instance) {
    const std::size_t n = 1 + rng.below(200), k = 4;
    std::vector<std::size_t> labels(n);
    for (auto& y : labels) y = rng.below(k);
    const bool ties = instance % 2 == 1;
    std::vector<double> scores(n * k);
    for (double& s : scores) s = ties ? static_cast<double>(rng.below(8)) / 7.0 : rng.uniform();
    const auto roc = metrics::auroc_ovr(scores, labels, k);
    const auto pr = metrics::auprc_ovr(scores, labels, k);
    for (std::size_t c = 0; c < k; ++c) {
      std::vector<double> column(n);
      std::unique_ptr<bool[]> positive(new bool[n]);
      std::size_t pos = 0;
      for (std::size_t i = 0; i < n; ++i) {
        column[i] = scores[i * k + c];
        positive[i] = labels[i] == c;
        pos += positive[i];
      }
      const bool degenerate = pos == 0 || pos == n;
      check(degenerate != roc.per_class[c].has_value(), "skip convention violated at instance " +
                                                            std::to_string(instance));
      if (degenerate) continue;
      const std::span<const bool> ys(positive.get(), n);
      worst = std::max(worst, std::abs(*roc.per_class[c] - testing::brute_auroc(column, ys)));
      worst = std::max(worst, std::abs(*pr.per_class[c] - testing::brute_auprc(column, ys)));
      ++classes_checked;
    }
    check(worst <= 1e-12, "instance " + std::to_string(instance) + " deviates by " + fmt(worst));
  }
  return {"50 instances (n <= 200, k = 4), " + std::to_string(classes_checked) +
              " one-vs-rest columns, max deviation " + fmt(worst) + " <= 1e-12",
          10.0};
}

// ------------------------------------------------------------- augmentation

Outcome augmentation_algebra() {
  SeededRng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const Image x = random_image(9, 9, rng);
    check(hflip(hflip(x)) == x, "hflip is not an involution");
    check(vflip(vflip(x)) == x, "vflip is not an involution");
    check(rot90(rot90(rot90(rot90(x, 1), 1), 1), 1) == x, "four quarter turns are not the identity");
    check(rot90(x, 2) == hflip(vflip(x)), "rot90(x, 2) != hflip(vflip(x))");
    check(rot90(rot90(x, 1), 3) == x, "rot90 by 1 then 3 is not the identity");
    check(apply_policy(x, AugmentPolicy::none(), rng) == x, "zero policy changed the image");
  }

  const Image img = random_image(8, 8, rng);
  const AugmentPolicy policy = AugmentPolicy::augmented();
  const std::size_t draws = 10000;
  std::size_t h = 0, v = 0, r = 0, g = 0, p = 0;
  for (std::size_t i = 0; i < draws; ++i) {
    AugmentTrace t;
    apply_policy(img, policy, rng, &t);
    h += t.hflip;
    v += t.vflip;
    r += t.rot90 != 0;
    g += t.gray;
    p += t.perspective;
  }
  struct Stage {
    const char* name;
    std::size_t hits;
    double p;
  };
  const Stage stages[] = {{"hflip", h, policy.p_hflip},
                          {"vflip", v, policy.p_vflip},
                          {"rot90", r, policy.p_rot90},
                          {"gray", g, policy.p_gray},
                          {"perspective", p, policy.p_perspective}};
  std::string freq;
  for (const Stage& s : stages) {
    const double f = static_cast<double>(s.hits) / draws;
    check(std::abs(f - s.p) <= 0.02,
          std::string(s.name) + " applied in " + fmt(f) + " of draws, configured " + fmt(s.p));
    freq += std::string(freq.empty() ? "" : ", ") + s.name + " " + fmt(f, 3) + "/" + fmt(s.p, 3);
  }
  return {"flip/rotation identities pixel-exact, zero policy identity; frequencies over 10000 draws: " + freq, 0.0};
}

// -------------------------------------------------------------------- t-SNE

double max_distribution_violation(const Tensor& m) {
  double worst = 0.0, total = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    worst = std::max(worst, std::abs(m.at(i, i)));
    for (std::size_t j = 0; j < m.cols(); ++j) {
      worst = std::max(worst, std::abs(m.at(i, j) - m.at(j, i)));
      worst = std::max(worst, std::max(0.0, -m.at(i, j)));
      total += m.at(i, j);
    }
  }
  return std::max(worst, std::abs(total - 1.0));
}

Outcome tsne_criterion() {
  double grad_worst = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SeededRng rng(derive_seed(31, seed, 0));
    grad_worst = std::max(grad_worst, tsne_case(rng));
  }
  check(grad_worst < kGradTol, "gradient relative error " + fmt(grad_worst));

  SeededRng rng(0);
  const Tensor x = random_tensor({50, 20}, rng);
  tsne::TsneConfig c;
  c.perplexity = 10.0;
  c.learning_rate = 100.0;
  c.max_iters = 500;
  c.seed = 0;
  const tsne::Affinities a = tsne::compute_p(x, c.perplexity);
  const double p_violation = max_distribution_violation(a.p);
  check(p_violation <= 1e-9, "P invariants violated by " + fmt(p_violation));
  const tsne::TsneResult r = tsne::run_tsne(x, c);
  const double q_violation = max_distribution_violation(tsne::compute_q(r.embedding));
  check(q_violation <= 1e-9, "Q invariants violated by " + fmt(q_violation));
  const double initial = r.kl_trace.front(), final_kl = r.kl_trace.back();
  check(final_kl < initial, "final KL " + fmt(final_kl) + " not below initial " + fmt(initial));
  return {"gradient rel. error " + fmt(grad_worst) + "; KL " + fmt(initial) + " -> " + fmt(final_kl) +
              "; P/Q invariant residuals " + fmt(p_violation) + ", " + fmt(q_violation),
          30.0};
}

// --------------------------------------------------------- toy convergence

fs::path toy_dataset(const std::string& name, bool translated, std::uint64_t seed) {
  const fs::path root = testing::temp_dir(name);
  ToyDatasetOptions o;
  o.translated = translated;
  o.seed = seed;
  write_toy_dataset(root, o);
  return root;
}

TrainConfig toy_vit_config(const fs::path& root, std::uint64_t seed) {
  TrainConfig c;
  c.vit = VitConfig::toy();
  c.root = root;
  c.epochs = 30;
  c.seed = seed;
  return c;
}

// Kept for the protocol criterion, which reads the emitted files of a real
// convergence run.
fs::path g_protocol_run;

Outcome toy_convergence() {
  std::string detail;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const fs::path plain = toy_dataset("acceptance_toy_" + std::to_string(seed), false, seed);
    const TrainResult vit = train(toy_vit_config(plain, seed));
    const double train_acc = evaluate(vit.last, scan(plain), Split::kTrain).report.accuracy;
    if (seed == 0) {
      g_protocol_run = testing::temp_dir("acceptance_protocol_run");
      write_training_outputs(g_protocol_run, vit);
    }

    const fs::path shifted = toy_dataset("acceptance_toy_shifted_" + std::to_string(seed), true, seed);
    const DatasetManifest shifted_manifest = scan(shifted);
    const TrainResult vit_shift = train(toy_vit_config(shifted, seed));
    TrainConfig lr_cfg = toy_vit_config(shifted, seed);
    lr_cfg.model = ModelKind::kLr;
    lr_cfg.optimizer = OptimizerKind::kSgd;
    lr_cfg.learning_rate = 0.01;
    const TrainResult lr = train(lr_cfg);
    const double vit_val = evaluate(vit_shift.best, shifted_manifest, Split::kValidation).report.accuracy;
    const double lr_val = evaluate(lr.best, shifted_manifest, Split::kValidation).report.accuracy;

    detail += (detail.empty() ? "" : "; ") + std::string("seed ") + std::to_string(seed) + ": train acc " +
              fmt(train_acc, 3) + ", shifted val ViT " + fmt(vit_val, 3) + " vs LR " + fmt(lr_val, 3);
    check(train_acc >= 0.95, "seed " + std::to_string(seed) + " training accuracy " + fmt(train_acc));
    check(vit_val - lr_val >= 0.10 - 1e-12, "seed " + std::to_string(seed) + " ViT " + fmt(vit_val) +
                                                " does not beat LR " + fmt(lr_val) + " by 10 points");
  }
  return {detail, 600.0};
}

// ------------------------------------------------------- protocol fidelity

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(read_text_file(path));
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
    rows.push_back(fields);
  }
  return rows;
}

Outcome protocol_fidelity() {
  const TrainConfig defaults;
  check(defaults.batch_size == 32, "default batch size " + std::to_string(defaults.batch_size));
  check(defaults.learning_rate == 5e-5, "default learning rate " + fmt(defaults.learning_rate));
  check(!g_protocol_run.empty(), "no convergence run available");

  const auto rows = read_csv(g_protocol_run / "history.csv");
  check(!rows.empty() && rows[0] == std::vector<std::string>{"epoch", "train_loss", "val_loss", "val_acc"},
        "history header is not epoch,train_loss,val_loss,val_acc");
  std::size_t best_epoch = 0;
  double best_loss = INFINITY;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double loss = parse_double(rows[i][2], "val_loss");
    if (loss < best_loss) {
      best_loss = loss;
      best_epoch = parse_size(rows[i][0], "epoch");
    }
  }
  const Checkpoint best = load_checkpoint(g_protocol_run / "best.ckpt");
  const KeyValues summary = read_kv_file(g_protocol_run / "config.txt");
  check(best.epoch == best_epoch, "best checkpoint epoch " + std::to_string(best.epoch) +
                                      " but history minimum at epoch " + std::to_string(best_epoch));
  check(summary.at("best_epoch") == std::to_string(best_epoch), "config.txt best_epoch disagrees with history");
  return {"defaults batch 32 and lr 5e-5; history.csv has " + std::to_string(rows.size() - 1) +
              " rows with columns epoch,train_loss,val_loss,val_acc; best.ckpt epoch " + std::to_string(best.epoch) +
              " is the minimum validation loss " + fmt(best_loss, 6),
          0.0};
}

// ------------------------------------------------------------------ geo bars

Outcome geo_bars() {
  const fs::path dir = testing::temp_dir("acceptance_geo");
  SeededRng rng(41);
  const Image img = testing::random_image_8bit(64, 64, rng);
  const std::size_t bar = 8;
  struct Case {
    double u;
    std::uint8_t expected;
  };
  for (const Case& c : {Case{0.0, 0}, Case{1.0, 255}, Case{0.5, 128}}) {
    const Image painted = embed_geo_bars(img, {c.u, c.u}, bar);
    save_image(dir / "bars.png", painted);
    const Rgb8Image back = read_png(dir / "bars.png");
    const Rgb8Image original = to_rgb8(img);
    for (std::size_t y = 0; y < 64; ++y) {
      for (std::size_t x = 0; x < 64; ++x) {
        for (std::size_t ch = 0; ch < 3; ++ch) {
          const std::size_t i = (y * 64 + x) * 3 + ch;
          if (in_geo_bar(y, x, 64, 64, bar)) {
            check(back.pixels[i] == c.expected, "u=" + fmt(c.u) + " bar pixel exported as " +
                                                    std::to_string(back.pixels[i]));
          } else {
            check(painted.pixels[i] == img.pixels[i], "non-bar pixel changed");
            check(back.pixels[i] == original.pixels[i], "non-bar pixel changed on export");
          }
        }
      }
    }
  }

  VitConfig cfg = VitConfig::toy();
  cfg.head_extra_inputs = 2;
  const VitParams p = init_vit(cfg, 3);
  check(p.head_w.rows() == cfg.embed_dim + 2, "head input is not D+2");
  const Tensor z = forward(random_image(32, 32, rng), cfg, p, GeoUV{0.3, 0.6});
  check(z.size() == 4, "head-concat logits arity " + std::to_string(z.size()));
  return {"u=0/1/0.5 export as 0/255/128, non-bar pixels bit-identical; head concat reads D+2 = " +
              std::to_string(cfg.embed_dim + 2) + " inputs and yields 4 logits",
          0.0};
}

// -------------------------------------------------------- dataset validation

Outcome dataset_validation() {
  const fs::path root = testing::temp_dir("acceptance_validate");
  ToyDatasetOptions o;
  o.train_per_class = 5;
  o.validation_per_class = 3;
  o.test_per_class = 2;
  write_toy_dataset(root, o);
  const SplitReport fixture = validate_splits(scan(root));
  check(fixture.split_counts == std::array<std::size_t, 3>{20, 12, 8}, "fixture counts wrong:\n" + fixture.to_text());
  std::string detail = "fixture reports " + std::to_string(fixture.split_counts[0]) + "/" +
                       std::to_string(fixture.split_counts[1]) + "/" + std::to_string(fixture.split_counts[2]);

  const char* real = std::getenv("FORESTVIT_DATA_ROOT");
  if (real == nullptr || *real == '\0') return {detail + "; real-data check skipped (FORESTVIT_DATA_ROOT unset)", 0.0};
  const SplitReport r = validate_splits(scan(real));
  check(r.matches_reference, "real data counts " + std::to_string(r.split_counts[0]) + "/" +
                                 std::to_string(r.split_counts[1]) + "/" + std::to_string(r.split_counts[2]) +
                                 ", expected 1615/473/668");
  return {detail + "; real data reports 1615/473/668", 0.0};
}

// --------------------------------------------------------------- determinism

Outcome determinism() {
  const fs::path root = testing::temp_dir("acceptance_determinism");
  ToyDatasetOptions o;
  o.train_per_class = 10;
  o.validation_per_class = 4;
  o.translated = true;
  write_toy_dataset(root, o);
  TrainConfig c;
  c.vit = VitConfig::toy();
  c.root = root;
  c.epochs = 3;
  c.batch_size = 8;
  c.augment = "augmented";
  c.geo = GeoMode::kBars;
  c.bar_px = 4;
  c.deterministic = true;
  const TrainResult a = train(c), b = train(c);
  check(encode_checkpoint(a.best) == encode_checkpoint(b.best), "best checkpoints differ");
  check(encode_checkpoint(a.last) == encode_checkpoint(b.last), "last checkpoints differ");

  const fs::path dir = testing::temp_dir("acceptance_determinism_out");
  save_checkpoint(dir / "first.ckpt", a.last);
  save_checkpoint(dir / "second.ckpt", load_checkpoint(dir / "first.ckpt"));
  const std::string first = read_text_file(dir / "first.ckpt");
  check(first == read_text_file(dir / "second.ckpt"), "save -> load -> save is not byte-identical");
  return {"two augmented geo-bar runs give identical checkpoints; save/load/save of " + std::to_string(first.size()) +
              " bytes is byte-identical",
          0.0};
}

}  // namespace
}  // namespace forestvit

int main() {
  using namespace forestvit;
  run_criterion("gradient-suite", gradient_suite);
  run_criterion("ranking-oracle-equivalence", ranking_oracle);
  run_criterion("augmentation-algebra", augmentation_algebra);
  run_criterion("tsne", tsne_criterion);
  run_criterion("toy-training-convergence", toy_convergence);
  run_criterion("protocol-fidelity", protocol_fidelity);
  run_criterion("geo-bar-embedding", geo_bars);
  run_criterion("dataset-validation", dataset_validation);
  run_criterion("determinism", determinism);
  std::printf("%s: %d criterion failure(s)\n", g_failures == 0 ? "ALL PASS" : "FAILURES", g_failures);
  return g_failures == 0 ? 0 : 1;
}
