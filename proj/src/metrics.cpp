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

#include "forestvit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

#include "forestvit/errors.hpp"
#include "forestvit/ops.hpp"

namespace forestvit::metrics {

std::uint64_t ConfusionMatrix::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

std::uint64_t ConfusionMatrix::row_total(std::size_t t) const {
  std::uint64_t s = 0;
  for (std::size_t p = 0; p < num_classes; ++p) s += at(t, p);
  return s;
}

std::uint64_t ConfusionMatrix::column_total(std::size_t p) const {
  std::uint64_t s = 0;
  for (std::size_t t = 0; t < num_classes; ++t) s += at(t, p);
  return s;
}

std::vector<double> ConfusionMatrix::row_normalized() const {
  std::vector<double> out(counts.size(), 0.0);
  for (std::size_t t = 0; t < num_classes; ++t) {
    const std::uint64_t row = row_total(t);
    if (row == 0) continue;
    for (std::size_t p = 0; p < num_classes; ++p) {
      out[t * num_classes + p] = static_cast<double>(at(t, p)) / static_cast<double>(row);
    }
  }
  return out;
}

ConfusionMatrix confusion(std::span<const std::size_t> preds, std::span<const std::size_t> labels,
                          std::size_t k) {
  if (preds.size() != labels.size()) {
    throw ContractError("confusion: " + std::to_string(preds.size()) + " predictions vs " +
                        std::to_string(labels.size()) + " labels");
  }
  ConfusionMatrix cm(k);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] >= k || labels[i] >= k) {
      throw IndexError("confusion: class index out of range at sample " + std::to_string(i));
    }
    ++cm.at(labels[i], preds[i]);
  }
  return cm;
}

namespace {

double safe_ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

}  // namespace

PrfReport prf(const ConfusionMatrix& cm) {
  PrfReport r;
  const std::size_t k = cm.num_classes;
  for (std::size_t c = 0; c < k; ++c) {
    const double tp = static_cast<double>(cm.at(c, c));
    const double fp = static_cast<double>(cm.column_total(c)) - tp;
    const double fn = static_cast<double>(cm.row_total(c)) - tp;
    ClassPrf m;
    m.precision = safe_ratio(tp, tp + fp);
    m.recall = safe_ratio(tp, tp + fn);
    m.f1 = safe_ratio(2.0 * m.precision * m.recall, m.precision + m.recall);
    r.per_class.push_back(m);
    r.macro.precision += m.precision;
    r.macro.recall += m.recall;
    r.macro.f1 += m.f1;
  }
  if (k > 0) {
    r.macro.precision /= static_cast<double>(k);
    r.macro.recall /= static_cast<double>(k);
    r.macro.f1 /= static_cast<double>(k);
  }
  return r;
}

double accuracy(const ConfusionMatrix& cm) {
  const std::uint64_t total = cm.total();
  if (total == 0) throw ContractError("accuracy: empty confusion matrix");
  std::uint64_t trace = 0;
  for (std::size_t c = 0; c < cm.num_classes; ++c) trace += cm.at(c, c);
  return static_cast<double>(trace) / static_cast<double>(total);
}

namespace {

// Indices sorted by descending score.
std::vector<std::size_t> descending_order(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

void check_binary(std::span<const double> scores, std::span<const bool> positive, std::size_t& pos,
                  std::size_t& neg) {
  if (scores.size() != positive.size()) throw ContractError("ranking metric: scores/labels length mismatch");
  pos = static_cast<std::size_t>(std::count(positive.begin(), positive.end(), true));
  neg = positive.size() - pos;
  if (pos == 0 || neg == 0) throw ContractError("ranking metric: needs at least one positive and one negative");
}

}  // namespace

double binary_auroc(std::span<const double> scores, std::span<const bool> positive) {
  std::size_t pos = 0, neg = 0;
  check_binary(scores, positive, pos, neg);
  // Walk from the lowest score upwards, counting negatives strictly below.
  std::vector<std::size_t> order = descending_order(scores);
  std::reverse(order.begin(), order.end());
  double correct = 0.0;
  std::size_t negatives_below = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    std::size_t group_pos = 0, group_neg = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (positive[order[j]] ? group_pos : group_neg) += 1;
      ++j;
    }
    correct += static_cast<double>(group_pos * negatives_below) +
               0.5 * static_cast<double>(group_pos * group_neg);
    negatives_below += group_neg;
    i = j;
  }
  return correct / (static_cast<double>(pos) * static_cast<double>(neg));
}

double binary_auprc(std::span<const double> scores, std::span<const bool> positive) {
  std::size_t pos = 0, neg = 0;
  check_binary(scores, positive, pos, neg);
  const std::vector<std::size_t> order = descending_order(scores);
  double area = 0.0, prev_recall = 0.0;
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (positive[order[j]] ? tp : fp) += 1;
      ++j;
    }
    const double recall = static_cast<double>(tp) / static_cast<double>(pos);
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    area += (recall - prev_recall) * precision;
    prev_recall = recall;
    i = j;
  }
  return area;
}

namespace {

template <class Metric>
OvrReport one_vs_rest(std::span<const double> scores, std::span<const std::size_t> labels, std::size_t k,
                      Metric metric) {
  const std::size_t n = labels.size();
  if (scores.size() != n * k) {
    throw DimensionError("one-vs-rest: score table has " + std::to_string(scores.size()) + " entries for " +
                         std::to_string(n) + " samples x " + std::to_string(k) + " classes");
  }
  OvrReport r;
  r.per_class.resize(k);
  std::vector<double> column(n);
  std::unique_ptr<bool[]> positive(new bool[n]);
  double sum = 0.0;
  std::size_t used = 0;
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t pos = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (labels[i] >= k) throw IndexError("one-vs-rest: label out of range at sample " + std::to_string(i));
      column[i] = scores[i * k + c];
      positive[i] = labels[i] == c;
      pos += positive[i] ? 1 : 0;
    }
    if (pos == 0 || pos == n) {
      r.skipped.push_back(c);
      continue;
    }
    const double v = metric(std::span<const double>(column), std::span<const bool>(positive.get(), n));
    r.per_class[c] = v;
    sum += v;
    ++used;
  }
  if (used > 0) r.macro = sum / static_cast<double>(used);
  return r;
}

}  // namespace

OvrReport auroc_ovr(std::span<const double> scores, std::span<const std::size_t> labels, std::size_t k) {
  return one_vs_rest(scores, labels, k, binary_auroc);
}

OvrReport auprc_ovr(std::span<const double> scores, std::span<const std::size_t> labels, std::size_t k) {
  return one_vs_rest(scores, labels, k, binary_auprc);
}

std::vector<double> logits_to_probs(std::span<const double> logits) {
  std::vector<double> out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = ops::sigmoid(logits[i]);
  return out;
}

EvalReport build_report(std::span<const std::size_t> preds, std::span<const std::size_t> labels,
                        std::span<const double> scores, const std::vector<std::string>& class_names) {
  const std::size_t k = class_names.size();
  const ConfusionMatrix cm = confusion(preds, labels, k);
  const PrfReport p = prf(cm);
  const OvrReport roc = auroc_ovr(scores, labels, k);
  const OvrReport pr = auprc_ovr(scores, labels, k);
  EvalReport r;
  r.class_names = class_names;
  r.samples = labels.size();
  r.accuracy = accuracy(cm);
  for (std::size_t c = 0; c < k; ++c) {
    r.per_class.push_back(ClassMetrics{p.per_class[c].precision, p.per_class[c].recall, p.per_class[c].f1,
                                       roc.per_class[c], pr.per_class[c]});
  }
  r.macro = ClassMetrics{p.macro.precision, p.macro.recall, p.macro.f1, roc.macro, pr.macro};
  r.skipped_ranking_classes = roc.skipped;
  return r;
}

namespace {

std::string optional_value(const std::optional<double>& v) { return v ? format_double(*v) : "nan"; }

}  // namespace

KeyValues report_to_kv(const EvalReport& report) {
  KeyValues kv;
  kv["samples"] = std::to_string(report.samples);
  kv["accuracy"] = format_double(report.accuracy);
  kv["macro_precision"] = format_double(report.macro.precision);
  kv["macro_recall"] = format_double(report.macro.recall);
  kv["macro_f1"] = format_double(report.macro.f1);
  kv["macro_auroc"] = optional_value(report.macro.auroc);
  kv["macro_auprc"] = optional_value(report.macro.auprc);
  for (std::size_t c = 0; c < report.per_class.size(); ++c) {
    const std::string& name = report.class_names[c];
    const ClassMetrics& m = report.per_class[c];
    kv["precision_" + name] = format_double(m.precision);
    kv["recall_" + name] = format_double(m.recall);
    kv["f1_" + name] = format_double(m.f1);
    kv["auroc_" + name] = optional_value(m.auroc);
    kv["auprc_" + name] = optional_value(m.auprc);
  }
  std::string skipped;
  for (std::size_t c : report.skipped_ranking_classes) {
    if (!skipped.empty()) skipped += ',';
    skipped += report.class_names[c];
  }
  kv["skipped_ranking_classes"] = skipped;
  return kv;
}

namespace {

std::string header(const std::vector<std::string>& class_names) {
  std::string out = "true\\pred";
  for (const auto& n : class_names) out += "," + n;
  return out + "\n";
}

}  // namespace

std::string confusion_to_csv(const ConfusionMatrix& cm, const std::vector<std::string>& class_names) {
  std::string out = header(class_names);
  for (std::size_t t = 0; t < cm.num_classes; ++t) {
    out += class_names[t];
    for (std::size_t p = 0; p < cm.num_classes; ++p) out += "," + std::to_string(cm.at(t, p));
    out += "\n";
  }
  return out;
}

std::string normalized_confusion_to_csv(const ConfusionMatrix& cm, const std::vector<std::string>& class_names) {
  const std::vector<double> norm = cm.row_normalized();
  std::string out = header(class_names);
  for (std::size_t t = 0; t < cm.num_classes; ++t) {
    out += class_names[t];
    for (std::size_t p = 0; p < cm.num_classes; ++p) out += "," + format_double(norm[t * cm.num_classes + p]);
    out += "\n";
  }
  return out;
}

}  // namespace forestvit::metrics
