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
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "forestvit/kv.hpp"

namespace forestvit::metrics {

// counts[t][p]: samples of true class t predicted as p.
struct ConfusionMatrix {
  std::size_t num_classes = 0;
  std::vector<std::uint64_t> counts;  // row-major k x k

  explicit ConfusionMatrix(std::size_t k = 0) : num_classes(k), counts(k * k, 0) {}

  std::uint64_t at(std::size_t t, std::size_t p) const { return counts[t * num_classes + p]; }
  std::uint64_t& at(std::size_t t, std::size_t p) { return counts[t * num_classes + p]; }
  std::uint64_t total() const;
  std::uint64_t row_total(std::size_t t) const;
  std::uint64_t column_total(std::size_t p) const;

  // Each row divided by its total; rows without samples stay zero.
  std::vector<double> row_normalized() const;

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

// Throws ContractError on length mismatch and IndexError for entries >= k.
ConfusionMatrix confusion(std::span<const std::size_t> preds, std::span<const std::size_t> labels,
                          std::size_t k);

struct ClassPrf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct PrfReport {
  std::vector<ClassPrf> per_class;
  ClassPrf macro;  // unweighted mean over classes
};

// Zero denominators give 0 for the affected metric.
PrfReport prf(const ConfusionMatrix& cm);

// trace / total; throws ContractError for an empty matrix.
double accuracy(const ConfusionMatrix& cm);

// Per-class one-vs-rest ranking metric. Classes without both positives and
// negatives are skipped (value empty) and excluded from the macro mean.
struct OvrReport {
  std::vector<std::optional<double>> per_class;
  std::optional<double> macro;
  std::vector<std::size_t> skipped;
};

// Binary AUROC: probability that a random positive outranks a random
// negative, ties counting one half. Requires both classes present.
double binary_auroc(std::span<const double> scores, std::span<const bool> positive);
// Step-wise area under the precision-recall curve: sum over distinct
// thresholds (descending) of (R_t - R_prev) * P_t.
double binary_auprc(std::span<const double> scores, std::span<const bool> positive);

// scores is row-major n x k.
OvrReport auroc_ovr(std::span<const double> scores, std::span<const std::size_t> labels, std::size_t k);
OvrReport auprc_ovr(std::span<const double> scores, std::span<const std::size_t> labels, std::size_t k);

// Elementwise sigmoid of the logits (not softmax).
std::vector<double> logits_to_probs(std::span<const double> logits);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::optional<double> auroc;
  std::optional<double> auprc;
};

struct EvalReport {
  std::vector<std::string> class_names;
  std::vector<ClassMetrics> per_class;
  ClassMetrics macro;
  double accuracy = 0.0;
  std::size_t samples = 0;
  std::vector<std::size_t> skipped_ranking_classes;
};

// Builds the full report from predictions, labels and the n x k score table.
EvalReport build_report(std::span<const std::size_t> preds, std::span<const std::size_t> labels,
                        std::span<const double> scores, const std::vector<std::string>& class_names);

// Keys: samples, accuracy, macro_{precision,recall,f1,auroc,auprc} and
// <metric>_<class name> per class; skipped ranking metrics are written as
// "nan" and listed under skipped_ranking_classes.
KeyValues report_to_kv(const EvalReport& report);
// CSV with header "true\\pred,<class>..." and one row per true class.
std::string confusion_to_csv(const ConfusionMatrix& cm, const std::vector<std::string>& class_names);
std::string normalized_confusion_to_csv(const ConfusionMatrix& cm, const std::vector<std::string>& class_names);

}  // namespace forestvit::metrics
