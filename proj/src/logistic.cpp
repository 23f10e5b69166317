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

#include "forestvit/logistic.hpp"

#include <numeric>

#include "forestvit/errors.hpp"
#include "forestvit/ops.hpp"
#include "forestvit/rng.hpp"

namespace forestvit {

LrParams init_lr(std::size_t num_features, std::size_t num_classes) {
  return LrParams{Tensor(Shape{num_features, num_classes}), Tensor(Shape{num_classes})};
}

Tensor lr_forward(std::span<const double> x, const LrParams& params) {
  const std::size_t f = params.num_features(), c = params.num_classes();
  if (x.size() != f) {
    throw DimensionError("lr_forward: feature vector of length " + std::to_string(x.size()) +
                         " against weights " + shape_string(params.w.shape()));
  }
  Tensor z(Shape{c});
  ops::matmul_kernel(x, params.w.values(), z.values(), 1, f, c);
  for (std::size_t j = 0; j < c; ++j) z[j] += params.b[j];
  return z;
}

double lr_loss_and_gradient(std::span<const std::vector<double>> features,
                            std::span<const std::size_t> labels, LrParams& params) {
  if (features.size() != labels.size() || features.empty()) {
    throw ContractError("lr_loss_and_gradient: need matching, non-empty features and labels");
  }
  const std::size_t f = params.num_features(), c = params.num_classes();
  auto gw = params.w.mutable_grad();
  auto gb = params.b.mutable_grad();
  const double inv_n = 1.0 / static_cast<double>(features.size());
  double loss = 0.0;
  std::vector<double> p(c);
  for (std::size_t s = 0; s < features.size(); ++s) {
    const Tensor z = lr_forward(features[s], params);
    loss += ops::cross_entropy(z, labels[s]);
    ops::softmax_row(z.values(), p);
    p[labels[s]] -= 1.0;
    const auto& x = features[s];
    for (std::size_t i = 0; i < f; ++i) {
      const double xi = x[i] * inv_n;
      if (xi == 0.0) continue;
      double* row = gw.data() + i * c;
      for (std::size_t j = 0; j < c; ++j) row[j] += xi * p[j];
    }
    for (std::size_t j = 0; j < c; ++j) gb[j] += p[j] * inv_n;
  }
  return loss * inv_n;
}

double lr_mean_loss(std::span<const std::vector<double>> features, std::span<const std::size_t> labels,
                    const LrParams& params) {
  if (features.size() != labels.size() || features.empty()) {
    throw ContractError("lr_mean_loss: need matching, non-empty features and labels");
  }
  double loss = 0.0;
  for (std::size_t s = 0; s < features.size(); ++s) {
    loss += ops::cross_entropy(lr_forward(features[s], params), labels[s]);
  }
  return loss / static_cast<double>(features.size());
}

LrParams train_lr(std::span<const std::vector<double>> features, std::span<const std::size_t> labels,
                  const LrTrainOptions& options) {
  if (features.empty()) throw DataError("train_lr: empty dataset");
  if (features.size() != labels.size()) throw ContractError("train_lr: features/labels length mismatch");
  if (options.learning_rate < 0.0) throw ConfigError("train_lr: learning rate must be non-negative");
  LrParams params = init_lr(features[0].size(), options.num_classes);
  SeededRng rng(options.seed);
  std::vector<std::size_t> order(features.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t batch = options.batch_size == 0 ? features.size() : options.batch_size;
  std::vector<std::vector<double>> xb;
  std::vector<std::size_t> yb;
  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      xb.clear();
      yb.clear();
      for (std::size_t i = start; i < end; ++i) {
        xb.push_back(features[order[i]]);
        yb.push_back(labels[order[i]]);
      }
      params.w.zero_grad();
      params.b.zero_grad();
      epoch_loss += lr_loss_and_gradient(xb, yb, params);
      ++batches;
      auto gw = params.w.grad();
      auto gb = params.b.grad();
      for (std::size_t i = 0; i < params.w.size(); ++i) params.w[i] -= options.learning_rate * gw[i];
      for (std::size_t j = 0; j < params.b.size(); ++j) params.b[j] -= options.learning_rate * gb[j];
    }
    if (options.on_epoch) options.on_epoch(epoch + 1, epoch_loss / static_cast<double>(batches));
  }
  params.w.clear_grad();
  params.b.clear_grad();
  return params;
}

}  // namespace forestvit
