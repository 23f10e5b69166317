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
#include <functional>
#include <span>
#include <vector>

#include "forestvit/tensor.hpp"

namespace forestvit {

// Multinomial logistic regression on flattened pixels.
struct LrParams {
  Tensor w;  // num_features x num_classes
  Tensor b;  // num_classes

  std::size_t num_features() const { return w.rows(); }
  std::size_t num_classes() const { return w.cols(); }
};

// Zero-initialized parameters.
LrParams init_lr(std::size_t num_features, std::size_t num_classes);

// x^T W + b as a length-C vector.
Tensor lr_forward(std::span<const double> x, const LrParams& params);

// Mean cross-entropy over the rows and its gradient, accumulated into the
// grad fields of params.w / params.b (softmax(z) - onehot(y)) x^T per sample).
double lr_loss_and_gradient(std::span<const std::vector<double>> features,
                            std::span<const std::size_t> labels, LrParams& params);

struct LrTrainOptions {
  double learning_rate = 0.01;
  std::size_t epochs = 10;
  // 0 means full batch.
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  std::size_t num_classes = 4;
  // Called after each epoch with (epoch, mean training loss over the epoch's batches).
  std::function<void(std::size_t, double)> on_epoch;
};

// Plain minibatch SGD from zero initialization. Batches are drawn from a
// seeded shuffle each epoch. Throws DataError for an empty dataset.
LrParams train_lr(std::span<const std::vector<double>> features, std::span<const std::size_t> labels,
                  const LrTrainOptions& options);

double lr_mean_loss(std::span<const std::vector<double>> features, std::span<const std::size_t> labels,
                    const LrParams& params);

}  // namespace forestvit
