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
#include <span>
#include <vector>

#include "forestvit/tensor.hpp"

namespace forestvit {

struct AdamWOptions {
  double learning_rate = 5e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.0;
};

// First and second moment estimates for one parameter tensor.
struct AdamMoments {
  std::vector<double> m;
  std::vector<double> v;
};

struct AdamWState {
  std::size_t step = 0;
  std::vector<AdamMoments> moments;
};

// One bias-corrected Adam update with decoupled weight decay:
//   w <- w - lr * (m_hat / (sqrt(v_hat) + eps) + wd * w)
// params and grads are matched by position; the state is sized on first use.
void adamw_step(std::span<Tensor* const> params, std::span<const std::span<const double>> grads,
                AdamWState& state, const AdamWOptions& options);

// w <- w - lr * g
void sgd_step(std::span<Tensor* const> params, std::span<const std::span<const double>> grads,
              double learning_rate);

}  // namespace forestvit
