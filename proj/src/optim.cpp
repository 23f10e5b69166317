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

#include "forestvit/optim.hpp"

#include <cmath>

#include "forestvit/errors.hpp"

namespace forestvit {

namespace {

void check_shapes(std::span<Tensor* const> params, std::span<const std::span<const double>> grads) {
  if (params.size() != grads.size()) throw DimensionError("optimizer: parameter/gradient count mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i]->size() != grads[i].size()) {
      throw DimensionError("optimizer: gradient " + std::to_string(i) + " has " +
                           std::to_string(grads[i].size()) + " values for parameter " +
                           shape_string(params[i]->shape()));
    }
  }
}

}  // namespace

void adamw_step(std::span<Tensor* const> params, std::span<const std::span<const double>> grads,
                AdamWState& state, const AdamWOptions& options) {
  check_shapes(params, grads);
  if (state.moments.empty()) {
    state.moments.resize(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
      state.moments[i].m.assign(params[i]->size(), 0.0);
      state.moments[i].v.assign(params[i]->size(), 0.0);
    }
  } else if (state.moments.size() != params.size()) {
    throw DimensionError("adamw_step: optimizer state does not match parameters");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(options.beta1, t);
  const double correction2 = 1.0 - std::pow(options.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto w = params[i]->values();
    auto g = grads[i];
    auto& m = state.moments[i].m;
    auto& v = state.moments[i].v;
    for (std::size_t j = 0; j < w.size(); ++j) {
      m[j] = options.beta1 * m[j] + (1.0 - options.beta1) * g[j];
      v[j] = options.beta2 * v[j] + (1.0 - options.beta2) * g[j] * g[j];
      const double m_hat = m[j] / correction1;
      const double v_hat = v[j] / correction2;
      w[j] -= options.learning_rate * (m_hat / (std::sqrt(v_hat) + options.epsilon) +
                                       options.weight_decay * w[j]);
    }
  }
}

void sgd_step(std::span<Tensor* const> params, std::span<const std::span<const double>> grads,
              double learning_rate) {
  check_shapes(params, grads);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto w = params[i]->values();
    for (std::size_t j = 0; j < w.size(); ++j) w[j] -= learning_rate * grads[i][j];
  }
}

}  // namespace forestvit
