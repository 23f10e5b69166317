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
#include <vector>

#include "forestvit/tensor.hpp"

namespace forestvit::tsne {

// Joint probabilities p_ij: symmetric, zero diagonal, summing to 1.
struct Affinities {
  Tensor p;  // n x n
  // Rows whose bandwidth search could not reach the target entropy; they
  // were replaced by a uniform distribution over the other points.
  std::vector<std::size_t> degenerate_rows;
  // Gaussian precision chosen for each row.
  std::vector<double> betas;
};

// Gaussian conditionals with per-row precision found by bisection (at most
// 50 steps, entropy tolerance 1e-5 in bits) so that each row has entropy
// log2(perplexity); then p_ij = (p_j|i + p_i|j) / (2n).
// Requires n >= 3 and 1 <= perplexity < n; throws ConfigError otherwise.
Affinities compute_p(const Tensor& points, double perplexity);

// Conditional distribution p_j|i of row i at Gaussian precision beta
// (p_j|i proportional to exp(-beta * d_ij), p_i|i = 0).
std::vector<double> conditional_row(const Tensor& sq_distances, std::size_t i, double beta);

Tensor squared_distances(const Tensor& points);

// Student-t joint similarities of a 2-D layout, zero diagonal.
Tensor compute_q(const Tensor& y);

// sum_ij p_ij log(p_ij / q_ij) (natural log), with 0 log 0 = 0. Throws
// NumericDomainError where q_ij = 0 < p_ij.
double kl(const Tensor& p, const Tensor& q);

// dC/dy_i = 4 sum_j (p_ij - q_ij)(y_i - y_j)(1 + |y_i - y_j|^2)^-1
Tensor gradient(const Tensor& p, const Tensor& y);

struct TsneConfig {
  double perplexity = 30.0;
  double learning_rate = 100.0;  // eta
  std::size_t max_iters = 1000;
  double momentum_initial = 0.5;
  double momentum_final = 0.8;
  std::size_t momentum_switch_iter = 250;
  // Multiplies P by 4 for the first 100 iterations.
  bool early_exaggeration = false;
  double exaggeration = 4.0;
  std::size_t exaggeration_iters = 100;
  std::uint64_t seed = 0;

  double momentum(std::size_t iteration) const {
    return iteration < momentum_switch_iter ? momentum_initial : momentum_final;
  }
};

struct EmbeddingState {
  Tensor y;       // Y(t-1) after a step: the current solution
  Tensor y_prev;  // Y(t-2)
  std::size_t iteration = 0;
};

// Y(0) ~ N(0, 1e-4^2), Y(-1) = Y(0).
EmbeddingState init_state(std::size_t n, std::uint64_t seed);

// Y <- Y - eta dC/dY + alpha (Y - Y_prev). Throws IterationError naming the
// iteration if the update is not finite.
void step(EmbeddingState& state, const Tensor& p, double eta, double alpha);

struct TsneResult {
  Tensor embedding;                // n x 2
  std::vector<double> kl_trace;    // C before the first step, then after each step
  std::vector<std::size_t> degenerate_rows;
};

TsneResult run_tsne(const Tensor& points, const TsneConfig& config);

}  // namespace forestvit::tsne
