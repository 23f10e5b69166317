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

#include "forestvit/tsne.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "forestvit/errors.hpp"
#include "forestvit/rng.hpp"

namespace forestvit::tsne {

namespace {

constexpr std::size_t kMaxBisectionSteps = 50;
constexpr double kEntropyTolerance = 1e-5;  // bits

double entropy_bits(const std::vector<double>& p) {
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log2(v);
  }
  return h;
}

}  // namespace

Tensor squared_distances(const Tensor& points) {
  const std::size_t n = points.rows(), d = points.cols();
  Tensor out(Shape{n, n});
  auto x = points.values();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double diff = x[i * d + k] - x[j * d + k];
        s += diff * diff;
      }
      out.at(i, j) = s;
      out.at(j, i) = s;
    }
  }
  return out;
}

std::vector<double> conditional_row(const Tensor& sq_distances, std::size_t i, double beta) {
  const std::size_t n = sq_distances.rows();
  double dmin = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j) {
    if (j != i) dmin = std::min(dmin, sq_distances.at(i, j));
  }
  std::vector<double> p(n, 0.0);
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (j == i) continue;
    p[j] = std::exp(-beta * (sq_distances.at(i, j) - dmin));
    sum += p[j];
  }
  for (double& v : p) v /= sum;
  return p;
}

Affinities compute_p(const Tensor& points, double perplexity) {
  if (points.rank() != 2) throw DimensionError("compute_p: points must be an n x d matrix");
  const std::size_t n = points.rows();
  if (n < 3) throw ConfigError("compute_p: need at least 3 points");
  if (!(perplexity >= 1.0 && perplexity < static_cast<double>(n))) {
    throw ConfigError("compute_p: perplexity must be in [1, n), got " + std::to_string(perplexity));
  }
  const Tensor dist = squared_distances(points);
  const double target = std::log2(perplexity);
  Affinities result{Tensor(Shape{n, n}), {}, {}};
  Tensor conditional(Shape{n, n});
  for (std::size_t i = 0; i < n; ++i) {
    double mean_d = 0.0;
    for (std::size_t j = 0; j < n; ++j) mean_d += dist.at(i, j);
    mean_d /= static_cast<double>(n - 1);
    double beta = mean_d > 0.0 ? 1.0 / mean_d : 1.0;
    double lo = 0.0, hi = std::numeric_limits<double>::infinity();
    std::vector<double> row;
    bool converged = false;
    for (std::size_t it = 0; it < kMaxBisectionSteps; ++it) {
      row = conditional_row(dist, i, beta);
      const double h = entropy_bits(row);
      if (std::abs(h - target) < kEntropyTolerance) {
        converged = true;
        break;
      }
      if (h > target) {
        lo = beta;
        beta = std::isinf(hi) ? beta * 2.0 : 0.5 * (beta + hi);
      } else {
        hi = beta;
        beta = 0.5 * (beta + lo);
      }
    }
    if (!converged) {
      row = conditional_row(dist, i, beta);
      converged = std::abs(entropy_bits(row) - target) < kEntropyTolerance;
    }
    if (!converged) {
      result.degenerate_rows.push_back(i);
      row.assign(n, 1.0 / static_cast<double>(n - 1));
      row[i] = 0.0;
    }
    result.betas.push_back(beta);
    for (std::size_t j = 0; j < n; ++j) conditional.at(i, j) = row[j];
  }
  const double denom = 2.0 * static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      result.p.at(i, j) = i == j ? 0.0 : (conditional.at(i, j) + conditional.at(j, i)) / denom;
    }
  }
  return result;
}

Tensor compute_q(const Tensor& y) {
  const std::size_t n = y.rows();
  if (y.rank() != 2 || n < 2) throw DimensionError("compute_q: need an n x 2 layout with n >= 2");
  Tensor q = squared_distances(y);
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      q.at(i, j) = 1.0 / (1.0 + q.at(i, j));
      z += q.at(i, j);
    }
  }
  for (double& v : q.values()) v /= z;
  return q;
}

double kl(const Tensor& p, const Tensor& q) {
  if (p.shape() != q.shape()) {
    throw DimensionError("kl: shapes " + shape_string(p.shape()) + " and " + shape_string(q.shape()));
  }
  double c = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0) throw NumericDomainError("kl: q is zero where p is positive");
    c += p[i] * std::log(p[i] / q[i]);
  }
  return c;
}

Tensor gradient(const Tensor& p, const Tensor& y) {
  const std::size_t n = y.rows(), dims = y.cols();
  if (p.rows() != n || p.cols() != n) throw DimensionError("tsne gradient: P does not match Y");
  const Tensor q = compute_q(y);
  Tensor grad(Shape{n, dims});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      double d2 = 0.0;
      for (std::size_t k = 0; k < dims; ++k) {
        const double diff = y.at(i, k) - y.at(j, k);
        d2 += diff * diff;
      }
      const double w = 4.0 * (p.at(i, j) - q.at(i, j)) / (1.0 + d2);
      for (std::size_t k = 0; k < dims; ++k) grad.at(i, k) += w * (y.at(i, k) - y.at(j, k));
    }
  }
  return grad;
}

EmbeddingState init_state(std::size_t n, std::uint64_t seed) {
  SeededRng rng(seed);
  Tensor y(Shape{n, 2});
  for (double& v : y.values()) v = 1e-4 * rng.normal();
  return EmbeddingState{y, y, 0};
}

void step(EmbeddingState& state, const Tensor& p, double eta, double alpha) {
  const Tensor grad = gradient(p, state.y);
  Tensor next = state.y;
  for (std::size_t i = 0; i < next.size(); ++i) {
    next[i] = state.y[i] - eta * grad[i] + alpha * (state.y[i] - state.y_prev[i]);
    if (!std::isfinite(next[i])) {
      throw IterationError("t-SNE update became non-finite at iteration " + std::to_string(state.iteration));
    }
  }
  state.y_prev = std::move(state.y);
  state.y = std::move(next);
  ++state.iteration;
}

TsneResult run_tsne(const Tensor& points, const TsneConfig& config) {
  Affinities aff = compute_p(points, config.perplexity);
  EmbeddingState state = init_state(points.rows(), config.seed);
  TsneResult result;
  result.degenerate_rows = aff.degenerate_rows;
  result.kl_trace.reserve(config.max_iters + 1);
  result.kl_trace.push_back(kl(aff.p, compute_q(state.y)));
  Tensor exaggerated;
  if (config.early_exaggeration) {
    exaggerated = aff.p;
    for (double& v : exaggerated.values()) v *= config.exaggeration;
  }
  for (std::size_t t = 0; t < config.max_iters; ++t) {
    const bool exaggerate = config.early_exaggeration && t < config.exaggeration_iters;
    step(state, exaggerate ? exaggerated : aff.p, config.learning_rate, config.momentum(t));
    result.kl_trace.push_back(kl(aff.p, compute_q(state.y)));
  }
  result.embedding = std::move(state.y);
  return result;
}

}  // namespace forestvit::tsne
