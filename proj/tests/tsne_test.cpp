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

#include <gtest/gtest.h>

#include <cmath>

#include "forestvit/errors.hpp"
#include "forestvit/tsne.hpp"
#include "test_util.hpp"

namespace forestvit::tsne {
namespace {

using testing::random_tensor;

void expect_joint_distribution(const Tensor& m, double tol) {
  const std::size_t n = m.rows();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    EXPECT_EQ(m.at(i, i), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      EXPECT_GE(m.at(i, j), 0.0);
      EXPECT_NEAR(m.at(i, j), m.at(j, i), 1e-15);
      total += m.at(i, j);
    }
  }
  EXPECT_NEAR(total, 1.0, tol);
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

TEST(ComputeP, InvariantsOnRandomInput) {
  SeededRng rng(0);
  const Affinities a = compute_p(random_tensor({30, 6}, rng), 5.0);
  expect_joint_distribution(a.p, 1e-9);
  EXPECT_TRUE(a.degenerate_rows.empty());
}

TEST(ComputeP, EquidistantPointsAreUniform) {
  const Tensor x = Tensor::matrix({{0, 0}, {1, 0}, {0.5, std::sqrt(3.0) / 2}});
  const Affinities a = compute_p(x, 1.5);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      if (i != j) EXPECT_NEAR(a.p.at(i, j), 1.0 / 6.0, 1e-12);
    }
  }
}

TEST(ComputeP, RowEntropyMatchesPerplexity) {
  SeededRng rng(1);
  const Tensor x = random_tensor({40, 10}, rng);
  const double perplexity = 8.0;
  const Affinities a = compute_p(x, perplexity);
  const Tensor d = squared_distances(x);
  for (std::size_t i = 0; i < 40; ++i) {
    const auto row = conditional_row(d, i, a.betas[i]);
    double h = 0.0;
    for (double p : row) {
      if (p > 0.0) h -= p * std::log2(p);
    }
    EXPECT_NEAR(h, std::log2(perplexity), 1e-4) << "row " << i;
  }
}

TEST(ComputeP, Validation) {
  SeededRng rng(2);
  EXPECT_THROW(compute_p(random_tensor({2, 3}, rng), 1.0), ConfigError);
  EXPECT_THROW(compute_p(random_tensor({10, 3}, rng), 10.0), ConfigError);
  EXPECT_THROW(compute_p(random_tensor({10, 3}, rng), 0.5), ConfigError);
}

TEST(ComputeQ, Examples) {
  const Tensor q2 = compute_q(Tensor::matrix({{0, 0}, {3, 1}}));
  EXPECT_EQ(q2.at(0, 1), 0.5);
  EXPECT_EQ(q2.at(1, 0), 0.5);
  const Tensor q3 = compute_q(Tensor::matrix({{0, 0}, {2, 0}, {1, std::sqrt(3.0)}}));
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      if (i != j) EXPECT_NEAR(q3.at(i, j), 1.0 / 6.0, 1e-12);
    }
  }
  SeededRng rng(3);
  expect_joint_distribution(compute_q(random_tensor({25, 2}, rng, -5, 5)), 1e-12);
}

TEST(Kl, Examples) {
  SeededRng rng(4);
  const Tensor p = random_p(6, rng);
  EXPECT_NEAR(kl(p, p), 0.0, 1e-15);
  const Tensor ph = Tensor::matrix({{0, 0.5}, {0.5, 0}});
  const Tensor qh = Tensor::matrix({{0, 0.75}, {0.25, 0}});
  EXPECT_NEAR(kl(ph, qh), 0.5 * std::log(2.0 / 3.0) + 0.5 * std::log(2.0), 1e-15);
  EXPECT_NEAR(kl(ph, qh), 0.143841, 1e-6);
  const Tensor qz = Tensor::matrix({{0, 1.0}, {0.0, 0}});
  EXPECT_THROW(kl(ph, qz), NumericDomainError);
}

TEST(Kl, NonNegative) {
  SeededRng rng(5);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 3 + rng.below(5);
    EXPECT_GE(kl(random_p(n, rng), random_p(n, rng)), -1e-15);
  }
}

TEST(Gradient, MatchesFiniteDifferences) {
  SeededRng rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    const Tensor p = random_p(5, rng);
    Tensor y = random_tensor({5, 2}, rng, -2, 2);
    const Tensor g = gradient(p, y);
    const double h = 1e-5;
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double orig = y[i];
      y[i] = orig + h;
      const double up = kl(p, compute_q(y));
      y[i] = orig - h;
      const double down = kl(p, compute_q(y));
      y[i] = orig;
      EXPECT_LT(testing::relative_error(g[i], (up - down) / (2 * h)), 1e-5);
    }
  }
}

TEST(Step, ZeroRateAndMomentumKeepY) {
  SeededRng rng(7);
  const Tensor p = random_p(6, rng);
  EmbeddingState s = init_state(6, 3);
  s.y = random_tensor({6, 2}, rng);
  s.y_prev = random_tensor({6, 2}, rng);
  const Tensor before = s.y;
  step(s, p, 0.0, 0.0);
  EXPECT_EQ(s.y, before);
  EXPECT_EQ(s.y_prev, before);
}

TEST(Step, SmallRateDescends) {
  SeededRng rng(8);
  const Tensor p = random_p(10, rng);
  EmbeddingState s = init_state(10, 4);
  s.y = random_tensor({10, 2}, rng);
  s.y_prev = s.y;
  double prev = kl(p, compute_q(s.y));
  for (int t = 0; t < 20; ++t) {
    step(s, p, 1e-3, 0.0);
    const double c = kl(p, compute_q(s.y));
    EXPECT_LE(c, prev) << "step " << t;
    prev = c;
  }
}

TEST(Step, NonFiniteUpdateRaises) {
  SeededRng rng(9);
  const Tensor p = random_p(4, rng);
  EmbeddingState s = init_state(4, 0);
  s.y[0] = std::nan("");
  EXPECT_THROW(step(s, p, 1.0, 0.0), IterationError);
}

TEST(InitState, SmallGaussian) {
  const EmbeddingState s = init_state(200, 1);
  EXPECT_EQ(s.y.shape(), (Shape{200, 2}));
  EXPECT_EQ(s.y, s.y_prev);
  double sq = 0.0;
  for (double v : s.y.values()) sq += v * v;
  EXPECT_NEAR(std::sqrt(sq / 400.0), 1e-4, 2e-5);
}

TEST(RunTsne, ReducesKlAndIsDeterministic) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SeededRng rng(seed);
    const Tensor x = random_tensor({30, 8}, rng);
    TsneConfig c;
    c.perplexity = 5.0;
    c.max_iters = 200;
    c.seed = seed;
    const TsneResult r = run_tsne(x, c);
    EXPECT_EQ(r.embedding.shape(), (Shape{30, 2}));
    ASSERT_EQ(r.kl_trace.size(), c.max_iters + 1);
    EXPECT_LT(r.kl_trace.back(), r.kl_trace.front()) << "seed " << seed;
    if (seed == 0) EXPECT_EQ(run_tsne(x, c).embedding, r.embedding);
  }
}

TEST(Config, MomentumSchedule) {
  const TsneConfig c;
  EXPECT_EQ(c.momentum(0), 0.5);
  EXPECT_EQ(c.momentum(249), 0.5);
  EXPECT_EQ(c.momentum(250), 0.8);
  EXPECT_EQ(c.perplexity, 30.0);
  EXPECT_EQ(c.learning_rate, 100.0);
  EXPECT_EQ(c.max_iters, 1000u);
  EXPECT_FALSE(c.early_exaggeration);
}

}  // namespace
}  // namespace forestvit::tsne
