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

#include "forestvit/tensor.hpp"

// Value-level numeric kernels. The autodiff ops in autodiff.hpp call these
// for their forward pass, so both paths share one definition of each formula.
namespace forestvit::ops {

// a[m x k] * b[k x n]. Rank-1 operands are treated as row vectors.
Tensor matmul(const Tensor& a, const Tensor& b);
// a[m x k] * b[n x k]^T.
Tensor matmul_transposed(const Tensor& a, const Tensor& b);

// Raw kernels on row-major buffers; out is overwritten.
void matmul_kernel(std::span<const double> a, std::span<const double> b, std::span<double> out,
                   std::size_t m, std::size_t k, std::size_t n);
// out[m x n] += a[m x k] * b[n x k]^T
void matmul_nt_accumulate(std::span<const double> a, std::span<const double> b,
                          std::span<double> out, std::size_t m, std::size_t k, std::size_t n);
// out[k x n] += a[m x k]^T * b[m x n]
void matmul_tn_accumulate(std::span<const double> a, std::span<const double> b,
                          std::span<double> out, std::size_t m, std::size_t k, std::size_t n);

// Softmax of each row (of the last axis). Throws NumericDomainError on
// non-finite input.
Tensor softmax(const Tensor& z);
void softmax_row(std::span<const double> z, std::span<double> out);

// -log softmax(logits)[label]; logits may be rank 1 or a single row.
double cross_entropy(const Tensor& logits, std::size_t label);

double standard_normal_cdf(double x);
double gelu(double x);
Tensor gelu(const Tensor& x);
Tensor relu(const Tensor& x);
double sigmoid(double l);

// Row-wise LayerNorm with population variance: (x - mean)/sqrt(var + eps) * gamma + beta.
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps);

std::size_t argmax(std::span<const double> values);

}  // namespace forestvit::ops
