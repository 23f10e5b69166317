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

#include "forestvit/autodiff.hpp"

#include <cmath>
#include <numbers>

#include "forestvit/errors.hpp"
#include "forestvit/ops.hpp"

namespace forestvit {

const Tensor& Var::value() const { return tape->value(id); }

Var Tape::leaf(Tensor value) {
  value.clear_grad();
  nodes_.push_back(Node{std::move(value), {}, {}, grad_enabled_});
  return Var{this, nodes_.size() - 1};
}

Var Tape::constant(Tensor value) {
  value.clear_grad();
  nodes_.push_back(Node{std::move(value), {}, {}, false});
  return Var{this, nodes_.size() - 1};
}

Var Tape::record(Tensor value, std::vector<NodeId> inputs, BackwardFn backward) {
  bool needs = false;
  if (grad_enabled_) {
    for (NodeId in : inputs) needs = needs || nodes_[in].needs_grad;
  }
  if (!needs) backward = nullptr;
  nodes_.push_back(Node{std::move(value), std::move(inputs), std::move(backward), needs});
  return Var{this, nodes_.size() - 1};
}

std::span<double> Tape::grad_buffer(NodeId id) { return nodes_[id].value.mutable_grad(); }

std::span<const double> Tape::grad(Var v) const { return nodes_[v.id].value.grad(); }

void Tape::backward(Var loss) {
  if (loss.tape != this) throw ContractError("backward: loss belongs to another tape");
  if (nodes_[loss.id].value.size() != 1) {
    throw ContractError("backward: loss must be scalar, got shape " +
                        shape_string(nodes_[loss.id].value.shape()));
  }
  for (NodeId i = 0; i <= loss.id; ++i) {
    if (nodes_[i].needs_grad) {
      nodes_[i].value.mutable_grad();
      nodes_[i].value.zero_grad();
    }
  }
  if (!nodes_[loss.id].needs_grad) return;
  nodes_[loss.id].value.mutable_grad()[0] = 1.0;
  for (NodeId i = loss.id + 1; i-- > 0;) {
    if (nodes_[i].backward) nodes_[i].backward(*this, i);
  }
}

namespace ad {

namespace {

void same_tape(Var a, Var b) {
  if (a.tape != b.tape) throw ContractError("operands live on different tapes");
}

}  // namespace

Var matmul(Var a, Var b) {
  same_tape(a, b);
  Tensor out = ops::matmul(a.value(), b.value());
  const std::size_t m = a.value().rows(), k = a.value().cols(), n = b.value().cols();
  return a.tape->record(std::move(out), {a.id, b.id}, [=](Tape& t, NodeId self) {
    auto g = t.value(self).grad();
    if (t.needs_grad(a.id)) {
      // dA += G * B^T
      ops::matmul_nt_accumulate(g, t.value(b.id).values(), t.grad_buffer(a.id), m, n, k);
    }
    if (t.needs_grad(b.id)) {
      // dB += A^T * G
      ops::matmul_tn_accumulate(t.value(a.id).values(), g, t.grad_buffer(b.id), m, k, n);
    }
  });
}

Var matmul_transposed(Var a, Var b) {
  same_tape(a, b);
  Tensor out = ops::matmul_transposed(a.value(), b.value());
  const std::size_t m = a.value().rows(), k = a.value().cols(), n = b.value().rows();
  return a.tape->record(std::move(out), {a.id, b.id}, [=](Tape& t, NodeId self) {
    auto g = t.value(self).grad();
    if (t.needs_grad(a.id)) {
      // dA[m x k] += G[m x n] * B[n x k]
      auto bv = t.value(b.id).values();
      auto ga = t.grad_buffer(a.id);
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          const double gij = g[i * n + j];
          if (gij == 0.0) continue;
          for (std::size_t p = 0; p < k; ++p) ga[i * k + p] += gij * bv[j * k + p];
        }
      }
    }
    if (t.needs_grad(b.id)) {
      // dB[n x k] += G^T * A
      ops::matmul_tn_accumulate(g, t.value(a.id).values(), t.grad_buffer(b.id), m, n, k);
    }
  });
}

Var add(Var a, Var b) {
  same_tape(a, b);
  if (a.shape() != b.shape()) {
    throw DimensionError("add: shapes " + shape_string(a.shape()) + " and " +
                         shape_string(b.shape()) + " differ");
  }
  Tensor out = a.value();
  auto bv = b.value().values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  return a.tape->record(std::move(out), {a.id, b.id}, [=](Tape& t, NodeId self) {
    auto g = t.value(self).grad();
    for (NodeId in : {a.id, b.id}) {
      if (!t.needs_grad(in)) continue;
      auto gi = t.grad_buffer(in);
      for (std::size_t i = 0; i < g.size(); ++i) gi[i] += g[i];
    }
  });
}

Var add_bias(Var x, Var bias) {
  same_tape(x, bias);
  const std::size_t n = x.value().cols();
  if (bias.value().size() != n) {
    throw DimensionError("add_bias: input " + shape_string(x.shape()) + " with bias " +
                         shape_string(bias.shape()));
  }
  Tensor out = x.value();
  const std::size_t m = out.rows();
  auto bv = bias.value().values();
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t j = 0; j < n; ++j) out[r * n + j] += bv[j];
  }
  return x.tape->record(std::move(out), {x.id, bias.id}, [=](Tape& t, NodeId self) {
    auto g = t.value(self).grad();
    if (t.needs_grad(x.id)) {
      auto gx = t.grad_buffer(x.id);
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
    }
    if (t.needs_grad(bias.id)) {
      auto gb = t.grad_buffer(bias.id);
      for (std::size_t r = 0; r < m; ++r) {
        for (std::size_t j = 0; j < n; ++j) gb[j] += g[r * n + j];
      }
    }
  });
}

Var scale(Var x, double factor) {
  Tensor out = x.value();
  for (double& v : out.values()) v *= factor;
  return x.tape->record(std::move(out), {x.id}, [=](Tape& t, NodeId self) {
    auto g = t.value(self).grad();
    auto gx = t.grad_buffer(x.id);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += factor * g[i];
  });
}

Var gelu(Var x) {
  Tensor out = ops::gelu(x.value());
  return x.tape->record(std::move(out), {x.id}, [=](Tape& t, NodeId self) {
    auto g = t.value(self).grad();
    auto xv = t.value(x.id).values();
    auto gx = t.grad_buffer(x.id);
    const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double v = xv[i];
      const double pdf = inv_sqrt_2pi * std::exp(-0.5 * v * v);
      gx[i] += g[i] * (ops::standard_normal_cdf(v) + v * pdf);
    }
  });
}

Var relu(Var x) {
  Tensor out = ops::relu(x.value());
  return x.tape->record(std::move(out), {x.id}, [=](Tape& t, NodeId self) {
    auto g = t.value(self).grad();
    auto xv = t.value(x.id).values();
    auto gx = t.grad_buffer(x.id);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (xv[i] > 0.0) gx[i] += g[i];
    }
  });
}

Var sigmoid(Var x) {
  Tensor out(x.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = ops::sigmoid(x.value()[i]);
  return x.tape->record(std::move(out), {x.id}, [=](Tape& t, NodeId self) {
    const Tensor& y = t.value(self);
    auto g = y.grad();
    auto gx = t.grad_buffer(x.id);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * y[i] * (1.0 - y[i]);
  });
}

Var softmax(Var z) {
  Tensor out = ops::softmax(z.value());
  const std::size_t n = out.cols();
  const std::size_t m = out.rows();
  return z.tape->record(std::move(out), {z.id}, [=](Tape& t, NodeId self) {
    const Tensor& s = t.value(self);
    auto g = s.grad();
    auto gz = t.grad_buffer(z.id);
    for (std::size_t r = 0; r < m; ++r) {
      double dot = 0.0;
      for (std::size_t j = 0; j < n; ++j) dot += g[r * n + j] * s[r * n + j];
      for (std::size_t j = 0; j < n; ++j) gz[r * n + j] += s[r * n + j] * (g[r * n + j] - dot);
    }
  });
}

Var layer_norm(Var x, Var gamma, Var beta, double eps) {
  same_tape(x, gamma);
  same_tape(x, beta);
  Tensor out = ops::layer_norm(x.value(), gamma.value(), beta.value(), eps);
  const std::size_t d = x.value().cols();
  const std::size_t m = x.value().rows();
  return x.tape->record(std::move(out), {x.id, gamma.id, beta.id}, [=](Tape& t, NodeId self) {
    auto g = t.value(self).grad();
    auto xv = t.value(x.id).values();
    auto gv = t.value(gamma.id).values();
    const bool want_x = t.needs_grad(x.id);
    const bool want_gamma = t.needs_grad(gamma.id);
    const bool want_beta = t.needs_grad(beta.id);
    std::vector<double> xhat(d), dxhat(d);
    for (std::size_t r = 0; r < m; ++r) {
      const double* row = xv.data() + r * d;
      const double* grow = g.data() + r * d;
      double mean = 0.0;
      for (std::size_t i = 0; i < d; ++i) mean += row[i];
      mean /= static_cast<double>(d);
      double var = 0.0;
      for (std::size_t i = 0; i < d; ++i) var += (row[i] - mean) * (row[i] - mean);
      var /= static_cast<double>(d);
      const double inv_std = 1.0 / std::sqrt(var + eps);
      double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        xhat[i] = (row[i] - mean) * inv_std;
        dxhat[i] = grow[i] * gv[i];
        sum_dxhat += dxhat[i];
        sum_dxhat_xhat += dxhat[i] * xhat[i];
      }
      if (want_x) {
        auto gx = t.grad_buffer(x.id);
        const double dd = static_cast<double>(d);
        for (std::size_t i = 0; i < d; ++i) {
          gx[r * d + i] += inv_std / dd * (dd * dxhat[i] - sum_dxhat - xhat[i] * sum_dxhat_xhat);
        }
      }
      if (want_gamma) {
        auto gg = t.grad_buffer(gamma.id);
        for (std::size_t i = 0; i < d; ++i) gg[i] += grow[i] * xhat[i];
      }
      if (want_beta) {
        auto gb = t.grad_buffer(beta.id);
        for (std::size_t i = 0; i < d; ++i) gb[i] += grow[i];
      }
    }
  });
}

Var cross_entropy(Var logits, std::size_t label) {
  const double loss = ops::cross_entropy(logits.value(), label);
  return logits.tape->record(Tensor::scalar(loss), {logits.id}, [=](Tape& t, NodeId self) {
    const double g = t.value(self).grad()[0];
    const Tensor& z = t.value(logits.id);
    std::vector<double> p(z.size());
    ops::softmax_row(z.values(), p);
    auto gz = t.grad_buffer(logits.id);
    for (std::size_t i = 0; i < p.size(); ++i) {
      gz[i] += g * (p[i] - (i == label ? 1.0 : 0.0));
    }
  });
}

Var slice_cols(Var x, std::size_t begin, std::size_t end) {
  const std::size_t n = x.value().cols();
  const std::size_t m = x.value().rows();
  if (begin >= end || end > n) {
    throw DimensionError("slice_cols: range [" + std::to_string(begin) + "," +
                         std::to_string(end) + ") invalid for " + shape_string(x.shape()));
  }
  const std::size_t w = end - begin;
  Tensor out(Shape{m, w});
  auto xv = x.value().values();
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t j = 0; j < w; ++j) out[r * w + j] = xv[r * n + begin + j];
  }
  return x.tape->record(std::move(out), {x.id}, [=](Tape& t, NodeId self) {
    auto g = t.value(self).grad();
    auto gx = t.grad_buffer(x.id);
    for (std::size_t r = 0; r < m; ++r) {
      for (std::size_t j = 0; j < w; ++j) gx[r * n + begin + j] += g[r * w + j];
    }
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("concat_cols: no operands");
  Tape* tape = parts[0].tape;
  const std::size_t m = parts[0].value().rows();
  std::size_t n = 0;
  std::vector<NodeId> ids;
  std::vector<std::size_t> widths;
  for (const Var& p : parts) {
    same_tape(parts[0], p);
    if (p.value().rows() != m) {
      throw DimensionError("concat_cols: row counts differ (" + shape_string(parts[0].shape()) +
                           " vs " + shape_string(p.shape()) + ")");
    }
    ids.push_back(p.id);
    widths.push_back(p.value().cols());
    n += widths.back();
  }
  Tensor out(Shape{m, n});
  std::size_t offset = 0;
  for (std::size_t pi = 0; pi < parts.size(); ++pi) {
    auto pv = parts[pi].value().values();
    for (std::size_t r = 0; r < m; ++r) {
      for (std::size_t j = 0; j < widths[pi]; ++j) out[r * n + offset + j] = pv[r * widths[pi] + j];
    }
    offset += widths[pi];
  }
  return tape->record(std::move(out), ids, [=](Tape& t, NodeId self) {
    auto g = t.value(self).grad();
    std::size_t off = 0;
    for (std::size_t pi = 0; pi < ids.size(); ++pi) {
      const std::size_t w = widths[pi];
      if (t.needs_grad(ids[pi])) {
        auto gp = t.grad_buffer(ids[pi]);
        for (std::size_t r = 0; r < m; ++r) {
          for (std::size_t j = 0; j < w; ++j) gp[r * w + j] += g[r * n + off + j];
        }
      }
      off += w;
    }
  });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("concat_rows: no operands");
  Tape* tape = parts[0].tape;
  const std::size_t n = parts[0].value().cols();
  std::size_t m = 0;
  std::vector<NodeId> ids;
  std::vector<std::size_t> sizes;
  std::vector<double> values;
  for (const Var& p : parts) {
    same_tape(parts[0], p);
    if (p.value().cols() != n) {
      throw DimensionError("concat_rows: column counts differ (" + shape_string(parts[0].shape()) +
                           " vs " + shape_string(p.shape()) + ")");
    }
    ids.push_back(p.id);
    sizes.push_back(p.value().size());
    m += p.value().rows();
    auto pv = p.value().values();
    values.insert(values.end(), pv.begin(), pv.end());
  }
  return tape->record(Tensor(Shape{m, n}, std::move(values)), ids, [=](Tape& t, NodeId self) {
    auto g = t.value(self).grad();
    std::size_t off = 0;
    for (std::size_t pi = 0; pi < ids.size(); ++pi) {
      if (t.needs_grad(ids[pi])) {
        auto gp = t.grad_buffer(ids[pi]);
        for (std::size_t i = 0; i < sizes[pi]; ++i) gp[i] += g[off + i];
      }
      off += sizes[pi];
    }
  });
}

Var row(Var x, std::size_t r) {
  const std::size_t n = x.value().cols();
  if (r >= x.value().rows()) {
    throw IndexError("row: index " + std::to_string(r) + " out of range for " +
                     shape_string(x.shape()));
  }
  auto xv = x.value().values();
  Tensor out(Shape{1, n}, std::vector<double>(xv.begin() + r * n, xv.begin() + (r + 1) * n));
  return x.tape->record(std::move(out), {x.id}, [=](Tape& t, NodeId self) {
    auto g = t.value(self).grad();
    auto gx = t.grad_buffer(x.id);
    for (std::size_t j = 0; j < n; ++j) gx[r * n + j] += g[j];
  });
}

Var mean(std::span<const Var> scalars) {
  if (scalars.empty()) throw ContractError("mean: no operands");
  std::vector<NodeId> ids;
  double total = 0.0;
  for (const Var& s : scalars) {
    same_tape(scalars[0], s);
    total += s.value().item();
    ids.push_back(s.id);
  }
  const double inv = 1.0 / static_cast<double>(scalars.size());
  return scalars[0].tape->record(Tensor::scalar(total * inv), ids, [=](Tape& t, NodeId self) {
    const double g = t.value(self).grad()[0] * inv;
    for (NodeId id : ids) {
      if (t.needs_grad(id)) t.grad_buffer(id)[0] += g;
    }
  });
}

Var sum(Var x) {
  double total = 0.0;
  for (double v : x.value().values()) total += v;
  return x.tape->record(Tensor::scalar(total), {x.id}, [=](Tape& t, NodeId self) {
    const double g = t.value(self).grad()[0];
    for (double& gx : t.grad_buffer(x.id)) gx += g;
  });
}

}  // namespace ad

}  // namespace forestvit
