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
#include <string>
#include <vector>

#include "forestvit/autodiff.hpp"
#include "forestvit/geo.hpp"
#include "forestvit/image.hpp"
#include "forestvit/tensor.hpp"

namespace forestvit {

struct VitConfig {
  std::size_t image_size = 224;
  std::size_t patch_size = 16;
  std::size_t embed_dim = 64;
  std::size_t num_heads = 4;
  std::size_t depth = 2;
  double mlp_ratio = 2.0;
  std::size_t num_classes = 4;
  double eps = 1e-6;
  // Extra scalars appended to the class embedding before the head (2 when
  // coordinates are concatenated, else 0).
  std::size_t head_extra_inputs = 0;

  // 32x32 input, 8 px patches, width 32, 2 heads, 2 blocks.
  static VitConfig toy();

  // Throws ConfigError on indivisible sizes or non-positive fields.
  void validate() const;

  std::size_t grid() const { return image_size / patch_size; }
  std::size_t num_patches() const { return grid() * grid(); }
  std::size_t num_tokens() const { return num_patches() + 1; }
  std::size_t patch_dim() const { return 3 * patch_size * patch_size; }
  std::size_t head_dim() const { return embed_dim / num_heads; }
  std::size_t mlp_hidden() const;
  std::size_t head_input_dim() const { return embed_dim + head_extra_inputs; }

  friend bool operator==(const VitConfig&, const VitConfig&) = default;
};

// Per-block weights. T is Tensor for stored parameters and Var once bound to
// a tape.
template <class T>
struct BlockWeights {
  T ln1_gamma, ln1_beta;
  T q_w, q_b, k_w, k_b, v_w, v_b;
  T out_w, out_b;
  T ln2_gamma, ln2_beta;
  T mlp_w1, mlp_b1, mlp_w2, mlp_b2;
};

template <class T>
struct VitWeights {
  T patch_w, patch_b;  // patch_dim x D, D
  T cls_token;         // D
  T pos_embed;         // (N + 1) x D
  std::vector<BlockWeights<T>> blocks;
  T head_ln_gamma, head_ln_beta;
  T head_w, head_b;  // head_input_dim x C, C
};

using VitParams = VitWeights<Tensor>;
using VitBinding = VitWeights<Var>;

// Calls f(name, member) for every weight in canonical order. W may be const.
template <class W, class F>
void visit_weights(W& w, F&& f) {
  f(std::string("patch.w"), w.patch_w);
  f(std::string("patch.b"), w.patch_b);
  f(std::string("cls_token"), w.cls_token);
  f(std::string("pos_embed"), w.pos_embed);
  for (std::size_t i = 0; i < w.blocks.size(); ++i) {
    auto& b = w.blocks[i];
    const std::string p = "blocks." + std::to_string(i) + ".";
    f(p + "ln1.gamma", b.ln1_gamma);
    f(p + "ln1.beta", b.ln1_beta);
    f(p + "attn.q.w", b.q_w);
    f(p + "attn.q.b", b.q_b);
    f(p + "attn.k.w", b.k_w);
    f(p + "attn.k.b", b.k_b);
    f(p + "attn.v.w", b.v_w);
    f(p + "attn.v.b", b.v_b);
    f(p + "attn.out.w", b.out_w);
    f(p + "attn.out.b", b.out_b);
    f(p + "ln2.gamma", b.ln2_gamma);
    f(p + "ln2.beta", b.ln2_beta);
    f(p + "mlp.w1", b.mlp_w1);
    f(p + "mlp.b1", b.mlp_b1);
    f(p + "mlp.w2", b.mlp_w2);
    f(p + "mlp.b2", b.mlp_b2);
  }
  f(std::string("head.ln.gamma"), w.head_ln_gamma);
  f(std::string("head.ln.beta"), w.head_ln_beta);
  f(std::string("head.w"), w.head_w);
  f(std::string("head.b"), w.head_b);
}

// Closed-form count from the config alone.
std::size_t parameter_count(const VitConfig& config);
std::size_t parameter_count(const VitParams& params);

// Truncated normal (sigma 0.02) projections; zero biases, class token and
// positional embeddings; LayerNorm gamma 1, beta 0.
VitParams init_vit(const VitConfig& config, std::uint64_t seed);
// All weights zero except LayerNorm gammas (1).
VitParams zero_vit(const VitConfig& config);

// Registers every parameter as a leaf on the tape.
VitBinding bind(Tape& tape, const VitParams& params);
// Copies leaf gradients back into the parameters' grad fields.
void collect_gradients(const Tape& tape, const VitBinding& binding, VitParams& params);

// Non-overlapping patches in row-major patch order, each flattened
// channel-last: result is num_patches x (3 * patch^2).
Tensor patchify(const Image& image, std::size_t patch_size);
Image unpatchify(const Tensor& patches, std::size_t image_size, std::size_t patch_size);

// [cls; patches * W_p + b] + pos_embed, class token at row 0.
Var embed(Var patches, const VitBinding& w);

// Multi-head scaled dot-product self attention followed by the output
// projection. When attention_weights is non-null, the per-head T x T softmax
// matrices are appended to it.
Var attention(Var x, const BlockWeights<Var>& b, std::size_t num_heads,
              std::vector<Tensor>* attention_weights = nullptr);
// GeLU(x W1 + b1) W2 + b2
Var mlp(Var x, const BlockWeights<Var>& b);
// u = x + attention(LN1(x)); y = u + mlp(LN2(u)).
Var encoder_block(Var x, const BlockWeights<Var>& b, const VitConfig& config);
// Final LayerNorm on the class token, optional coordinate concat, linear head.
Var classification_head(Var tokens, const VitBinding& w, const VitConfig& config,
                        std::optional<GeoUV> geo);

// Raw logits (1 x C) for one image. Throws ConfigError for a wrong image
// size or a geo/config mismatch.
Var forward(Tape& tape, const Image& image, const VitConfig& config, const VitBinding& w,
            std::optional<GeoUV> geo = std::nullopt);
// Pure evaluation; returns a length-C vector.
Tensor forward(const Image& image, const VitConfig& config, const VitParams& params,
               std::optional<GeoUV> geo = std::nullopt);

}  // namespace forestvit
