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

#include "forestvit/vit.hpp"

#include <cmath>

#include "forestvit/errors.hpp"
#include "forestvit/ops.hpp"
#include "forestvit/rng.hpp"

namespace forestvit {

VitConfig VitConfig::toy() {
  VitConfig c;
  c.image_size = 32;
  c.patch_size = 8;
  c.embed_dim = 32;
  c.num_heads = 2;
  c.depth = 2;
  return c;
}

std::size_t VitConfig::mlp_hidden() const {
  return static_cast<std::size_t>(std::llround(mlp_ratio * static_cast<double>(embed_dim)));
}

void VitConfig::validate() const {
  if (patch_size == 0 || image_size == 0) throw ConfigError("image_size and patch_size must be positive");
  if (image_size % patch_size != 0) {
    throw ConfigError("image_size " + std::to_string(image_size) + " is not divisible by patch_size " +
                      std::to_string(patch_size));
  }
  if (embed_dim == 0 || num_heads == 0 || embed_dim % num_heads != 0) {
    throw ConfigError("embed_dim " + std::to_string(embed_dim) + " must be a positive multiple of num_heads " +
                      std::to_string(num_heads));
  }
  if (depth == 0) throw ConfigError("depth must be positive");
  if (!(mlp_ratio > 0.0) || mlp_hidden() == 0) throw ConfigError("mlp_ratio must give a positive hidden width");
  if (num_classes < 2) throw ConfigError("num_classes must be at least 2");
  if (!(eps > 0.0)) throw ConfigError("eps must be positive");
  if (head_extra_inputs != 0 && head_extra_inputs != 2) {
    throw ConfigError("head_extra_inputs must be 0 or 2");
  }
}

std::size_t parameter_count(const VitConfig& c) {
  c.validate();
  const std::size_t d = c.embed_dim, h = c.mlp_hidden();
  const std::size_t per_block = 2 * d            // ln1
                                + 4 * (d * d + d)  // q, k, v, out
                                + 2 * d          // ln2
                                + d * h + h      // mlp w1, b1
                                + h * d + d;     // mlp w2, b2
  return c.patch_dim() * d + d  // patch projection
         + d                    // class token
         + c.num_tokens() * d   // positional embeddings
         + c.depth * per_block  //
         + 2 * d                // head LayerNorm
         + c.head_input_dim() * c.num_classes + c.num_classes;
}

std::size_t parameter_count(const VitParams& params) {
  std::size_t n = 0;
  visit_weights(params, [&](const std::string&, const Tensor& t) { n += t.size(); });
  return n;
}

namespace {

VitParams make_vit(const VitConfig& c, SeededRng* rng) {
  c.validate();
  const std::size_t d = c.embed_dim, h = c.mlp_hidden();
  auto proj = [&](std::size_t rows, std::size_t cols) {
    Tensor t(Shape{rows, cols});
    if (rng) {
      for (double& v : t.values()) v = rng->truncated_normal(0.02);
    }
    return t;
  };
  auto zeros = [](std::size_t n) { return Tensor(Shape{n}); };
  auto ones = [](std::size_t n) { return Tensor::full(Shape{n}, 1.0); };

  VitParams p;
  p.patch_w = proj(c.patch_dim(), d);
  p.patch_b = zeros(d);
  p.cls_token = zeros(d);
  p.pos_embed = Tensor(Shape{c.num_tokens(), d});
  for (std::size_t i = 0; i < c.depth; ++i) {
    BlockWeights<Tensor> b;
    b.ln1_gamma = ones(d);
    b.ln1_beta = zeros(d);
    b.q_w = proj(d, d);
    b.q_b = zeros(d);
    b.k_w = proj(d, d);
    b.k_b = zeros(d);
    b.v_w = proj(d, d);
    b.v_b = zeros(d);
    b.out_w = proj(d, d);
    b.out_b = zeros(d);
    b.ln2_gamma = ones(d);
    b.ln2_beta = zeros(d);
    b.mlp_w1 = proj(d, h);
    b.mlp_b1 = zeros(h);
    b.mlp_w2 = proj(h, d);
    b.mlp_b2 = zeros(d);
    p.blocks.push_back(std::move(b));
  }
  p.head_ln_gamma = ones(d);
  p.head_ln_beta = zeros(d);
  p.head_w = proj(c.head_input_dim(), c.num_classes);
  p.head_b = zeros(c.num_classes);
  return p;
}

}  // namespace

VitParams init_vit(const VitConfig& config, std::uint64_t seed) {
  SeededRng rng(seed);
  return make_vit(config, &rng);
}

VitParams zero_vit(const VitConfig& config) { return make_vit(config, nullptr); }

VitBinding bind(Tape& tape, const VitParams& params) {
  VitBinding out;
  out.blocks.resize(params.blocks.size());
  std::vector<Var*> slots;
  visit_weights(out, [&](const std::string&, Var& v) { slots.push_back(&v); });
  std::size_t i = 0;
  visit_weights(params, [&](const std::string&, const Tensor& t) { *slots[i++] = tape.leaf(t); });
  return out;
}

void collect_gradients(const Tape& tape, const VitBinding& binding, VitParams& params) {
  std::vector<Var> vars;
  visit_weights(binding, [&](const std::string&, const Var& v) { vars.push_back(v); });
  std::size_t i = 0;
  visit_weights(params, [&](const std::string&, Tensor& t) {
    auto src = tape.grad(vars[i++]);
    auto dst = t.mutable_grad();
    std::copy(src.begin(), src.end(), dst.begin());
  });
}

Tensor patchify(const Image& image, std::size_t patch_size) {
  if (patch_size == 0 || !image.square() || image.height % patch_size != 0) {
    throw ConfigError("patchify: " + std::to_string(image.height) + "x" + std::to_string(image.width) +
                      " image is not divisible into " + std::to_string(patch_size) + " px patches");
  }
  const std::size_t grid = image.height / patch_size;
  const std::size_t pdim = 3 * patch_size * patch_size;
  Tensor out(Shape{grid * grid, pdim});
  for (std::size_t gy = 0; gy < grid; ++gy) {
    for (std::size_t gx = 0; gx < grid; ++gx) {
      double* dst = out.values().data() + (gy * grid + gx) * pdim;
      for (std::size_t y = 0; y < patch_size; ++y) {
        const double* src = &image.pixels[((gy * patch_size + y) * image.width + gx * patch_size) * 3];
        std::copy(src, src + 3 * patch_size, dst + y * 3 * patch_size);
      }
    }
  }
  return out;
}

Image unpatchify(const Tensor& patches, std::size_t image_size, std::size_t patch_size) {
  if (patch_size == 0 || image_size % patch_size != 0) throw ConfigError("unpatchify: indivisible size");
  const std::size_t grid = image_size / patch_size;
  const std::size_t pdim = 3 * patch_size * patch_size;
  if (patches.rank() != 2 || patches.rows() != grid * grid || patches.cols() != pdim) {
    throw DimensionError("unpatchify: got " + shape_string(patches.shape()));
  }
  Image out(image_size, image_size);
  for (std::size_t gy = 0; gy < grid; ++gy) {
    for (std::size_t gx = 0; gx < grid; ++gx) {
      const double* src = patches.values().data() + (gy * grid + gx) * pdim;
      for (std::size_t y = 0; y < patch_size; ++y) {
        double* dst = &out.pixels[((gy * patch_size + y) * image_size + gx * patch_size) * 3];
        std::copy(src + y * 3 * patch_size, src + (y + 1) * 3 * patch_size, dst);
      }
    }
  }
  return out;
}

Var embed(Var patches, const VitBinding& w) {
  if (patches.value().cols() != w.patch_w.value().rows()) {
    throw DimensionError("embed: patches " + shape_string(patches.shape()) + " vs projection " +
                         shape_string(w.patch_w.shape()));
  }
  if (w.pos_embed.value().rows() != patches.value().rows() + 1) {
    throw DimensionError("embed: " + std::to_string(patches.value().rows()) +
                         " patches vs positional embeddings " + shape_string(w.pos_embed.shape()));
  }
  Var projected = ad::add_bias(ad::matmul(patches, w.patch_w), w.patch_b);
  const Var rows[] = {w.cls_token, projected};
  return ad::add(ad::concat_rows(rows), w.pos_embed);
}

Var attention(Var x, const BlockWeights<Var>& b, std::size_t num_heads,
              std::vector<Tensor>* attention_weights) {
  const std::size_t d_model = x.value().cols();
  if (num_heads == 0 || d_model % num_heads != 0) {
    throw DimensionError("attention: width " + std::to_string(d_model) + " not divisible by " +
                         std::to_string(num_heads) + " heads");
  }
  const std::size_t d = d_model / num_heads;
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
  Var q = ad::add_bias(ad::matmul(x, b.q_w), b.q_b);
  Var k = ad::add_bias(ad::matmul(x, b.k_w), b.k_b);
  Var v = ad::add_bias(ad::matmul(x, b.v_w), b.v_b);
  std::vector<Var> heads;
  heads.reserve(num_heads);
  for (std::size_t h = 0; h < num_heads; ++h) {
    Var qh = num_heads == 1 ? q : ad::slice_cols(q, h * d, (h + 1) * d);
    Var kh = num_heads == 1 ? k : ad::slice_cols(k, h * d, (h + 1) * d);
    Var vh = num_heads == 1 ? v : ad::slice_cols(v, h * d, (h + 1) * d);
    Var weights = ad::softmax(ad::scale(ad::matmul_transposed(qh, kh), inv_sqrt_d));
    if (attention_weights) attention_weights->push_back(weights.value());
    heads.push_back(ad::matmul(weights, vh));
  }
  Var merged = num_heads == 1 ? heads[0] : ad::concat_cols(heads);
  return ad::add_bias(ad::matmul(merged, b.out_w), b.out_b);
}

Var mlp(Var x, const BlockWeights<Var>& b) {
  Var hidden = ad::gelu(ad::add_bias(ad::matmul(x, b.mlp_w1), b.mlp_b1));
  return ad::add_bias(ad::matmul(hidden, b.mlp_w2), b.mlp_b2);
}

Var encoder_block(Var x, const BlockWeights<Var>& b, const VitConfig& config) {
  Var u = ad::add(x, attention(ad::layer_norm(x, b.ln1_gamma, b.ln1_beta, config.eps), b, config.num_heads));
  return ad::add(u, mlp(ad::layer_norm(u, b.ln2_gamma, b.ln2_beta, config.eps), b));
}

Var classification_head(Var tokens, const VitBinding& w, const VitConfig& config,
                        std::optional<GeoUV> geo) {
  if (geo.has_value() != (config.head_extra_inputs == 2)) {
    throw ConfigError(geo ? "coordinates given but the head was built without geo inputs"
                          : "head expects coordinates but none were given");
  }
  Var cls = ad::layer_norm(ad::row(tokens, 0), w.head_ln_gamma, w.head_ln_beta, config.eps);
  if (geo) cls = concat_geo_head(cls, *geo);
  return ad::add_bias(ad::matmul(cls, w.head_w), w.head_b);
}

Var forward(Tape& tape, const Image& image, const VitConfig& config, const VitBinding& w,
            std::optional<GeoUV> geo) {
  if (image.height != config.image_size || image.width != config.image_size) {
    throw ConfigError("forward: image is " + std::to_string(image.height) + "x" +
                      std::to_string(image.width) + ", model expects " +
                      std::to_string(config.image_size) + "x" + std::to_string(config.image_size));
  }
  if (w.blocks.size() != config.depth) throw ConfigError("forward: parameter depth does not match config");
  Var x = embed(tape.constant(patchify(image, config.patch_size)), w);
  for (const auto& block : w.blocks) x = encoder_block(x, block, config);
  return classification_head(x, w, config, geo);
}

Tensor forward(const Image& image, const VitConfig& config, const VitParams& params,
               std::optional<GeoUV> geo) {
  Tape tape;
  tape.set_grad_enabled(false);
  VitBinding w = bind(tape, params);
  Var logits = forward(tape, image, config, w, geo);
  return logits.value().reshaped(Shape{config.num_classes});
}

}  // namespace forestvit
