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

#include "forestvit/model.hpp"

#include "forestvit/autodiff.hpp"
#include "forestvit/errors.hpp"
#include "forestvit/ops.hpp"

namespace forestvit {

Model Model::init(const TrainConfig& config) {
  config.validate();
  Model m;
  m.kind_ = config.model;
  m.vit_ = config.vit;
  m.coord_inputs_ = config.geo == GeoMode::kHeadConcat;
  m.vit_.head_extra_inputs = m.coord_inputs_ ? 2 : 0;
  if (m.kind_ == ModelKind::kVit) {
    m.vit_params_ = init_vit(m.vit_, config.seed);
  } else {
    const std::size_t f = m.vit_.image_size * m.vit_.image_size * 3 + m.vit_.head_extra_inputs;
    m.lr_ = init_lr(f, m.vit_.num_classes);
  }
  return m;
}

Model Model::zeros(const TrainConfig& config) {
  Model m = init(config);
  if (m.kind_ == ModelKind::kVit) m.vit_params_ = zero_vit(m.vit_);
  return m;
}

std::vector<std::pair<std::string, Tensor*>> Model::parameters() {
  std::vector<std::pair<std::string, Tensor*>> out;
  if (kind_ == ModelKind::kVit) {
    visit_weights(vit_params_, [&](const std::string& name, Tensor& t) { out.emplace_back(name, &t); });
  } else {
    out.emplace_back("lr.w", &lr_.w);
    out.emplace_back("lr.b", &lr_.b);
  }
  return out;
}

std::vector<std::pair<std::string, const Tensor*>> Model::parameters() const {
  std::vector<std::pair<std::string, const Tensor*>> out;
  for (auto& [name, t] : const_cast<Model*>(this)->parameters()) out.emplace_back(name, t);
  return out;
}

std::size_t Model::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : parameters()) n += p.second->size();
  return n;
}

std::vector<double> Model::lr_features(const Image& image, std::optional<GeoUV> geo) const {
  if (image.height != vit_.image_size || image.width != vit_.image_size) {
    throw ConfigError("model expects " + std::to_string(vit_.image_size) + " px images, got " +
                      std::to_string(image.height) + "x" + std::to_string(image.width));
  }
  if (coord_inputs_ != geo.has_value()) {
    throw ConfigError(coord_inputs_ ? "model needs coordinates for head concat" : "model takes no coordinates");
  }
  std::vector<double> x = flatten(image);
  if (geo) {
    x.push_back(geo->u);
    x.push_back(geo->v);
  }
  return x;
}

Tensor Model::logits(const Image& image, std::optional<GeoUV> geo) const {
  if (kind_ == ModelKind::kVit) return forward(image, vit_, vit_params_, geo);
  return lr_forward(lr_features(image, geo), lr_);
}

double Model::loss_and_gradient(const Image& image, std::size_t label, std::optional<GeoUV> geo,
                                std::vector<std::vector<double>>& grads, double weight,
                                std::size_t* predicted) const {
  if (kind_ == ModelKind::kLr) {
    const std::vector<double> x = lr_features(image, geo);
    const Tensor z = lr_forward(x, lr_);
    const double loss = ops::cross_entropy(z, label);
    if (predicted) *predicted = ops::argmax(z.values());
    const std::size_t c = z.size();
    std::vector<double> p(c);
    ops::softmax_row(z.values(), p);
    p[label] -= 1.0;
    for (double& v : p) v *= weight;
    auto& gw = grads[0];
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i] == 0.0) continue;
      double* row = gw.data() + i * c;
      for (std::size_t j = 0; j < c; ++j) row[j] += x[i] * p[j];
    }
    for (std::size_t j = 0; j < c; ++j) grads[1][j] += p[j];
    return loss;
  }
  Tape tape;
  const VitBinding w = bind(tape, vit_params_);
  const Var logits = forward(tape, image, vit_, w, geo);
  const Var loss = ad::cross_entropy(logits, label);
  if (predicted) *predicted = ops::argmax(logits.value().values());
  tape.backward(loss);
  std::size_t i = 0;
  visit_weights(w, [&](const std::string&, const Var& v) {
    auto g = tape.grad(v);
    auto& dst = grads[i++];
    for (std::size_t k = 0; k < g.size(); ++k) dst[k] += weight * g[k];
  });
  return loss.value().item();
}

}  // namespace forestvit
