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
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "forestvit/config.hpp"
#include "forestvit/geo.hpp"
#include "forestvit/image.hpp"
#include "forestvit/logistic.hpp"
#include "forestvit/vit.hpp"

namespace forestvit {

// Either classifier behind one interface. With geo head-concat the
// coordinates enter after the encoder (ViT) or as two extra features (LR).
class Model {
 public:
  Model() = default;

  // ViT: init_vit(seed). LR: zero weights over H*W*3 (+2) features.
  static Model init(const TrainConfig& config);
  // Same shapes as init() with every weight zero (LayerNorm gammas 1).
  static Model zeros(const TrainConfig& config);

  ModelKind kind() const { return kind_; }
  // ViT shape actually used, with head_extra_inputs set from the geo mode.
  const VitConfig& vit_config() const { return vit_; }
  std::size_t num_classes() const { return vit_.num_classes; }
  bool takes_coordinates() const { return coord_inputs_; }

  // Named parameters in canonical order.
  std::vector<std::pair<std::string, Tensor*>> parameters();
  std::vector<std::pair<std::string, const Tensor*>> parameters() const;
  std::size_t parameter_count() const;

  // Raw logits (length C) for a preprocessed image.
  Tensor logits(const Image& image, std::optional<GeoUV> geo) const;

  // Cross-entropy of one sample; adds weight * dLoss/dParam into grads,
  // which is indexed like parameters(). The argmax class is stored in
  // predicted when it is non-null.
  double loss_and_gradient(const Image& image, std::size_t label, std::optional<GeoUV> geo,
                           std::vector<std::vector<double>>& grads, double weight,
                           std::size_t* predicted = nullptr) const;

  const VitParams& vit_params() const { return vit_params_; }
  const LrParams& lr_params() const { return lr_; }

 private:
  std::vector<double> lr_features(const Image& image, std::optional<GeoUV> geo) const;

  ModelKind kind_ = ModelKind::kVit;
  VitConfig vit_;
  bool coord_inputs_ = false;
  VitParams vit_params_;
  LrParams lr_;
};

}  // namespace forestvit
