// Copyright 2026 The EIN Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <optional>

#include <nlohmann/json.hpp>

#include "ein/backbone.hpp"
#include "ein/encoder.hpp"

namespace ein {

struct ModelConfig {
  BackboneConfig backbone;
  DynamicsKind dynamics = DynamicsKind::Eusd;
  bool use_encoder = true;  // false: vanilla backbone baseline, x_g omitted
  double alpha0 = 0.5;
  double beta0 = 0.5;
};

/// The full detector: epidemiology-informed encoder fused with a graph
/// backbone through a shared linear decoding head.
struct Model {
  ModelConfig config;
  EncoderParams encoder;
  BackboneParams backbone;
  Matrix head;  // 2 x pooled dim

  static Model init(const ModelConfig& config, std::uint64_t seed);
};

struct ModelGrads {
  EncoderParams encoder;
  BackboneParams backbone;
  Matrix head;

  static ModelGrads zeros_like(const Model& model);
  void set_zero();
};

/// Flat view over one named parameter tensor and its gradient; Eigen dense
/// storage is contiguous, so optimizer and checkpoint code can treat every
/// tensor as a single span.
struct ParamView {
  std::string name;
  double* value = nullptr;
  double* grad = nullptr;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;

  Eigen::Index size() const { return rows * cols; }
};

/// All trainable tensors, in a stable order. Encoder tensors are omitted
/// when the encoder is disabled.
std::vector<ParamView> parameter_views(Model& model, ModelGrads& grads);

struct TreeForward {
  BackboneForward backbone;
  std::optional<EncoderForward> encoder;
  Prediction prediction;
};

/// Full forward pass over one featurized tree. Dropout is active only when
/// a dropout rng is supplied.
TreeForward model_forward(const Model& model, const PropagationTree& tree,
                          std::mt19937_64* dropout_rng = nullptr);

/// Rumor-class probability.
double rumor_score(const Model& model, const PropagationTree& tree);

void save_checkpoint(const std::filesystem::path& path, Model& model,
                     const nlohmann::json& run_config, std::uint64_t seed);

struct Checkpoint {
  Model model;
  nlohmann::json run_config;
  std::uint64_t seed = 0;
};

Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace ein
