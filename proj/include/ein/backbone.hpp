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

#include <random>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "ein/tree.hpp"

namespace ein {

using SparseMatrix = Eigen::SparseMatrix<double>;

enum class BackboneKind { Gcn, ResGcn, BiGcn };

BackboneKind backbone_kind_from_string(const std::string& name);
const char* to_string(BackboneKind kind);

struct BackboneConfig {
  BackboneKind kind = BackboneKind::Gcn;
  int layers = 2;
  int hidden = 64;
  double dropout = 0.2;
  int input_dim = 0;  // bound to the feature dimension at model construction

  /// Pooled output dimension: hidden, or 2*hidden for the bidirectional kind.
  int output_dim() const { return kind == BackboneKind::BiGcn ? 2 * hidden : hidden; }
};

void validate(const BackboneConfig& config);

enum class EdgeDirection { Down, Up, Sym };

/// Degree-normalized adjacency D^{-1/2} (A + I) D^{-1/2} over parent->child
/// edges (Down), child->parent (Up), or their union (Sym).
SparseMatrix normalized_adjacency(const PropagationTree& tree, EdgeDirection direction);

struct GcnLayerParams {
  Matrix weight;  // in x out
  Vector bias;    // out
};

struct BackboneParams {
  std::vector<GcnLayerParams> down;  // the only stack for gcn/resgcn
  std::vector<GcnLayerParams> up;    // second stack of bigcn
};

BackboneParams make_backbone_params(const BackboneConfig& config, std::mt19937_64& rng);
BackboneParams zeros_like(const BackboneParams& params);

/// Forward cache of one convolution stack.
struct StackForward {
  SparseMatrix adjacency;
  std::vector<Matrix> inputs;   // h_l entering layer l (inputs[0] = X), size L+1
  std::vector<Matrix> pre;      // pre-activations z_l, size L
  std::vector<Matrix> conv_in;  // adjacency * h_l, cached for the weight grads
  std::vector<Matrix> masks;    // inverted-dropout masks; empty rows when inactive
  Vector pooled;                // column means of the last activation
};

struct BackboneForward {
  StackForward down;
  StackForward up;  // bigcn only
  Vector xf;
};

/// Stacked graph convolutions with ReLU and mean pooling; resgcn adds
/// identity skips where layer dimensions match; bigcn runs separate stacks
/// over the Down and Up adjacencies and concatenates the pooled outputs.
/// Dropout is active only when a dropout rng is supplied (training mode).
BackboneForward backbone_forward(const PropagationTree& tree, const BackboneConfig& config,
                                 const BackboneParams& params,
                                 std::mt19937_64* dropout_rng = nullptr);

void backbone_backward(const BackboneConfig& config, const BackboneParams& params,
                       const BackboneForward& forward, const Vector& grad_xf,
                       BackboneParams& grads);

struct Prediction {
  Eigen::Vector2d logits;
  Eigen::Vector2d probs;  // (non-rumor, rumor)
};

/// y-hat = softmax(W_l (x_f + x_g)).
Prediction fuse_predict(const Vector& xf, const Vector& xg, const Matrix& w_head);

}  // namespace ein
