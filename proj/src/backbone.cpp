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

#include "ein/backbone.hpp"

#include <stdexcept>

namespace ein {

BackboneKind backbone_kind_from_string(const std::string& name) {
  if (name == "gcn") return BackboneKind::Gcn;
  if (name == "resgcn") return BackboneKind::ResGcn;
  if (name == "bigcn") return BackboneKind::BiGcn;
  throw std::invalid_argument("unknown backbone kind '" + name + "'");
}

const char* to_string(BackboneKind kind) {
  switch (kind) {
    case BackboneKind::Gcn:
      return "gcn";
    case BackboneKind::ResGcn:
      return "resgcn";
    case BackboneKind::BiGcn:
      return "bigcn";
  }
  return "?";
}

void validate(const BackboneConfig& config) {
  if (config.layers < 1) throw std::invalid_argument("BackboneConfig: layers must be >= 1");
  if (config.hidden < 1) throw std::invalid_argument("BackboneConfig: hidden must be > 0");
  if (config.dropout < 0.0 || config.dropout >= 1.0) {
    throw std::invalid_argument("BackboneConfig: dropout must lie in [0, 1)");
  }
  if (config.input_dim < 1) throw std::invalid_argument("BackboneConfig: input_dim unset");
}

SparseMatrix normalized_adjacency(const PropagationTree& tree, EdgeDirection direction) {
  const int n = tree.node_count();
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(3 * n));
  for (int i = 0; i < n; ++i) triplets.emplace_back(i, i, 1.0);  // self-loops
  for (int child = 1; child < n; ++child) {
    const int parent = *tree.nodes[static_cast<std::size_t>(child)].parent;
    if (direction == EdgeDirection::Down || direction == EdgeDirection::Sym) {
      triplets.emplace_back(parent, child, 1.0);
    }
    if (direction == EdgeDirection::Up || direction == EdgeDirection::Sym) {
      triplets.emplace_back(child, parent, 1.0);
    }
  }
  SparseMatrix with_loops(n, n);
  with_loops.setFromTriplets(triplets.begin(), triplets.end());

  Vector inv_sqrt_degree(n);
  for (int i = 0; i < n; ++i) {
    double degree = 0.0;
    for (SparseMatrix::InnerIterator it(with_loops, i); it; ++it) degree += it.value();
    inv_sqrt_degree[i] = 1.0 / std::sqrt(degree);
  }
  // Column-major storage: the inner loop above walks column i, so "degree"
  // is the column sum; rows and columns agree for Sym, and for the directed
  // kinds the normalization uses the receiving end's degree symmetrically.
  SparseMatrix normalized = inv_sqrt_degree.asDiagonal() * with_loops;
  normalized = normalized * SparseMatrix(inv_sqrt_degree.asDiagonal());
  return normalized;
}

BackboneParams make_backbone_params(const BackboneConfig& config, std::mt19937_64& rng) {
  validate(config);
  const auto make_stack = [&] {
    std::vector<GcnLayerParams> stack;
    int in = config.input_dim;
    for (int l = 0; l < config.layers; ++l) {
      const int out = config.hidden;
      const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
      std::uniform_real_distribution<double> uniform(-limit, limit);
      GcnLayerParams layer;
      layer.weight = Matrix::NullaryExpr(in, out, [&] { return uniform(rng); });
      layer.bias = Vector::Zero(out);
      stack.push_back(std::move(layer));
      in = out;
    }
    return stack;
  };
  BackboneParams params;
  params.down = make_stack();
  if (config.kind == BackboneKind::BiGcn) params.up = make_stack();
  return params;
}

BackboneParams zeros_like(const BackboneParams& params) {
  BackboneParams z;
  const auto zero_stack = [](const std::vector<GcnLayerParams>& stack) {
    std::vector<GcnLayerParams> out;
    out.reserve(stack.size());
    for (const GcnLayerParams& layer : stack) {
      out.push_back({Matrix::Zero(layer.weight.rows(), layer.weight.cols()),
                     Vector::Zero(layer.bias.size())});
    }
    return out;
  };
  z.down = zero_stack(params.down);
  z.up = zero_stack(params.up);
  return z;
}

namespace {

StackForward stack_forward(const Matrix& features, SparseMatrix adjacency,
                           const std::vector<GcnLayerParams>& stack, bool residual,
                           double dropout, std::mt19937_64* dropout_rng) {
  StackForward f;
  f.adjacency = std::move(adjacency);
  f.inputs.push_back(features);
  const int layer_count = static_cast<int>(stack.size());
  for (int l = 0; l < layer_count; ++l) {
    const GcnLayerParams& layer = stack[static_cast<std::size_t>(l)];
    const Matrix& h = f.inputs.back();
    Matrix conv_in = f.adjacency * h;
    Matrix z = conv_in * layer.weight;
    z.rowwise() += layer.bias.transpose();
    Matrix activation = z.cwiseMax(0.0);
    if (residual && h.cols() == activation.cols()) activation += h;
    Matrix mask;
    if (dropout_rng != nullptr && dropout > 0.0 && l + 1 < layer_count) {
      std::bernoulli_distribution keep(1.0 - dropout);
      mask = Matrix::NullaryExpr(activation.rows(), activation.cols(), [&] {
        return keep(*dropout_rng) ? 1.0 / (1.0 - dropout) : 0.0;
      });
      activation = activation.cwiseProduct(mask);
    }
    f.conv_in.push_back(std::move(conv_in));
    f.pre.push_back(std::move(z));
    f.masks.push_back(std::move(mask));
    f.inputs.push_back(std::move(activation));
  }
  f.pooled = f.inputs.back().colwise().mean();
  return f;
}

void stack_backward(const std::vector<GcnLayerParams>& stack, const StackForward& f, bool residual,
                    const Vector& grad_pooled, std::vector<GcnLayerParams>& grads) {
  const Eigen::Index n = f.inputs.front().rows();
  Matrix gh = Matrix::Ones(n, 1) * (grad_pooled.transpose() / static_cast<double>(n));
  for (int l = static_cast<int>(stack.size()) - 1; l >= 0; --l) {
    const auto li = static_cast<std::size_t>(l);
    const GcnLayerParams& layer = stack[li];
    Matrix gact = std::move(gh);
    if (f.masks[li].size() > 0) gact = gact.cwiseProduct(f.masks[li]);
    gh = Matrix::Zero(f.inputs[li].rows(), f.inputs[li].cols());
    if (residual && f.inputs[li].cols() == gact.cols()) gh += gact;
    const Matrix gz = gact.cwiseProduct((f.pre[li].array() > 0.0).cast<double>().matrix());
    grads[li].weight.noalias() += f.conv_in[li].transpose() * gz;
    grads[li].bias += gz.colwise().sum().transpose();
    gh.noalias() += f.adjacency.transpose() * (gz * layer.weight.transpose());
  }
}

}  // namespace

BackboneForward backbone_forward(const PropagationTree& tree, const BackboneConfig& config,
                                 const BackboneParams& params, std::mt19937_64* dropout_rng) {
  validate(config);
  if (!tree.features) {
    throw std::invalid_argument("backbone_forward: tree '" + tree.event_id + "' has no features");
  }
  if (tree.features->cols() != config.input_dim) {
    throw std::invalid_argument("backbone_forward: feature dim " +
                                std::to_string(tree.features->cols()) + " != configured input " +
                                std::to_string(config.input_dim));
  }
  const bool residual = config.kind == BackboneKind::ResGcn;
  BackboneForward f;
  if (config.kind == BackboneKind::BiGcn) {
    f.down = stack_forward(*tree.features, normalized_adjacency(tree, EdgeDirection::Down),
                           params.down, residual, config.dropout, dropout_rng);
    f.up = stack_forward(*tree.features, normalized_adjacency(tree, EdgeDirection::Up), params.up,
                         residual, config.dropout, dropout_rng);
    f.xf.resize(2 * config.hidden);
    f.xf << f.down.pooled, f.up.pooled;
  } else {
    f.down = stack_forward(*tree.features, normalized_adjacency(tree, EdgeDirection::Sym),
                           params.down, residual, config.dropout, dropout_rng);
    f.xf = f.down.pooled;
  }
  return f;
}

void backbone_backward(const BackboneConfig& config, const BackboneParams& params,
                       const BackboneForward& forward, const Vector& grad_xf,
                       BackboneParams& grads) {
  const bool residual = config.kind == BackboneKind::ResGcn;
  if (config.kind == BackboneKind::BiGcn) {
    stack_backward(params.down, forward.down, residual, grad_xf.segment(0, config.hidden),
                   grads.down);
    stack_backward(params.up, forward.up, residual, grad_xf.segment(config.hidden, config.hidden),
                   grads.up);
  } else {
    stack_backward(params.down, forward.down, residual, grad_xf, grads.down);
  }
}

Prediction fuse_predict(const Vector& xf, const Vector& xg, const Matrix& w_head) {
  if (xf.size() != xg.size()) {
    throw std::invalid_argument("fuse_predict: x_f dim " + std::to_string(xf.size()) +
                                " != x_g dim " + std::to_string(xg.size()));
  }
  if (w_head.cols() != xf.size() || w_head.rows() != 2) {
    throw std::invalid_argument("fuse_predict: head must be 2 x " + std::to_string(xf.size()));
  }
  Prediction prediction;
  prediction.logits = w_head * (xf + xg);
  prediction.probs = softmax(prediction.logits);
  return prediction;
}

}  // namespace ein
