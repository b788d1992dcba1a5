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

// Assertion-free helpers shared by the unit and acceptance suites.

#pragma once

#include <functional>
#include <random>
#include <string>
#include <vector>

#include "ein/model.hpp"
#include "ein/tree.hpp"

namespace ein::testing {

/// Uniform random tree: node v attaches to a uniform ancestor candidate,
/// subject to the depth cap.
inline PropagationTree random_tree(int node_count, int max_depth, std::mt19937_64& rng,
                                   const std::vector<std::string>& text_pool = {}) {
  std::vector<RawNode> raw(static_cast<std::size_t>(node_count));
  std::vector<int> depths(static_cast<std::size_t>(node_count), 0);
  std::vector<int> eligible{0};
  raw[0] = RawNode{0, std::nullopt, "root", std::nullopt};
  for (int v = 1; v < node_count; ++v) {
    std::uniform_int_distribution<std::size_t> pick(0, eligible.size() - 1);
    const int parent = eligible[pick(rng)];
    std::string text = "post " + std::to_string(v);
    if (!text_pool.empty()) {
      std::uniform_int_distribution<std::size_t> pool(0, text_pool.size() - 1);
      text = text_pool[pool(rng)] + " #" + std::to_string(v);
    }
    raw[static_cast<std::size_t>(v)] = RawNode{v, parent, std::move(text), std::nullopt};
    depths[static_cast<std::size_t>(v)] = depths[static_cast<std::size_t>(parent)] + 1;
    if (depths[static_cast<std::size_t>(v)] < max_depth) eligible.push_back(v);
  }
  return build_tree("random", 0, std::move(raw));
}

struct GradientMismatch {
  std::string name;
  Eigen::Index index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double relative_error = 0.0;
};

/// Central finite differences over every entry of every parameter view.
/// `loss` must evaluate the model's scalar loss at the current parameters.
/// Entries agree when |a - n| <= tol * max(|a|, |n|) or both are below
/// `absolute_floor`. Returns the mismatches.
inline std::vector<GradientMismatch> finite_difference_check(
    const std::vector<ParamView>& views, const std::function<double()>& loss, double step = 1e-5,
    double tol = 1e-3, double absolute_floor = 1e-7) {
  std::vector<GradientMismatch> mismatches;
  for (const ParamView& view : views) {
    for (Eigen::Index i = 0; i < view.size(); ++i) {
      const double saved = view.value[i];
      view.value[i] = saved + step;
      const double up = loss();
      view.value[i] = saved - step;
      const double down = loss();
      view.value[i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double analytic = view.grad[i];
      const double scale = std::max(std::abs(analytic), std::abs(numeric));
      if (scale < absolute_floor) continue;
      const double relative = std::abs(analytic - numeric) / scale;
      if (relative > tol) {
        mismatches.push_back({view.name, i, analytic, numeric, relative});
      }
    }
  }
  return mismatches;
}

}  // namespace ein::testing
