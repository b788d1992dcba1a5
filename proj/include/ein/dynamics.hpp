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

#include <cstdint>
#include <random>
#include <vector>

#include "ein/io.hpp"
#include "ein/tree.hpp"

namespace ein {

/// Transition rates of the environmental Unknown-Support-Denial model.
/// The environment rate e is a universal scaling factor and stays fixed at 1.
struct EusdParams {
  double alpha = 0.25;  // Unknown -> Support
  double beta = 0.25;   // Unknown -> Denial
  double e = 1.0;
};

/// Throws unless 0 < alpha, 0 < beta and alpha + beta < 1 (discrete
/// stability) and e == 1.
void validate(const EusdParams& params);

struct PopulationState {
  double u = 0.0;
  double s = 0.0;
  double d = 0.0;

  double total() const { return u + s + d; }
};

/// One unit-stage forward-difference step of the eUSD model:
/// U' = U - aU - bU, S' = S + aU, D' = D + bU. Conserves U+S+D.
PopulationState step_eusd(const PopulationState& state, const EusdParams& params);

/// Exact continuous solution of the eUSD system at time t.
PopulationState solve_eusd_closed_form(const PopulationState& initial, const EusdParams& params,
                                       double t);

/// One forward-difference step of the plain USD model on fractional states
/// (u + s + d = 1): u' = u - a*u*s - b*u*d, s' = s + a*u*s, d' = d + b*u*d.
/// A clamp guards u' >= 0 by rescaling the two outflows; clamp_events counts
/// activations (never expected for fractions with rates in (0,1)).
PopulationState step_usd(const PopulationState& fractions, const EusdParams& params,
                         std::uint64_t* clamp_events = nullptr);

/// One class regime of the synthetic generator. States are drawn Support
/// with probability alpha/(alpha+beta); these rates are regime constants,
/// not EusdParams (degenerate values such as beta = 0 are allowed).
struct GeneratorClassSpec {
  double alpha = 0.6;
  double beta = 0.2;
  int nodes_min = 10;
  int nodes_max = 40;
  int max_depth = 5;
};

struct GeneratorConfig {
  std::vector<GeneratorClassSpec> classes = {
      {0.6, 0.2, 20, 60, 6},  // class 0, support-dominated
      {0.2, 0.6, 10, 40, 3},  // class 1, denial-dominated
  };
  int feature_dim = 16;
  double noise_sigma = 1.0;
  double pattern_scale = 1.0;
  // Optional explicit patterns; must be orthogonal and of feature_dim size.
  // Empty means unit vectors along axes 0 (support) and 1 (denial), scaled.
  std::vector<double> pattern_support;
  std::vector<double> pattern_denial;
};

void validate(const GeneratorConfig& config);

/// Grows one random cascade for the given class: nodes attach uniformly at
/// random below max depth, states are i.i.d. regime draws, stances are the
/// XOR-consistent preimages, features are the state's pattern vector plus
/// Gaussian noise. Deterministic for a fixed rng state.
TreeRecord generate_synthetic_tree(const GeneratorConfig& config, int class_label,
                                   std::mt19937_64& rng);

/// Draws `count` cascades with uniformly random class labels, one derived
/// rng stream per tree.
std::vector<TreeRecord> generate_synthetic_dataset(const GeneratorConfig& config, int count,
                                                   std::uint64_t seed);

}  // namespace ein
