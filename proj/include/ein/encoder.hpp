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
#include <vector>

#include "ein/tree.hpp"

namespace ein {

/// Which discrete dynamics the encoder unrolls: the environmental model
/// (transitions driven by the root environment alone) or the plain USD
/// variant (transitions bilinear in the current Support/Denial embeddings).
enum class DynamicsKind { Eusd, Usd };

DynamicsKind dynamics_kind_from_string(const std::string& name);
const char* to_string(DynamicsKind kind);

/// Learnable state of the epidemiology-informed encoder. The transition
/// rates are stored unconstrained and pass through a clamped logistic, so
/// alpha and beta stay inside (1e-4, 1 - 1e-4) under any update.
struct EncoderParams {
  double alpha_raw = 0.0;
  double beta_raw = 0.0;
  Vector w_u0;                    // h
  Vector b_s, b_d;                // h
  Matrix w_u, w_s, w_d;           // h x h
  Matrix w_x;                     // d_out x 3h
  Vector score_u, score_s, score_d;  // h, reduce state embeddings to scalars

  int embedding_dim() const { return static_cast<int>(w_u0.size()); }
  int output_dim() const { return static_cast<int>(w_x.rows()); }
};

inline constexpr double kRateFloor = 1e-4;

double rate_alpha(const EncoderParams& params);
double rate_beta(const EncoderParams& params);

/// Preimage of `rate` under the clamped logistic, for initializing the raw
/// parameters (0 and 1 map to the clamp boundaries).
double raw_from_rate(double rate);

/// Fresh parameters with symmetric Support/Denial branches: the twin
/// matrices, biases, and score projections start identical, so any early
/// S-vs-D asymmetry must come through alpha and beta.
EncoderParams make_encoder_params(int embedding_dim, int output_dim, double alpha0, double beta0,
                                  std::mt19937_64& rng);

EncoderParams zeros_like(const EncoderParams& params);

/// State embeddings of one stage.
struct EncoderState {
  Vector u, s, d;
};

/// Forward cache of one encoder pass: all stage states plus the
/// intermediate products the backward sweep needs.
struct EncoderForward {
  int stages = 0;       // T
  double node_count = 0.0;  // u-hat
  double alpha = 0.0, beta = 0.0;
  DynamicsKind dynamics = DynamicsKind::Eusd;
  std::vector<EncoderState> states;  // t = 0..T
  std::vector<Vector> mu;            // eusd: W_u u_t          (t = 0..T-1)
  std::vector<Vector> us, ud;        // usd: u_t*s_t, u_t*d_t  (elementwise)
  std::vector<Vector> mus, mud;      // usd: W_u us_t, W_u ud_t
  Vector xg;                          // d_out
  std::vector<Vector3> scores;       // t = 1..T (index t-1)
  std::vector<Vector3> phat;         // softmaxed scores
};

/// Unrolls T stages for a tree with `node_count` nodes and computes the
/// tree-level embedding x_g plus per-stage state distributions.
EncoderForward encoder_forward(const EncoderParams& params, double node_count, int stages,
                               DynamicsKind dynamics = DynamicsKind::Eusd);

/// Accumulates parameter gradients for upstream gradients of x_g and of the
/// per-stage distributions (either may be empty/zero).
void encoder_backward(const EncoderParams& params, const EncoderForward& forward,
                      const Vector& grad_xg, const std::vector<Vector3>& grad_phat,
                      EncoderParams& grads);

// Contract-level operations.

/// U_0 = u_hat (1 - alpha - beta) W_u0, S_0 = b_s, D_0 = b_d.
EncoderState init_states(double node_count, const EncoderParams& params);

/// Applies the discrete updates T times; element t of the result is the
/// state after t steps (element 0 is the initial state).
std::vector<EncoderState> unroll(int stages, const EncoderState& init, const EncoderParams& params,
                                 DynamicsKind dynamics = DynamicsKind::Eusd);

/// T = max(depth, 1); x_g = W_x [U_T; S_T; D_T]. The tree enters only
/// through its node count and depth.
std::pair<Vector, std::vector<EncoderState>> encode(const PropagationTree& tree,
                                                    const EncoderParams& params,
                                                    DynamicsKind dynamics = DynamicsKind::Eusd);

/// Per-stage 3-way distributions (Unknown, Support, Denial) for t = 1..T.
std::vector<Vector3> state_scores(const std::vector<EncoderState>& states,
                                  const EncoderParams& params);

}  // namespace ein
