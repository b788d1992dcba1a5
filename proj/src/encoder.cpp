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

#include "ein/encoder.hpp"

#include <algorithm>
#include <stdexcept>

namespace ein {

DynamicsKind dynamics_kind_from_string(const std::string& name) {
  if (name == "eusd") return DynamicsKind::Eusd;
  if (name == "usd") return DynamicsKind::Usd;
  throw std::invalid_argument("unknown dynamics kind '" + name + "'");
}

const char* to_string(DynamicsKind kind) {
  return kind == DynamicsKind::Eusd ? "eusd" : "usd";
}

namespace {

double clamp_rate(double rate) {
  return std::clamp(rate, kRateFloor, 1.0 - kRateFloor);
}

/// d(clamped logistic)/d(raw); the subgradient at the clamp boundary keeps
/// the logistic slope so boundary initializations can still move.
double rate_derivative(double raw) {
  const double sigma = logistic(raw);
  if (sigma < kRateFloor || sigma > 1.0 - kRateFloor) return 0.0;
  return sigma * (1.0 - sigma);
}

}  // namespace

double rate_alpha(const EncoderParams& params) { return clamp_rate(logistic(params.alpha_raw)); }
double rate_beta(const EncoderParams& params) { return clamp_rate(logistic(params.beta_raw)); }

double raw_from_rate(double rate) { return logit(clamp_rate(rate)); }

EncoderParams make_encoder_params(int embedding_dim, int output_dim, double alpha0, double beta0,
                                  std::mt19937_64& rng) {
  if (embedding_dim < 1 || output_dim < 1) {
    throw std::invalid_argument("make_encoder_params: dimensions must be positive");
  }
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double h = static_cast<double>(embedding_dim);
  const double vec_scale = 0.1 / std::sqrt(h);
  const double mat_scale = 0.01;

  EncoderParams p;
  p.alpha_raw = raw_from_rate(alpha0);
  p.beta_raw = raw_from_rate(beta0);
  p.w_u0 = Vector::NullaryExpr(embedding_dim, [&] { return gauss(rng) * vec_scale; });
  p.b_s = Vector::NullaryExpr(embedding_dim, [&] { return gauss(rng) * vec_scale; });
  p.b_d = p.b_s;
  p.w_u = Matrix::Identity(embedding_dim, embedding_dim) +
          Matrix::NullaryExpr(embedding_dim, embedding_dim, [&] { return gauss(rng) * mat_scale; });
  p.w_s = Matrix::Identity(embedding_dim, embedding_dim) +
          Matrix::NullaryExpr(embedding_dim, embedding_dim, [&] { return gauss(rng) * mat_scale; });
  p.w_d = p.w_s;
  const double glorot = std::sqrt(6.0 / (3.0 * h + static_cast<double>(output_dim)));
  std::uniform_real_distribution<double> uniform(-glorot, glorot);
  p.w_x = Matrix::NullaryExpr(output_dim, 3 * embedding_dim, [&] { return uniform(rng); });
  p.score_u = Vector::Constant(embedding_dim, 1.0 / h);
  p.score_s = p.score_u;
  p.score_d = p.score_u;
  return p;
}

EncoderParams zeros_like(const EncoderParams& params) {
  EncoderParams z;
  z.alpha_raw = 0.0;
  z.beta_raw = 0.0;
  z.w_u0 = Vector::Zero(params.w_u0.size());
  z.b_s = Vector::Zero(params.b_s.size());
  z.b_d = Vector::Zero(params.b_d.size());
  z.w_u = Matrix::Zero(params.w_u.rows(), params.w_u.cols());
  z.w_s = Matrix::Zero(params.w_s.rows(), params.w_s.cols());
  z.w_d = Matrix::Zero(params.w_d.rows(), params.w_d.cols());
  z.w_x = Matrix::Zero(params.w_x.rows(), params.w_x.cols());
  z.score_u = Vector::Zero(params.score_u.size());
  z.score_s = Vector::Zero(params.score_s.size());
  z.score_d = Vector::Zero(params.score_d.size());
  return z;
}

EncoderState init_states(double node_count, const EncoderParams& params) {
  const double alpha = rate_alpha(params);
  const double beta = rate_beta(params);
  EncoderState state;
  state.u = node_count * (1.0 - alpha - beta) * params.w_u0;
  state.s = params.b_s;
  state.d = params.b_d;
  return state;
}

EncoderForward encoder_forward(const EncoderParams& params, double node_count, int stages,
                               DynamicsKind dynamics) {
  if (stages < 1) throw std::invalid_argument("encoder_forward: need at least one stage");

  EncoderForward f;
  f.stages = stages;
  f.node_count = node_count;
  f.alpha = rate_alpha(params);
  f.beta = rate_beta(params);
  f.dynamics = dynamics;
  f.states.reserve(static_cast<std::size_t>(stages) + 1);
  f.states.push_back(init_states(node_count, params));

  const double decay = 1.0 - f.alpha - f.beta;
  for (int t = 0; t < stages; ++t) {
    const EncoderState& prev = f.states.back();
    EncoderState next;
    if (dynamics == DynamicsKind::Eusd) {
      f.mu.push_back(params.w_u * prev.u);
      next.u = decay * prev.u;
      next.s = params.w_s * (prev.s + f.alpha * f.mu.back());
      next.d = params.w_d * (prev.d + f.beta * f.mu.back());
    } else {
      f.us.push_back(prev.u.cwiseProduct(prev.s));
      f.ud.push_back(prev.u.cwiseProduct(prev.d));
      f.mus.push_back(params.w_u * f.us.back());
      f.mud.push_back(params.w_u * f.ud.back());
      next.u = prev.u - f.alpha * f.us.back() - f.beta * f.ud.back();
      next.s = params.w_s * (prev.s + f.alpha * f.mus.back());
      next.d = params.w_d * (prev.d + f.beta * f.mud.back());
    }
    f.states.push_back(std::move(next));
  }

  const EncoderState& last = f.states.back();
  const int h = params.embedding_dim();
  Vector concat(3 * h);
  concat << last.u, last.s, last.d;
  f.xg = params.w_x * concat;

  f.scores.reserve(static_cast<std::size_t>(stages));
  f.phat.reserve(static_cast<std::size_t>(stages));
  for (int t = 1; t <= stages; ++t) {
    const EncoderState& state = f.states[static_cast<std::size_t>(t)];
    Vector3 score(params.score_u.dot(state.u), params.score_s.dot(state.s),
                  params.score_d.dot(state.d));
    f.scores.push_back(score);
    f.phat.push_back(softmax(score));
  }
  return f;
}

void encoder_backward(const EncoderParams& params, const EncoderForward& f, const Vector& grad_xg,
                      const std::vector<Vector3>& grad_phat, EncoderParams& grads) {
  const int h = params.embedding_dim();
  const int T = f.stages;
  const double a = f.alpha;
  const double b = f.beta;

  std::vector<Vector> gu(static_cast<std::size_t>(T) + 1, Vector::Zero(h));
  std::vector<Vector> gs(static_cast<std::size_t>(T) + 1, Vector::Zero(h));
  std::vector<Vector> gd(static_cast<std::size_t>(T) + 1, Vector::Zero(h));

  if (grad_xg.size() > 0) {
    const EncoderState& last = f.states.back();
    Vector concat(3 * h);
    concat << last.u, last.s, last.d;
    grads.w_x.noalias() += grad_xg * concat.transpose();
    const Vector gconcat = params.w_x.transpose() * grad_xg;
    gu[static_cast<std::size_t>(T)] += gconcat.segment(0, h);
    gs[static_cast<std::size_t>(T)] += gconcat.segment(h, h);
    gd[static_cast<std::size_t>(T)] += gconcat.segment(2 * h, h);
  }

  if (!grad_phat.empty()) {
    if (static_cast<int>(grad_phat.size()) != T) {
      throw std::invalid_argument("encoder_backward: grad_phat size != stages");
    }
    for (int t = 1; t <= T; ++t) {
      const EncoderState& state = f.states[static_cast<std::size_t>(t)];
      const Vector3 gscore = softmax_backward(f.phat[static_cast<std::size_t>(t - 1)],
                                              grad_phat[static_cast<std::size_t>(t - 1)]);
      grads.score_u += gscore[0] * state.u;
      grads.score_s += gscore[1] * state.s;
      grads.score_d += gscore[2] * state.d;
      gu[static_cast<std::size_t>(t)] += gscore[0] * params.score_u;
      gs[static_cast<std::size_t>(t)] += gscore[1] * params.score_s;
      gd[static_cast<std::size_t>(t)] += gscore[2] * params.score_d;
    }
  }

  double ga = 0.0;  // through the alpha-scaled inflow terms
  double gb = 0.0;
  double gr = 0.0;  // through the decay factor r = 1 - a - b

  const double decay = 1.0 - a - b;
  for (int t = T - 1; t >= 0; --t) {
    const auto ti = static_cast<std::size_t>(t);
    const EncoderState& prev = f.states[ti];
    if (f.dynamics == DynamicsKind::Eusd) {
      const Vector& mu = f.mu[ti];
      // S_{t+1} = W_s (s_t + a mu), D_{t+1} = W_d (d_t + b mu)
      grads.w_s.noalias() += gs[ti + 1] * (prev.s + a * mu).transpose();
      const Vector gin_s = params.w_s.transpose() * gs[ti + 1];
      gs[ti] += gin_s;
      ga += gin_s.dot(mu);

      grads.w_d.noalias() += gd[ti + 1] * (prev.d + b * mu).transpose();
      const Vector gin_d = params.w_d.transpose() * gd[ti + 1];
      gd[ti] += gin_d;
      gb += gin_d.dot(mu);

      const Vector gmu = a * gin_s + b * gin_d;
      grads.w_u.noalias() += gmu * prev.u.transpose();
      gu[ti] += params.w_u.transpose() * gmu;

      // U_{t+1} = r u_t
      gu[ti] += decay * gu[ti + 1];
      gr += gu[ti + 1].dot(prev.u);
    } else {
      const Vector& us = f.us[ti];
      const Vector& ud = f.ud[ti];
      const Vector& mus = f.mus[ti];
      const Vector& mud = f.mud[ti];

      grads.w_s.noalias() += gs[ti + 1] * (prev.s + a * mus).transpose();
      const Vector gin_s = params.w_s.transpose() * gs[ti + 1];
      gs[ti] += gin_s;
      ga += gin_s.dot(mus);
      const Vector gmus = a * gin_s;
      grads.w_u.noalias() += gmus * us.transpose();
      Vector gus = params.w_u.transpose() * gmus;

      grads.w_d.noalias() += gd[ti + 1] * (prev.d + b * mud).transpose();
      const Vector gin_d = params.w_d.transpose() * gd[ti + 1];
      gd[ti] += gin_d;
      gb += gin_d.dot(mud);
      const Vector gmud = b * gin_d;
      grads.w_u.noalias() += gmud * ud.transpose();
      Vector gud = params.w_u.transpose() * gmud;

      // u_{t+1} = u_t - a us - b ud
      gu[ti] += gu[ti + 1];
      ga -= gu[ti + 1].dot(us);
      gb -= gu[ti + 1].dot(ud);
      gus -= a * gu[ti + 1];
      gud -= b * gu[ti + 1];

      gu[ti] += gus.cwiseProduct(prev.s) + gud.cwiseProduct(prev.d);
      gs[ti] += gus.cwiseProduct(prev.u);
      gd[ti] += gud.cwiseProduct(prev.u);
    }
  }

  // U_0 = u_hat r w_u0, S_0 = b_s, D_0 = b_d.
  grads.w_u0 += f.node_count * decay * gu[0];
  gr += f.node_count * gu[0].dot(params.w_u0);
  grads.b_s += gs[0];
  grads.b_d += gd[0];

  const double galpha = ga - gr;
  const double gbeta = gb - gr;
  grads.alpha_raw += galpha * rate_derivative(params.alpha_raw);
  grads.beta_raw += gbeta * rate_derivative(params.beta_raw);
}

std::vector<EncoderState> unroll(int stages, const EncoderState& init, const EncoderParams& params,
                                 DynamicsKind dynamics) {
  if (stages < 1) throw std::invalid_argument("unroll: need at least one stage");
  const double a = rate_alpha(params);
  const double b = rate_beta(params);
  const double decay = 1.0 - a - b;
  std::vector<EncoderState> states{init};
  for (int t = 0; t < stages; ++t) {
    const EncoderState& prev = states.back();
    EncoderState next;
    if (dynamics == DynamicsKind::Eusd) {
      const Vector mu = params.w_u * prev.u;
      next.u = decay * prev.u;
      next.s = params.w_s * (prev.s + a * mu);
      next.d = params.w_d * (prev.d + b * mu);
    } else {
      const Vector us = prev.u.cwiseProduct(prev.s);
      const Vector ud = prev.u.cwiseProduct(prev.d);
      next.u = prev.u - a * us - b * ud;
      next.s = params.w_s * (prev.s + a * (params.w_u * us));
      next.d = params.w_d * (prev.d + b * (params.w_u * ud));
    }
    states.push_back(std::move(next));
  }
  return states;
}

std::pair<Vector, std::vector<EncoderState>> encode(const PropagationTree& tree,
                                                    const EncoderParams& params,
                                                    DynamicsKind dynamics) {
  const int stages = std::max(depth(tree), 1);
  EncoderForward f = encoder_forward(params, static_cast<double>(tree.node_count()), stages,
                                     dynamics);
  return {std::move(f.xg), std::move(f.states)};
}

std::vector<Vector3> state_scores(const std::vector<EncoderState>& states,
                                  const EncoderParams& params) {
  if (states.size() < 2) throw std::invalid_argument("state_scores: need states for t >= 1");
  std::vector<Vector3> out;
  out.reserve(states.size() - 1);
  for (std::size_t t = 1; t < states.size(); ++t) {
    const Vector3 score(params.score_u.dot(states[t].u), params.score_s.dot(states[t].s),
                        params.score_d.dot(states[t].d));
    out.push_back(softmax(score));
  }
  return out;
}

}  // namespace ein
