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

#include <doctest.h>

#include <cmath>
#include <random>

#include "ein/encoder.hpp"
#include "test_support.hpp"

using namespace ein;

namespace {

std::vector<ParamView> encoder_views(EncoderParams& p, EncoderParams& g) {
  const auto vec = [](const char* name, Vector& v, Vector& gv) {
    return ParamView{name, v.data(), gv.data(), v.size(), 1};
  };
  const auto mat = [](const char* name, Matrix& m, Matrix& gm) {
    return ParamView{name, m.data(), gm.data(), m.rows(), m.cols()};
  };
  return {
      ParamView{"alpha_raw", &p.alpha_raw, &g.alpha_raw, 1, 1},
      ParamView{"beta_raw", &p.beta_raw, &g.beta_raw, 1, 1},
      vec("w_u0", p.w_u0, g.w_u0),
      vec("b_s", p.b_s, g.b_s),
      vec("b_d", p.b_d, g.b_d),
      mat("w_u", p.w_u, g.w_u),
      mat("w_s", p.w_s, g.w_s),
      mat("w_d", p.w_d, g.w_d),
      mat("w_x", p.w_x, g.w_x),
      vec("score_u", p.score_u, g.score_u),
      vec("score_s", p.score_s, g.score_s),
      vec("score_d", p.score_d, g.score_d),
  };
}

}  // namespace

TEST_CASE("init_states scales U_0 linearly in the node count") {
  std::mt19937_64 rng(1);
  EncoderParams params = make_encoder_params(4, 3, 0.25, 0.25, rng);

  const EncoderState zero = init_states(0.0, params);
  CHECK(zero.u.norm() == 0.0);

  const EncoderState one = init_states(3.0, params);
  const EncoderState two = init_states(6.0, params);
  CHECK((two.u - 2.0 * one.u).norm() == doctest::Approx(0.0));
  CHECK((two.s - one.s).norm() == 0.0);
  CHECK((two.d - one.d).norm() == 0.0);

  params.w_u0 = Vector::Ones(4);
  const EncoderState state = init_states(4.0, params);
  for (int i = 0; i < 4; ++i) CHECK(state.u[i] == doctest::Approx(2.0));  // 4 * 0.5 * 1
  CHECK((state.s - params.b_s).norm() == 0.0);
  CHECK((state.d - params.b_d).norm() == 0.0);
}

TEST_CASE("unroll halves U per stage at alpha = beta = 0.25") {
  std::mt19937_64 rng(2);
  const EncoderParams params = make_encoder_params(5, 3, 0.25, 0.25, rng);
  const EncoderState init = init_states(7.0, params);
  const auto states = unroll(1, init, params);
  REQUIRE(states.size() == 2);
  CHECK((states[1].u - 0.5 * init.u).norm() == doctest::Approx(0.0));
}

TEST_CASE("identity weights with floor rates nearly freeze S and D") {
  std::mt19937_64 rng(3);
  EncoderParams params = make_encoder_params(4, 3, 0.0, 0.0, rng);  // rates clamp to 1e-4
  params.w_u = Matrix::Identity(4, 4);
  params.w_s = Matrix::Identity(4, 4);
  params.w_d = Matrix::Identity(4, 4);
  CHECK(rate_alpha(params) == doctest::Approx(kRateFloor));
  const EncoderState init = init_states(5.0, params);
  const auto states = unroll(6, init, params);
  CHECK((states[6].s - init.s).norm() <= 1e-2);
  CHECK((states[6].d - init.d).norm() <= 1e-2);
}

TEST_CASE("U_T follows the closed form of the linear recursion") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> unit(0.05, 0.9);
  for (int round = 0; round < 25; ++round) {
    const double alpha = unit(rng);
    const double beta = unit(rng) * (0.98 - alpha);
    EncoderParams params = make_encoder_params(6, 4, alpha, beta, rng);
    const int stages = 1 + static_cast<int>(rng() % 32);
    const EncoderForward f = encoder_forward(params, 11.0, stages);
    const double factor = std::pow(1.0 - f.alpha - f.beta, stages);
    const Vector expected = factor * f.states[0].u;
    CHECK((f.states.back().u - expected).norm() <= 1e-10 * std::max(1.0, expected.norm()));
  }
}

TEST_CASE("x_g depends on the tree only through node count and depth") {
  std::mt19937_64 rng(5);
  const EncoderParams params = make_encoder_params(4, 3, 0.4, 0.3, rng);

  // Same n = 5, same depth = 2, different shapes and texts.
  const auto a = build_tree("a", 0,
                            {{0, std::nullopt, "x", {}},
                             {1, 0, "yyy", {}},
                             {2, 0, "z", {}},
                             {3, 1, "w", {}},
                             {4, 1, "v", {}}});
  const auto b = build_tree("b", 1,
                            {{0, std::nullopt, "totally different", {}},
                             {1, 0, "p", {}},
                             {2, 1, "q", {}},
                             {3, 1, "r", {}},
                             {4, 0, "s", {}}});
  const auto [xg_a, states_a] = encode(a, params);
  const auto [xg_b, states_b] = encode(b, params);
  CHECK(xg_a == xg_b);  // bit-identical

  EncoderParams zeroed = params;
  zeroed.w_x.setZero();
  const auto [xg_zero, states_zero] = encode(a, zeroed);
  CHECK(xg_zero.norm() == 0.0);

  // Depth-0 fallback: encoded with T = 1.
  const auto solo = build_tree("solo", 0, {{0, std::nullopt, "root", {}}});
  const auto [xg_solo, states_solo] = encode(solo, params);
  CHECK(states_solo.size() == 2);  // t = 0 and t = 1
  CHECK(xg_solo.allFinite());
}

TEST_CASE("state_scores are strictly positive stage distributions") {
  std::mt19937_64 rng(6);
  const EncoderParams params = make_encoder_params(5, 3, 0.3, 0.4, rng);
  const EncoderForward f = encoder_forward(params, 9.0, 4);
  REQUIRE(f.phat.size() == 4);
  for (const Vector3& p : f.phat) {
    CHECK(p.sum() == doctest::Approx(1.0));
    CHECK(p.minCoeff() > 0.0);
  }
  const auto via_op = state_scores(f.states, params);
  REQUIRE(via_op.size() == 4);
  for (std::size_t t = 0; t < via_op.size(); ++t) {
    CHECK((via_op[t] - f.phat[t]).norm() == doctest::Approx(0.0));
  }
}

TEST_CASE("equal scores give the uniform distribution, ln2 shifts it to (.5,.25,.25)") {
  std::mt19937_64 rng(7);
  EncoderParams params = make_encoder_params(1, 2, 0.25, 0.25, rng);
  params.score_u.setZero();
  params.score_s.setZero();
  params.score_d.setZero();
  EncoderForward uniform = encoder_forward(params, 5.0, 2);
  for (const Vector3& p : uniform.phat) {
    CHECK(p[0] == doctest::Approx(1.0 / 3.0));
    CHECK(p[1] == doctest::Approx(1.0 / 3.0));
    CHECK(p[2] == doctest::Approx(1.0 / 3.0));
  }

  // h = 1: craft U_1 score = ln 2 and zero S/D scores.
  params.w_u0 = Vector::Constant(1, std::log(2.0));
  params.b_s = Vector::Zero(1);
  params.b_d = Vector::Zero(1);
  params.w_u = Matrix::Zero(1, 1);
  params.score_u = Vector::Constant(1, 1.0);
  // U_1 = 0.5 * U_0 = 0.5 * (2 * 0.5 * ln 2) = 0.5 ln 2 -> use u_hat = 4.
  const EncoderForward f = encoder_forward(params, 4.0, 1);
  CHECK(f.scores[0][0] == doctest::Approx(std::log(2.0)));
  CHECK(f.phat[0][0] == doctest::Approx(0.5));
  CHECK(f.phat[0][1] == doctest::Approx(0.25));
  CHECK(f.phat[0][2] == doctest::Approx(0.25));
}

TEST_CASE("rates stay inside the clamp band for any raw value") {
  std::mt19937_64 rng(8);
  EncoderParams params = make_encoder_params(3, 2, 0.5, 0.5, rng);
  for (double raw : {-1e6, -50.0, -1.0, 0.0, 1.0, 50.0, 1e6}) {
    params.alpha_raw = raw;
    params.beta_raw = -raw;
    CHECK(rate_alpha(params) >= kRateFloor);
    CHECK(rate_alpha(params) <= 1.0 - kRateFloor);
    CHECK(rate_beta(params) >= kRateFloor);
    CHECK(rate_beta(params) <= 1.0 - kRateFloor);
  }
  CHECK(raw_from_rate(0.0) == logit(kRateFloor));
  CHECK(raw_from_rate(1.0) == logit(1.0 - kRateFloor));
}

TEST_CASE("encoder backward matches finite differences for both dynamics") {
  std::mt19937_64 rng(9);
  for (const DynamicsKind dynamics : {DynamicsKind::Eusd, DynamicsKind::Usd}) {
    EncoderParams params = make_encoder_params(4, 3, 0.35, 0.3, rng);
    EncoderParams grads = zeros_like(params);

    const int stages = 3;
    const double node_count = 6.0;
    Vector gx = Vector::NullaryExpr(3, [&] { return std::normal_distribution<>()(rng); });
    std::vector<Vector3> gp(stages);
    for (auto& g : gp) {
      g = Vector3::NullaryExpr([&] { return std::normal_distribution<>()(rng); });
    }

    const auto loss = [&] {
      const EncoderForward f = encoder_forward(params, node_count, stages, dynamics);
      double value = gx.dot(f.xg);
      for (int t = 0; t < stages; ++t) value += gp[static_cast<std::size_t>(t)].dot(f.phat[t]);
      return value;
    };

    const EncoderForward f = encoder_forward(params, node_count, stages, dynamics);
    encoder_backward(params, f, gx, gp, grads);

    const auto mismatches =
        ein::testing::finite_difference_check(encoder_views(params, grads), loss);
    for (const auto& m : mismatches) {
      MESSAGE(to_string(dynamics), " ", m.name, "[", m.index, "] analytic=", m.analytic,
              " numeric=", m.numeric);
    }
    CHECK(mismatches.empty());
  }
}
