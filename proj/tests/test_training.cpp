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
#include <filesystem>
#include <random>

#include "ein/config.hpp"
#include "ein/dynamics.hpp"
#include "ein/training.hpp"
#include "test_support.hpp"

using namespace ein;
namespace fs = std::filesystem;

namespace {

// root; children a (Support), b (Denial); a has child c (Support).
std::pair<PropagationTree, StateLabels> worked_tree() {
  auto tree = build_tree("w", 1,
                         {{0, std::nullopt, "root", {}},
                          {1, 0, "a", {}},
                          {2, 0, "b", {}},
                          {3, 1, "c", {}}});
  StateLabels labels;
  labels.event_id = "w";
  labels.states = {{1, 0}, {2, 1}, {3, 0}};
  labels.stances = {{1, 0}, {2, 1}, {3, 0}};
  return {std::move(tree), std::move(labels)};
}

}  // namespace

TEST_CASE("target_distributions counts coverage by stage") {
  const auto [tree, labels] = worked_tree();
  const StageTargets targets = target_distributions(tree, labels);
  REQUIRE(targets.stages() == 2);
  CHECK(targets.denominator == 3);

  const auto p = targets.probabilities();
  CHECK(p[0][0] == doctest::Approx(1.0 / 3.0));  // c still unknown at t=1
  CHECK(p[0][1] == doctest::Approx(1.0 / 3.0));
  CHECK(p[0][2] == doctest::Approx(1.0 / 3.0));
  CHECK(p[1][0] == doctest::Approx(0.0));
  CHECK(p[1][1] == doctest::Approx(2.0 / 3.0));
  CHECK(p[1][2] == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("star tree with unanimous support saturates at t = 1") {
  auto tree = build_tree("s", 0,
                         {{0, std::nullopt, "r", {}},
                          {1, 0, "a", {}},
                          {2, 0, "b", {}},
                          {3, 0, "c", {}},
                          {4, 0, "d", {}}});
  StateLabels labels;
  labels.states = {{1, 0}, {2, 0}, {3, 0}, {4, 0}};
  const StageTargets targets = target_distributions(tree, labels);
  REQUIRE(targets.stages() == 1);
  const auto p = targets.probabilities();
  CHECK(p[0][0] == 0.0);
  CHECK(p[0][1] == 1.0);
  CHECK(p[0][2] == 0.0);
}

TEST_CASE("targets are exact rationals with vanishing terminal unknown mass") {
  std::mt19937_64 rng(21);
  for (int round = 0; round < 100; ++round) {
    const auto tree = ein::testing::random_tree(2 + static_cast<int>(rng() % 25), 6, rng);
    StateLabels labels;
    for (int v = 1; v < tree.node_count(); ++v) labels.states[v] = static_cast<int>(rng() % 2);
    const StageTargets targets = target_distributions(tree, labels);
    long previous_unknown = targets.denominator;
    for (const auto& [unknown, support, denial] : targets.counts) {
      CHECK(unknown + support + denial == targets.denominator);  // sums to one exactly
      CHECK(unknown <= previous_unknown);                        // monotone coverage
      previous_unknown = unknown;
    }
    CHECK(targets.counts.back()[0] == 0);  // p_u,T = 0
  }
  CHECK_THROWS_AS(
      target_distributions(build_tree("solo", 0, {{0, std::nullopt, "r", {}}}), StateLabels{}),
      std::invalid_argument);
}

TEST_CASE("kl_state_loss identities and worked value") {
  const auto [tree, labels] = worked_tree();
  const StageTargets targets = target_distributions(tree, labels);

  const std::vector<Vector3> exact = targets.probabilities();
  CHECK(kl_state_loss(targets, exact) <= 1e-6);

  // Single stage, p = (.5, .25, .25) vs p-hat = (.25, .5, .25).
  StageTargets single;
  single.denominator = 4;
  single.counts = {{2, 1, 1}};
  const std::vector<Vector3> phat{Vector3(0.25, 0.5, 0.25)};
  CHECK(kl_state_loss(single, phat) == doctest::Approx(0.1733).epsilon(1e-3));
  CHECK(kl_state_loss(single, phat) ==
        doctest::Approx(0.5 * std::log(2.0) + 0.25 * std::log(0.5)));

  // Repeating an identical stage doubles the loss.
  StageTargets twice = single;
  twice.counts.push_back(single.counts[0]);
  const std::vector<Vector3> phat2{phat[0], phat[0]};
  CHECK(kl_state_loss(twice, phat2) == doctest::Approx(2.0 * kl_state_loss(single, phat)));

  CHECK(kl_state_loss(single, phat) >= 0.0);
}

TEST_CASE("kl gradient matches finite differences") {
  StageTargets targets;
  targets.denominator = 8;
  targets.counts = {{3, 3, 2}, {0, 5, 3}};
  std::vector<Vector3> phat{Vector3(0.2, 0.5, 0.3), Vector3(0.1, 0.6, 0.3)};
  const auto grads = kl_state_loss_backward(targets, phat);
  const double step = 1e-7;
  for (std::size_t t = 0; t < phat.size(); ++t) {
    for (int k = 0; k < 3; ++k) {
      const double saved = phat[t][k];
      phat[t][k] = saved + step;
      const double up = kl_state_loss(targets, phat);
      phat[t][k] = saved - step;
      const double down = kl_state_loss(targets, phat);
      phat[t][k] = saved;
      CHECK(grads[t][k] == doctest::Approx((up - down) / (2 * step)).epsilon(1e-4));
    }
  }
}

TEST_CASE("joint_loss composes cross-entropy and the weighted KL term") {
  Prediction uniform;
  uniform.logits = Eigen::Vector2d::Zero();
  uniform.probs = Eigen::Vector2d::Constant(0.5);
  CHECK(joint_loss(uniform, 0, 0.37, 0.0) == doctest::Approx(std::log(2.0)));
  CHECK(joint_loss(uniform, 1, 0.37, 0.0) == doctest::Approx(std::log(2.0)));
  CHECK(joint_loss(uniform, 1, 0.4, 0.5) == doctest::Approx(std::log(2.0) + 0.2));

  Prediction confident;
  confident.logits = Eigen::Vector2d(30.0, -30.0);
  confident.probs = softmax(confident.logits);
  CHECK(joint_loss(confident, 0, 0.0, 1.0) == doctest::Approx(0.0));
}

TEST_CASE("adam converges on a quadratic") {
  double x = 0.0, gx = 0.0;
  const std::vector<ParamView> views{{"x", &x, &gx, 1, 1}};
  AdamOptimizer adam(0.1, 0.0);
  for (int step = 0; step < 1000; ++step) {
    gx = 2.0 * (x - 3.0);
    adam.step(views);
  }
  CHECK(x == doctest::Approx(3.0).epsilon(1e-3));
}

TEST_CASE("end-to-end joint-loss gradients match finite differences") {
  std::mt19937_64 rng(31);
  for (const DynamicsKind dynamics : {DynamicsKind::Eusd, DynamicsKind::Usd}) {
    ModelConfig config;
    config.backbone.kind = BackboneKind::Gcn;
    config.backbone.layers = 2;
    config.backbone.hidden = 3;
    config.backbone.dropout = 0.0;
    config.backbone.input_dim = 3;
    config.dynamics = dynamics;
    config.alpha0 = 0.3;
    config.beta0 = 0.35;
    Model model = Model::init(config, 7);
    for (auto& layer : model.backbone.down) layer.bias.array() += 0.05;

    auto tree = build_tree("g", 1,
                           {{0, std::nullopt, "r", {}},
                            {1, 0, "a", {}},
                            {2, 0, "b", {}},
                            {3, 1, "c", {}},
                            {4, 3, "d", {}}});
    std::normal_distribution<double> gauss(0.0, 0.5);
    tree.features = Matrix::NullaryExpr(5, 3, [&] { return 0.6 + gauss(rng); });
    StateLabels labels;
    labels.states = {{1, 0}, {2, 1}, {3, 0}, {4, 1}};
    const StageTargets targets = target_distributions(tree, labels);
    const double lambda = 0.7;

    ModelGrads grads = ModelGrads::zeros_like(model);
    const auto views = parameter_views(model, grads);

    const auto loss = [&] {
      const TreeForward f = model_forward(model, tree);
      return joint_loss(f.prediction, tree.label, kl_state_loss(targets, f.encoder->phat),
                        lambda);
    };

    // Analytic pass mirroring the training loop's accumulation.
    const TreeForward f = model_forward(model, tree);
    Eigen::Vector2d glogits = f.prediction.probs;
    glogits[tree.label] -= 1.0;
    grads.head.noalias() += glogits * (f.backbone.xf + f.encoder->xg).transpose();
    const Vector gsum = model.head.transpose() * glogits;
    backbone_backward(model.config.backbone, model.backbone, f.backbone, gsum, grads.backbone);
    auto grad_phat = kl_state_loss_backward(targets, f.encoder->phat);
    for (auto& g : grad_phat) g *= lambda;
    encoder_backward(model.encoder, *f.encoder, gsum, grad_phat, grads.encoder);

    const auto mismatches = ein::testing::finite_difference_check(views, loss);
    for (const auto& m : mismatches) {
      MESSAGE(to_string(dynamics), " ", m.name, "[", m.index, "] analytic=", m.analytic,
              " numeric=", m.numeric, " rel=", m.relative_error);
    }
    CHECK(mismatches.empty());
  }
}

TEST_CASE("training is deterministic and reduces the state loss") {
  GeneratorConfig generator;
  generator.noise_sigma = 0.8;
  auto records = generate_synthetic_dataset(generator, 160, 5);
  const DatasetSplits splits = split(std::move(records), SplitSpec{0.6, 0.2, 0.2, 3});

  TrainConfig config;
  config.backbone.kind = BackboneKind::Gcn;
  config.backbone.layers = 2;
  config.backbone.hidden = 8;
  config.backbone.dropout = 0.1;
  config.lambda = 0.5;
  config.lr = 5e-3;
  config.batch_size = 32;
  config.epochs = 12;
  config.patience = 12;
  config.seed = 11;

  const TrainResult a = train(splits, config);
  const TrainResult b = train(splits, config);
  REQUIRE(!a.log.empty());
  REQUIRE(a.log.size() == b.log.size());
  for (std::size_t e = 0; e < a.log.size(); ++e) {
    CHECK(a.log[e].l_r == b.log[e].l_r);  // bit-identical runs
    CHECK(a.log[e].l_p == b.log[e].l_p);
    CHECK(a.log[e].val_acc == b.log[e].val_acc);
  }
  if (a.log.size() >= 10) {
    CHECK(a.log[9].l_p < a.log[0].l_p);
  }
  CHECK(a.best_epoch >= 1);
}

TEST_CASE("lambda 0 leaves the score projections untouched") {
  GeneratorConfig generator;
  auto records = generate_synthetic_dataset(generator, 60, 6);
  const DatasetSplits splits = split(std::move(records), SplitSpec{0.6, 0.2, 0.2, 3});

  TrainConfig config;
  config.backbone.hidden = 6;
  config.backbone.dropout = 0.0;
  config.lambda = 0.0;
  config.epochs = 2;
  config.batch_size = 16;
  config.seed = 4;

  const TrainResult result = train(splits, config);
  TrainConfig with_kl = config;
  with_kl.lambda = 0.5;
  const TrainResult moved = train(splits, with_kl);
  const double drift_without =
      (result.model.encoder.score_u - result.model.encoder.score_s).norm();
  const double drift_with = (moved.model.encoder.score_u - moved.model.encoder.score_s).norm();
  // With lambda = 0 the three projections stay identical (symmetric init,
  // zero L_p gradient); the KL objective breaks the tie.
  CHECK(drift_without == 0.0);
  CHECK(drift_with > 0.0);
}

TEST_CASE("checkpoints round-trip through files") {
  GeneratorConfig generator;
  auto records = generate_synthetic_dataset(generator, 40, 8);
  const DatasetSplits splits = split(std::move(records), SplitSpec{0.6, 0.2, 0.2, 3});
  TrainConfig config;
  config.backbone.hidden = 5;
  config.epochs = 2;
  config.batch_size = 16;
  const TrainResult result = train(splits, config);

  const fs::path file = fs::temp_directory_path() / "ein_ckpt_test.json";
  Model model = result.model;
  save_checkpoint(file, model, nlohmann::json{{"note", "test"}}, config.seed);
  const Checkpoint restored = load_checkpoint(file);
  fs::remove(file);

  CHECK(restored.run_config.at("note") == "test");
  CHECK(restored.model.config.backbone.hidden == 5);
  CHECK(restored.model.encoder.alpha_raw == model.encoder.alpha_raw);
  CHECK((restored.model.head - model.head).norm() == 0.0);
  for (const TreeRecord& record : splits.test) {
    CHECK(rumor_score(restored.model, record.tree) ==
          doctest::Approx(rumor_score(model, record.tree)));
  }
}

TEST_CASE("train rejects degenerate inputs") {
  DatasetSplits empty;
  CHECK_THROWS_AS(train(empty, TrainConfig{}), std::invalid_argument);
}
