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

#include <array>
#include <optional>

#include "ein/ingest.hpp"
#include "ein/metrics.hpp"
#include "ein/model.hpp"

namespace ein {

/// Target state distributions per stage, kept as exact integer counts over
/// the n-1 responsive posts. At stage t a non-root node counts as Support or
/// Denial once its depth is <= t and as Unknown while deeper.
struct StageTargets {
  long denominator = 0;                              // n - 1
  std::vector<std::array<long, 3>> counts;           // t = 1..T: (unknown, support, denial)

  int stages() const { return static_cast<int>(counts.size()); }
  std::vector<Vector3> probabilities() const;
};

/// Builds the targets for t = 1..depth(tree). Labels must cover every
/// non-root node; requires n >= 2.
StageTargets target_distributions(const PropagationTree& tree, const StateLabels& labels);

inline constexpr double kKlFloor = 1e-8;

/// Sum over stages of the categorical KL(p || p-hat), with 0 ln 0 = 0 and
/// p-hat floored at 1e-8.
double kl_state_loss(const StageTargets& targets, const std::vector<Vector3>& predicted);

/// d(kl_state_loss)/d(p-hat_t).
std::vector<Vector3> kl_state_loss_backward(const StageTargets& targets,
                                            const std::vector<Vector3>& predicted);

/// Cross-entropy of the prediction against the event label, computed from
/// the logits.
double cross_entropy(const Prediction& prediction, int label);

/// L = L_r + lambda L_p; trees without state labels contribute only L_r
/// (callers pass kl = 0 for them).
double joint_loss(const Prediction& prediction, int label, double kl, double lambda);

struct TrainConfig {
  BackboneConfig backbone;  // input_dim may be 0; bound from the data
  DynamicsKind dynamics = DynamicsKind::Eusd;
  bool use_encoder = true;
  double lambda = 0.5;
  double alpha0 = 0.5;
  double beta0 = 0.5;
  bool random_rates = false;  // draw alpha0, beta0 ~ U(0,1) independently
  double ce_weight = 1.0;     // 0 trains on the state-distribution loss alone
  double lr = 5e-4;
  double weight_decay = 1e-4;
  int batch_size = 128;
  int epochs = 100;
  int patience = 10;
  std::uint64_t seed = 1;
};

struct EpochLog {
  int epoch = 0;
  double l_r = 0.0;  // mean cross-entropy over the train split
  double l_p = 0.0;  // mean state-distribution loss over labeled train trees
  double val_acc = 0.0;
  std::optional<double> val_auc;
  double val_f1 = 0.0;
};

struct TrainResult {
  Model model;  // best-validation snapshot
  std::vector<EpochLog> log;
  int best_epoch = 0;
  double best_val_acc = 0.0;
};

/// Adam with classic L2 weight decay on every tensor except the raw rates.
class AdamOptimizer {
 public:
  AdamOptimizer(double lr, double weight_decay, double beta1 = 0.9, double beta2 = 0.999,
                double epsilon = 1e-8);

  void step(const std::vector<ParamView>& views);

 private:
  double lr_, weight_decay_, beta1_, beta2_, epsilon_;
  int t_ = 0;
  std::unordered_map<std::string, std::pair<Vector, Vector>> slots_;
};

/// Mini-batch training with early stopping on validation accuracy.
/// Deterministic for a fixed seed (single-threaded, seeded shuffles and
/// dropout). Throws on NaN loss.
TrainResult train(const DatasetSplits& splits, TrainConfig config);

/// Rumor-class probabilities for a whole split, in order.
std::vector<double> predict_scores(const Model& model, std::span<const TreeRecord> records);

void write_train_log(const std::filesystem::path& path, std::span<const EpochLog> log);

}  // namespace ein
