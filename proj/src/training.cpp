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

#include "ein/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace ein {

std::vector<Vector3> StageTargets::probabilities() const {
  std::vector<Vector3> out;
  out.reserve(counts.size());
  const double n = static_cast<double>(denominator);
  for (const auto& c : counts) {
    out.emplace_back(static_cast<double>(c[0]) / n, static_cast<double>(c[1]) / n,
                     static_cast<double>(c[2]) / n);
  }
  return out;
}

StageTargets target_distributions(const PropagationTree& tree, const StateLabels& labels) {
  const int n = tree.node_count();
  if (n < 2) {
    throw std::invalid_argument("target_distributions: tree '" + tree.event_id +
                                "' has no responsive posts");
  }
  const std::vector<int> depths = node_depths(tree);
  const int stages = *std::max_element(depths.begin(), depths.end());

  StageTargets targets;
  targets.denominator = n - 1;
  targets.counts.assign(static_cast<std::size_t>(stages), {0, 0, 0});
  for (int v = 1; v < n; ++v) {
    const auto it = labels.states.find(v);
    if (it == labels.states.end()) {
      throw std::invalid_argument("target_distributions: node " + std::to_string(v) + " of '" +
                                  tree.event_id + "' has no state label");
    }
    const int node_depth = depths[static_cast<std::size_t>(v)];
    for (int t = 1; t <= stages; ++t) {
      auto& [unknown, support, denial] = targets.counts[static_cast<std::size_t>(t - 1)];
      if (node_depth > t) {
        ++unknown;
      } else if (it->second == 0) {
        ++support;
      } else {
        ++denial;
      }
    }
  }
  return targets;
}

double kl_state_loss(const StageTargets& targets, const std::vector<Vector3>& predicted) {
  if (targets.counts.size() != predicted.size()) {
    throw std::invalid_argument("kl_state_loss: stage count mismatch");
  }
  const std::vector<Vector3> p = targets.probabilities();
  double loss = 0.0;
  for (std::size_t t = 0; t < p.size(); ++t) {
    for (int k = 0; k < 3; ++k) {
      const double target = p[t][k];
      if (target <= 0.0) continue;  // 0 ln 0 = 0
      loss += target * (std::log(target) - std::log(std::max(predicted[t][k], kKlFloor)));
    }
  }
  return loss;
}

std::vector<Vector3> kl_state_loss_backward(const StageTargets& targets,
                                            const std::vector<Vector3>& predicted) {
  if (targets.counts.size() != predicted.size()) {
    throw std::invalid_argument("kl_state_loss_backward: stage count mismatch");
  }
  const std::vector<Vector3> p = targets.probabilities();
  std::vector<Vector3> grads(predicted.size(), Vector3::Zero());
  for (std::size_t t = 0; t < p.size(); ++t) {
    for (int k = 0; k < 3; ++k) {
      if (p[t][k] <= 0.0 || predicted[t][k] < kKlFloor) continue;  // flat below the floor
      grads[t][k] = -p[t][k] / predicted[t][k];
    }
  }
  return grads;
}

double cross_entropy(const Prediction& prediction, int label) {
  return log_sum_exp(prediction.logits) - prediction.logits[label];
}

double joint_loss(const Prediction& prediction, int label, double kl, double lambda) {
  return cross_entropy(prediction, label) + lambda * kl;
}

AdamOptimizer::AdamOptimizer(double lr, double weight_decay, double beta1, double beta2,
                             double epsilon)
    : lr_(lr), weight_decay_(weight_decay), beta1_(beta1), beta2_(beta2), epsilon_(epsilon) {}

void AdamOptimizer::step(const std::vector<ParamView>& views) {
  ++t_;
  const double bias1 = 1.0 - std::pow(beta1_, t_);
  const double bias2 = 1.0 - std::pow(beta2_, t_);
  for (const ParamView& view : views) {
    auto [it, inserted] = slots_.try_emplace(view.name, Vector{}, Vector{});
    auto& [m, v] = it->second;
    if (inserted) {
      m = Vector::Zero(view.size());
      v = Vector::Zero(view.size());
    }
    Eigen::Map<Vector> value(view.value, view.size());
    Eigen::Map<const Vector> grad(view.grad, view.size());
    // The raw rates are reparameterized; decaying them toward zero would
    // drift alpha/beta toward 0.5 regardless of data, so they are exempt.
    const bool is_rate = view.name == "encoder.alpha_raw" || view.name == "encoder.beta_raw";
    const Vector effective =
        is_rate || weight_decay_ == 0.0 ? Vector(grad) : Vector(grad + weight_decay_ * value);
    m = beta1_ * m + (1.0 - beta1_) * effective;
    v = beta2_ * v + (1.0 - beta2_) * effective.cwiseProduct(effective);
    value.array() -= lr_ * (m.array() / bias1) /
                     ((v.array() / bias2).sqrt() + epsilon_);
  }
}

namespace {

struct PreparedTree {
  const TreeRecord* record = nullptr;
  std::optional<StageTargets> targets;
};

struct BatchLossTotals {
  double ce_sum = 0.0;
  double kl_sum = 0.0;
  std::size_t labeled = 0;
};

/// Forward + backward for one tree; gradients are scaled by `scale` and
/// accumulated.
void accumulate_tree(const Model& model, const PreparedTree& item, double lambda,
                     double ce_weight, double scale, std::mt19937_64* dropout_rng,
                     ModelGrads& grads, BatchLossTotals& totals) {
  const PropagationTree& tree = item.record->tree;
  const TreeForward forward = model_forward(model, tree, dropout_rng);

  const double ce = cross_entropy(forward.prediction, tree.label);
  totals.ce_sum += ce;

  // Head and fused-embedding gradients from the cross-entropy term.
  Eigen::Vector2d glogits = forward.prediction.probs;
  glogits[tree.label] -= 1.0;
  glogits *= ce_weight * scale;

  Vector xg = Vector::Zero(forward.backbone.xf.size());
  if (forward.encoder) xg = forward.encoder->xg;
  grads.head.noalias() += glogits * (forward.backbone.xf + xg).transpose();
  const Vector gsum = model.head.transpose() * glogits;

  backbone_backward(model.config.backbone, model.backbone, forward.backbone, gsum,
                    grads.backbone);

  if (forward.encoder) {
    std::vector<Vector3> grad_phat;
    if (item.targets && lambda != 0.0) {
      const double kl = kl_state_loss(*item.targets, forward.encoder->phat);
      totals.kl_sum += kl;
      ++totals.labeled;
      grad_phat = kl_state_loss_backward(*item.targets, forward.encoder->phat);
      for (Vector3& g : grad_phat) g *= lambda * scale;
    } else if (item.targets) {
      totals.kl_sum += kl_state_loss(*item.targets, forward.encoder->phat);
      ++totals.labeled;
    }
    encoder_backward(model.encoder, *forward.encoder, gsum, grad_phat, grads.encoder);
  }
}

MetricsSummary evaluate_split(const Model& model, std::span<const TreeRecord> records) {
  std::vector<double> scores;
  std::vector<int> labels;
  scores.reserve(records.size());
  labels.reserve(records.size());
  for (const TreeRecord& record : records) {
    scores.push_back(rumor_score(model, record.tree));
    labels.push_back(record.tree.label);
  }
  return compute_metrics(scores, labels);
}

}  // namespace

TrainResult train(const DatasetSplits& splits, TrainConfig config) {
  if (splits.train.empty()) throw std::invalid_argument("train: empty training split");
  if (splits.val.empty()) throw std::invalid_argument("train: empty validation split");
  if (!splits.train.front().tree.features) {
    throw std::invalid_argument("train: training data has no features");
  }

  std::mt19937_64 rng(config.seed);
  if (config.random_rates) {
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    config.alpha0 = uniform(rng);
    config.beta0 = uniform(rng);
  }

  ModelConfig model_config;
  model_config.backbone = config.backbone;
  if (model_config.backbone.input_dim == 0) {
    model_config.backbone.input_dim =
        static_cast<int>(splits.train.front().tree.features->cols());
  }
  model_config.dynamics = config.dynamics;
  model_config.use_encoder = config.use_encoder;
  model_config.alpha0 = config.alpha0;
  model_config.beta0 = config.beta0;

  Model model = Model::init(model_config, rng());
  ModelGrads grads = ModelGrads::zeros_like(model);
  const std::vector<ParamView> views = parameter_views(model, grads);
  AdamOptimizer optimizer(config.lr, config.weight_decay);

  // Stage targets are pure functions of the data; compute them once.
  std::vector<PreparedTree> prepared;
  prepared.reserve(splits.train.size());
  for (const TreeRecord& record : splits.train) {
    PreparedTree item;
    item.record = &record;
    if (record.labels && record.tree.node_count() >= 2) {
      item.targets = target_distributions(record.tree, *record.labels);
    }
    prepared.push_back(std::move(item));
  }

  TrainResult result;
  result.model = model;
  int epochs_since_best = 0;

  std::vector<std::size_t> order(prepared.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);

    BatchLossTotals epoch_totals;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop =
          std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      grads.set_zero();
      const double scale = 1.0 / static_cast<double>(stop - start);
      BatchLossTotals batch_totals;
      for (std::size_t k = start; k < stop; ++k) {
        accumulate_tree(model, prepared[order[k]], config.lambda, config.ce_weight, scale, &rng,
                        grads, batch_totals);
      }
      if (!std::isfinite(batch_totals.ce_sum) || !std::isfinite(batch_totals.kl_sum)) {
        throw std::runtime_error("train: loss became non-finite at epoch " +
                                 std::to_string(epoch));
      }
      optimizer.step(views);
      epoch_totals.ce_sum += batch_totals.ce_sum;
      epoch_totals.kl_sum += batch_totals.kl_sum;
      epoch_totals.labeled += batch_totals.labeled;
    }

    const MetricsSummary val = evaluate_split(model, splits.val);
    EpochLog entry;
    entry.epoch = epoch;
    entry.l_r = epoch_totals.ce_sum / static_cast<double>(prepared.size());
    entry.l_p = epoch_totals.labeled > 0
                    ? epoch_totals.kl_sum / static_cast<double>(epoch_totals.labeled)
                    : 0.0;
    entry.val_acc = val.acc;
    entry.val_auc = val.auc;
    entry.val_f1 = val.f1;
    result.log.push_back(entry);

    if (val.acc > result.best_val_acc || result.best_epoch == 0) {
      result.best_val_acc = val.acc;
      result.best_epoch = epoch;
      result.model = model;
      epochs_since_best = 0;
    } else if (++epochs_since_best >= config.patience) {
      break;
    }
  }
  return result;
}

std::vector<double> predict_scores(const Model& model, std::span<const TreeRecord> records) {
  std::vector<double> scores;
  scores.reserve(records.size());
  for (const TreeRecord& record : records) scores.push_back(rumor_score(model, record.tree));
  return scores;
}

void write_train_log(const std::filesystem::path& path, std::span<const EpochLog> log) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("write_train_log: cannot open " + path.string());
  for (const EpochLog& entry : log) {
    nlohmann::ordered_json line;
    line["epoch"] = entry.epoch;
    line["l_r"] = entry.l_r;
    line["l_p"] = entry.l_p;
    line["val_acc"] = entry.val_acc;
    if (entry.val_auc) {
      line["val_auc"] = *entry.val_auc;
    } else {
      line["val_auc"] = nullptr;
    }
    line["val_f1"] = entry.val_f1;
    out << line.dump() << '\n';
  }
}

}  // namespace ein
