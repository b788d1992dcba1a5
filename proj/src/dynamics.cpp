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

#include "ein/dynamics.hpp"

#include <cmath>
#include <stdexcept>

namespace ein {

void validate(const EusdParams& params) {
  if (!(params.alpha >= 0.0) || !(params.beta >= 0.0)) {
    throw std::invalid_argument("EusdParams: rates must be nonnegative, got (" +
                                std::to_string(params.alpha) + ", " + std::to_string(params.beta) +
                                ")");
  }
  if (params.e != 1.0) {
    throw std::invalid_argument("EusdParams: the environment rate is fixed at 1");
  }
}

namespace {

// Unit-stage stepping is stable only while alpha + beta < 1; the continuous
// solution has no such bound.
void require_discrete_stability(const EusdParams& params, const char* who) {
  if (!(params.alpha + params.beta < 1.0)) {
    throw std::invalid_argument(std::string(who) + ": needs alpha + beta < 1, got " +
                                std::to_string(params.alpha + params.beta));
  }
}

}  // namespace

PopulationState step_eusd(const PopulationState& state, const EusdParams& params) {
  validate(params);
  require_discrete_stability(params, "step_eusd");
  const double to_support = params.alpha * state.u * params.e;
  const double to_denial = params.beta * state.u * params.e;
  return {state.u - to_support - to_denial, state.s + to_support, state.d + to_denial};
}

PopulationState solve_eusd_closed_form(const PopulationState& initial, const EusdParams& params,
                                       double t) {
  validate(params);
  const double rate = (params.alpha + params.beta) * params.e;
  if (rate == 0.0) throw std::invalid_argument("solve_eusd_closed_form: alpha + beta must be > 0");
  const double decay = std::exp(-rate * t);
  const double converted = initial.u * (1.0 - decay);
  return {initial.u * decay, initial.s + params.alpha / (params.alpha + params.beta) * converted,
          initial.d + params.beta / (params.alpha + params.beta) * converted};
}

PopulationState step_usd(const PopulationState& fractions, const EusdParams& params,
                         std::uint64_t* clamp_events) {
  validate(params);
  require_discrete_stability(params, "step_usd");
  if (std::abs(fractions.total() - 1.0) > 1e-9 || fractions.u < 0.0 || fractions.s < 0.0 ||
      fractions.d < 0.0) {
    throw std::invalid_argument("step_usd: state must be nonnegative fractions summing to 1");
  }
  double to_support = params.alpha * fractions.u * fractions.s;
  double to_denial = params.beta * fractions.u * fractions.d;
  const double outflow = to_support + to_denial;
  if (outflow > fractions.u) {
    // Rescale both sinks so u' lands exactly at 0.
    const double scale = fractions.u / outflow;
    to_support *= scale;
    to_denial *= scale;
    if (clamp_events != nullptr) ++*clamp_events;
  }
  return {fractions.u - to_support - to_denial, fractions.s + to_support,
          fractions.d + to_denial};
}

void validate(const GeneratorConfig& config) {
  if (config.classes.empty()) throw std::invalid_argument("GeneratorConfig: no classes");
  for (const GeneratorClassSpec& spec : config.classes) {
    if (spec.alpha < 0.0 || spec.beta < 0.0 || spec.alpha + spec.beta <= 0.0) {
      throw std::invalid_argument("GeneratorConfig: class rates must be nonnegative with a "
                                  "positive sum");
    }
    if (spec.nodes_min < 1 || spec.nodes_max < spec.nodes_min || spec.max_depth < 1) {
      throw std::invalid_argument("GeneratorConfig: invalid node-count range or max depth");
    }
  }
  if (config.feature_dim < 2) throw std::invalid_argument("GeneratorConfig: feature_dim < 2");
  if (config.noise_sigma < 0.0) throw std::invalid_argument("GeneratorConfig: negative sigma");
  const bool has_s = !config.pattern_support.empty();
  const bool has_d = !config.pattern_denial.empty();
  if (has_s != has_d) {
    throw std::invalid_argument("GeneratorConfig: provide both patterns or neither");
  }
  if (has_s) {
    if (static_cast<int>(config.pattern_support.size()) != config.feature_dim ||
        static_cast<int>(config.pattern_denial.size()) != config.feature_dim) {
      throw std::invalid_argument("GeneratorConfig: pattern size != feature_dim");
    }
    double dot = 0.0;
    for (int i = 0; i < config.feature_dim; ++i) {
      dot += config.pattern_support[i] * config.pattern_denial[i];
    }
    if (std::abs(dot) > 1e-9) {
      throw std::invalid_argument("GeneratorConfig: patterns must be orthogonal");
    }
  }
}

namespace {

std::pair<Vector, Vector> resolve_patterns(const GeneratorConfig& config) {
  if (!config.pattern_support.empty()) {
    return {Eigen::Map<const Vector>(config.pattern_support.data(), config.feature_dim),
            Eigen::Map<const Vector>(config.pattern_denial.data(), config.feature_dim)};
  }
  Vector support = Vector::Zero(config.feature_dim);
  Vector denial = Vector::Zero(config.feature_dim);
  support[0] = config.pattern_scale;
  denial[1] = config.pattern_scale;
  return {support, denial};
}

}  // namespace

TreeRecord generate_synthetic_tree(const GeneratorConfig& config, int class_label,
                                   std::mt19937_64& rng) {
  validate(config);
  if (class_label < 0 || class_label >= static_cast<int>(config.classes.size())) {
    throw std::invalid_argument("generate_synthetic_tree: class label out of range");
  }
  const GeneratorClassSpec& spec = config.classes[static_cast<std::size_t>(class_label)];
  const auto [pattern_support, pattern_denial] = resolve_patterns(config);

  std::uniform_int_distribution<int> node_count_dist(spec.nodes_min, spec.nodes_max);
  const int n = node_count_dist(rng);

  std::vector<RawNode> raw(static_cast<std::size_t>(n));
  std::vector<int> depths(static_cast<std::size_t>(n), 0);
  raw[0] = RawNode{0, std::nullopt, "root", std::nullopt};
  // Parents eligible while strictly above max depth; the root always is
  // (max_depth >= 1).
  std::vector<int> eligible{0};
  for (int v = 1; v < n; ++v) {
    std::uniform_int_distribution<std::size_t> pick(0, eligible.size() - 1);
    const int parent = eligible[pick(rng)];
    raw[static_cast<std::size_t>(v)] =
        RawNode{v, parent, "post " + std::to_string(v), std::nullopt};
    depths[static_cast<std::size_t>(v)] = depths[static_cast<std::size_t>(parent)] + 1;
    if (depths[static_cast<std::size_t>(v)] < spec.max_depth) eligible.push_back(v);
  }

  const double support_probability = spec.alpha / (spec.alpha + spec.beta);
  std::bernoulli_distribution denial_draw(1.0 - support_probability);
  std::normal_distribution<double> noise(0.0, 1.0);

  StateLabels labels;
  Matrix features(n, config.feature_dim);
  for (Eigen::Index c = 0; c < config.feature_dim; ++c) features(0, c) = noise(rng) * config.noise_sigma;
  for (int v = 1; v < n; ++v) {
    const int state = denial_draw(rng) ? 1 : 0;
    const int parent = *raw[static_cast<std::size_t>(v)].parent;
    const int parent_state = parent == 0 ? 0 : labels.states.at(parent);
    labels.states[v] = state;
    labels.stances[v] = state ^ parent_state;
    const Vector& pattern = state == 0 ? pattern_support : pattern_denial;
    for (Eigen::Index c = 0; c < config.feature_dim; ++c) {
      features(v, c) = pattern[c] + noise(rng) * config.noise_sigma;
    }
  }

  TreeRecord record;
  // Node ids are already canonical (parents precede children by
  // construction); build_tree re-orders breadth-first.
  std::unordered_map<int, int> id_map;
  record.tree = build_tree("synthetic", class_label, std::move(raw), &id_map);
  Matrix canonical_features(n, config.feature_dim);
  StateLabels canonical_labels;
  canonical_labels.event_id = record.tree.event_id;
  for (int v = 0; v < n; ++v) canonical_features.row(id_map.at(v)) = features.row(v);
  for (const auto& [v, s] : labels.states) canonical_labels.states[id_map.at(v)] = s;
  for (const auto& [v, s] : labels.stances) canonical_labels.stances[id_map.at(v)] = s;
  record.tree.features = std::move(canonical_features);
  record.labels = std::move(canonical_labels);
  return record;
}

std::vector<TreeRecord> generate_synthetic_dataset(const GeneratorConfig& config, int count,
                                                   std::uint64_t seed) {
  validate(config);
  std::vector<TreeRecord> records;
  records.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    std::uniform_int_distribution<int> class_dist(0,
                                                  static_cast<int>(config.classes.size()) - 1);
    const int label = class_dist(rng);
    TreeRecord record = generate_synthetic_tree(config, label, rng);
    record.tree.event_id = "synthetic-" + std::to_string(i);
    if (record.labels) record.labels->event_id = record.tree.event_id;
    records.push_back(std::move(record));
  }
  return records;
}

}  // namespace ein
