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

#include "ein/config.hpp"

#include <fstream>

namespace ein {

using json = nlohmann::json;

json default_run_config() {
  return json{
      {"seed", 1},
      {"data",
       {{"featurizer", "hashing"},
        {"feature_dim", 200},
        {"embedding_table", ""},
        {"split", {{"train", 0.6}, {"val", 0.2}, {"test", 0.2}, {"seed", 7}}},
        {"generator",
         {{"classes",
           json::array({{{"alpha", 0.6}, {"beta", 0.2}, {"nodes_min", 20}, {"nodes_max", 60},
                         {"max_depth", 6}},
                        {{"alpha", 0.2}, {"beta", 0.6}, {"nodes_min", 10}, {"nodes_max", 40},
                         {"max_depth", 3}}})},
          {"feature_dim", 16},
          {"noise_sigma", 1.0},
          {"pattern_scale", 1.0}}}}},
      {"labeler",
       {{"provider", "mock"},
        {"endpoint", ""},
        {"model", ""},
        {"temperature", 0.2},
        {"prompt_version", "v1"},
        {"max_attempts", 3},
        {"cache", ""}}},
      {"model",
       {{"backbone", "gcn"},
        {"layers", 2},
        {"hidden", 64},
        {"dropout", 0.2},
        {"dynamics", "eusd"},
        {"use_encoder", true}}},
      {"train",
       {{"lambda", 0.5},
        {"alpha0", 0.5},
        {"beta0", 0.5},
        {"random_rates", false},
        {"ce_weight", 1.0},
        {"lr", 0.0005},
        {"weight_decay", 0.0001},
        {"batch_size", 128},
        {"epochs", 100},
        {"patience", 10},
        {"seed", 1}}},
      {"eval", {{"by_depth", false}}},
  };
}

void merge_config(json& base, const json& overlay) {
  if (!overlay.is_object() || !base.is_object()) {
    base = overlay;
    return;
  }
  for (const auto& [key, value] : overlay.items()) {
    if (base.contains(key)) {
      merge_config(base[key], value);
    } else {
      base[key] = value;
    }
  }
}

json load_run_config(const std::optional<std::filesystem::path>& file) {
  json config = default_run_config();
  if (file) {
    std::ifstream in(*file);
    if (!in) throw std::runtime_error("load_run_config: cannot open " + file->string());
    merge_config(config, json::parse(in));
  }
  return config;
}

GeneratorConfig generator_from_config(const json& config) {
  const json& g = config.at("data").at("generator");
  GeneratorConfig out;
  out.classes.clear();
  for (const json& c : g.at("classes")) {
    GeneratorClassSpec spec;
    spec.alpha = c.at("alpha").get<double>();
    spec.beta = c.at("beta").get<double>();
    spec.nodes_min = c.value("nodes_min", spec.nodes_min);
    spec.nodes_max = c.value("nodes_max", spec.nodes_max);
    spec.max_depth = c.value("max_depth", spec.max_depth);
    out.classes.push_back(spec);
  }
  out.feature_dim = g.value("feature_dim", out.feature_dim);
  out.noise_sigma = g.value("noise_sigma", out.noise_sigma);
  out.pattern_scale = g.value("pattern_scale", out.pattern_scale);
  if (g.contains("pattern_support")) {
    out.pattern_support = g.at("pattern_support").get<std::vector<double>>();
    out.pattern_denial = g.at("pattern_denial").get<std::vector<double>>();
  }
  validate(out);
  return out;
}

Featurizer featurizer_from_config(const json& config) {
  const json& d = config.at("data");
  const std::string mode = d.at("featurizer").get<std::string>();
  if (mode == "hashing") {
    return Featurizer::hashing(d.at("feature_dim").get<int>());
  }
  if (mode == "embedding-table") {
    const std::string table = d.at("embedding_table").get<std::string>();
    if (table.empty()) {
      throw IngestError("featurizer: embedding-table mode needs data.embedding_table");
    }
    return Featurizer::embedding_table(table);
  }
  throw IngestError("featurizer: unknown mode '" + mode + "'");
}

SplitSpec split_spec_from_config(const json& config) {
  const json& s = config.at("data").at("split");
  SplitSpec spec;
  spec.train = s.at("train").get<double>();
  spec.val = s.at("val").get<double>();
  spec.test = s.at("test").get<double>();
  spec.seed = s.at("seed").get<std::uint64_t>();
  return spec;
}

TrainConfig train_config_from(const json& config) {
  const json& m = config.at("model");
  const json& t = config.at("train");
  TrainConfig out;
  out.backbone.kind = backbone_kind_from_string(m.at("backbone").get<std::string>());
  out.backbone.layers = m.at("layers").get<int>();
  out.backbone.hidden = m.at("hidden").get<int>();
  out.backbone.dropout = m.at("dropout").get<double>();
  out.dynamics = dynamics_kind_from_string(m.at("dynamics").get<std::string>());
  out.use_encoder = m.at("use_encoder").get<bool>();
  out.lambda = t.at("lambda").get<double>();
  out.alpha0 = t.at("alpha0").get<double>();
  out.beta0 = t.at("beta0").get<double>();
  out.random_rates = t.at("random_rates").get<bool>();
  out.ce_weight = t.at("ce_weight").get<double>();
  out.lr = t.at("lr").get<double>();
  out.weight_decay = t.at("weight_decay").get<double>();
  out.batch_size = t.at("batch_size").get<int>();
  out.epochs = t.at("epochs").get<int>();
  out.patience = t.at("patience").get<int>();
  out.seed = t.at("seed").get<std::uint64_t>();
  return out;
}

LabelerOptions labeler_options_from_config(const json& config) {
  const json& l = config.at("labeler");
  LabelerOptions options;
  options.prompt_version = l.at("prompt_version").get<std::string>();
  options.max_attempts = l.at("max_attempts").get<int>();
  return options;
}

std::unique_ptr<StanceProvider> provider_from_config(const json& config) {
  const json& l = config.at("labeler");
  const std::string provider = l.at("provider").get<std::string>();
  if (provider == "mock") return std::make_unique<MockStanceProvider>();
  if (provider == "http") {
    HttpProviderConfig http;
    http.endpoint = l.at("endpoint").get<std::string>();
    http.model = l.at("model").get<std::string>();
    http.temperature = l.at("temperature").get<double>();
    return std::make_unique<HttpStanceProvider>(http);
  }
  throw ProviderError("unknown stance provider '" + provider + "'");
}

}  // namespace ein
