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

#include "ein/model.hpp"

#include <fstream>

#include "ein/version.hpp"

namespace ein {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

Model Model::init(const ModelConfig& config, std::uint64_t seed) {
  validate(config.backbone);
  std::mt19937_64 rng(seed);
  Model model;
  model.config = config;
  const int d_out = config.backbone.output_dim();
  model.encoder = make_encoder_params(config.backbone.input_dim, d_out, config.alpha0,
                                      config.beta0, rng);
  model.backbone = make_backbone_params(config.backbone, rng);
  const double limit = std::sqrt(6.0 / static_cast<double>(d_out + 2));
  std::uniform_real_distribution<double> uniform(-limit, limit);
  model.head = Matrix::NullaryExpr(2, d_out, [&] { return uniform(rng); });
  return model;
}

ModelGrads ModelGrads::zeros_like(const Model& model) {
  ModelGrads grads;
  grads.encoder = ein::zeros_like(model.encoder);
  grads.backbone = ein::zeros_like(model.backbone);
  grads.head = Matrix::Zero(model.head.rows(), model.head.cols());
  return grads;
}

void ModelGrads::set_zero() {
  encoder.alpha_raw = 0.0;
  encoder.beta_raw = 0.0;
  encoder.w_u0.setZero();
  encoder.b_s.setZero();
  encoder.b_d.setZero();
  encoder.w_u.setZero();
  encoder.w_s.setZero();
  encoder.w_d.setZero();
  encoder.w_x.setZero();
  encoder.score_u.setZero();
  encoder.score_s.setZero();
  encoder.score_d.setZero();
  for (auto& layer : backbone.down) {
    layer.weight.setZero();
    layer.bias.setZero();
  }
  for (auto& layer : backbone.up) {
    layer.weight.setZero();
    layer.bias.setZero();
  }
  head.setZero();
}

namespace {

ParamView view_of(std::string name, Vector& value, Vector& grad) {
  return {std::move(name), value.data(), grad.data(), value.size(), 1};
}

ParamView view_of(std::string name, Matrix& value, Matrix& grad) {
  return {std::move(name), value.data(), grad.data(), value.rows(), value.cols()};
}

ParamView view_of(std::string name, double& value, double& grad) {
  return {std::move(name), &value, &grad, 1, 1};
}

}  // namespace

std::vector<ParamView> parameter_views(Model& model, ModelGrads& grads) {
  std::vector<ParamView> views;
  if (model.config.use_encoder) {
    EncoderParams& e = model.encoder;
    EncoderParams& g = grads.encoder;
    views.push_back(view_of("encoder.alpha_raw", e.alpha_raw, g.alpha_raw));
    views.push_back(view_of("encoder.beta_raw", e.beta_raw, g.beta_raw));
    views.push_back(view_of("encoder.w_u0", e.w_u0, g.w_u0));
    views.push_back(view_of("encoder.b_s", e.b_s, g.b_s));
    views.push_back(view_of("encoder.b_d", e.b_d, g.b_d));
    views.push_back(view_of("encoder.w_u", e.w_u, g.w_u));
    views.push_back(view_of("encoder.w_s", e.w_s, g.w_s));
    views.push_back(view_of("encoder.w_d", e.w_d, g.w_d));
    views.push_back(view_of("encoder.w_x", e.w_x, g.w_x));
    views.push_back(view_of("encoder.score_u", e.score_u, g.score_u));
    views.push_back(view_of("encoder.score_s", e.score_s, g.score_s));
    views.push_back(view_of("encoder.score_d", e.score_d, g.score_d));
  }
  const auto add_stack = [&](const char* prefix, std::vector<GcnLayerParams>& stack,
                             std::vector<GcnLayerParams>& gstack) {
    for (std::size_t l = 0; l < stack.size(); ++l) {
      const std::string base = std::string(prefix) + std::to_string(l);
      views.push_back(view_of(base + ".weight", stack[l].weight, gstack[l].weight));
      views.push_back(view_of(base + ".bias", stack[l].bias, gstack[l].bias));
    }
  };
  add_stack("backbone.down.", model.backbone.down, grads.backbone.down);
  add_stack("backbone.up.", model.backbone.up, grads.backbone.up);
  views.push_back(view_of("head.w_l", model.head, grads.head));
  return views;
}

TreeForward model_forward(const Model& model, const PropagationTree& tree,
                          std::mt19937_64* dropout_rng) {
  TreeForward f;
  f.backbone = backbone_forward(tree, model.config.backbone, model.backbone, dropout_rng);
  Vector xg = Vector::Zero(f.backbone.xf.size());
  if (model.config.use_encoder) {
    const int stages = std::max(depth(tree), 1);
    f.encoder = encoder_forward(model.encoder, static_cast<double>(tree.node_count()), stages,
                                model.config.dynamics);
    xg = f.encoder->xg;
  }
  f.prediction = fuse_predict(f.backbone.xf, xg, model.head);
  return f;
}

double rumor_score(const Model& model, const PropagationTree& tree) {
  return model_forward(model, tree).prediction.probs[1];
}

namespace {

json model_config_to_json(const ModelConfig& config) {
  return json{{"backbone", to_string(config.backbone.kind)},
              {"layers", config.backbone.layers},
              {"hidden", config.backbone.hidden},
              {"dropout", config.backbone.dropout},
              {"input_dim", config.backbone.input_dim},
              {"dynamics", to_string(config.dynamics)},
              {"use_encoder", config.use_encoder},
              {"alpha0", config.alpha0},
              {"beta0", config.beta0}};
}

ModelConfig model_config_from_json(const json& j) {
  ModelConfig config;
  config.backbone.kind = backbone_kind_from_string(j.at("backbone").get<std::string>());
  config.backbone.layers = j.at("layers").get<int>();
  config.backbone.hidden = j.at("hidden").get<int>();
  config.backbone.dropout = j.at("dropout").get<double>();
  config.backbone.input_dim = j.at("input_dim").get<int>();
  config.dynamics = dynamics_kind_from_string(j.at("dynamics").get<std::string>());
  config.use_encoder = j.at("use_encoder").get<bool>();
  config.alpha0 = j.at("alpha0").get<double>();
  config.beta0 = j.at("beta0").get<double>();
  return config;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, Model& model,
                     const nlohmann::json& run_config, std::uint64_t seed) {
  ModelGrads grads = ModelGrads::zeros_like(model);
  ordered_json doc;
  doc["version"] = kVersion;
  doc["seed"] = seed;
  doc["config"] = run_config;
  doc["model"] = model_config_to_json(model.config);
  ordered_json params;
  for (const ParamView& view : parameter_views(model, grads)) {
    ordered_json tensor;
    tensor["rows"] = view.rows;
    tensor["cols"] = view.cols;
    tensor["data"] = std::vector<double>(view.value, view.value + view.size());
    params[view.name] = std::move(tensor);
  }
  doc["params"] = std::move(params);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("save_checkpoint: cannot open " + path.string());
  out << doc.dump() << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path.string());
  json doc = json::parse(in);

  Checkpoint checkpoint;
  checkpoint.run_config = doc.value("config", json::object());
  checkpoint.seed = doc.value("seed", 0ull);
  checkpoint.model = Model::init(model_config_from_json(doc.at("model")), checkpoint.seed);

  ModelGrads grads = ModelGrads::zeros_like(checkpoint.model);
  for (ParamView& view : parameter_views(checkpoint.model, grads)) {
    const json& tensor = doc.at("params").at(view.name);
    const auto data = tensor.at("data").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(data.size()) != view.size()) {
      throw std::runtime_error("load_checkpoint: shape mismatch for " + view.name);
    }
    std::copy(data.begin(), data.end(), view.value);
  }
  return checkpoint;
}

}  // namespace ein
