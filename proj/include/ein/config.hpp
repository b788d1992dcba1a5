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

#include <filesystem>
#include <memory>
#include <optional>

#include <nlohmann/json.hpp>

#include "ein/dynamics.hpp"
#include "ein/ingest.hpp"
#include "ein/stance.hpp"
#include "ein/training.hpp"

namespace ein {

/// The run configuration is one JSON document with sections data, labeler,
/// model, train, and eval plus a global seed. CLI flags override individual
/// keys; the merged document is embedded into every artifact.
nlohmann::json default_run_config();

/// Defaults deep-merged with an optional config file.
nlohmann::json load_run_config(const std::optional<std::filesystem::path>& file);

/// Recursively overlays `overlay` onto `base` (objects merge, scalars and
/// arrays replace).
void merge_config(nlohmann::json& base, const nlohmann::json& overlay);

GeneratorConfig generator_from_config(const nlohmann::json& config);
Featurizer featurizer_from_config(const nlohmann::json& config);
SplitSpec split_spec_from_config(const nlohmann::json& config);
TrainConfig train_config_from(const nlohmann::json& config);
LabelerOptions labeler_options_from_config(const nlohmann::json& config);
std::unique_ptr<StanceProvider> provider_from_config(const nlohmann::json& config);

}  // namespace ein
