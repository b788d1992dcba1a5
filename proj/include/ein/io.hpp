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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ein/stance.hpp"
#include "ein/tree.hpp"

namespace ein {

/// One event as stored in an .ndtree file: the tree plus, when labeled,
/// its state/stance maps.
struct TreeRecord {
  PropagationTree tree;
  std::optional<StateLabels> labels;
};

struct NdtreeContent {
  std::vector<TreeRecord> records;
  std::size_t skipped = 0;               // malformed lines
  std::optional<nlohmann::json> meta;    // provenance carried by a leading _meta line
};

/// Reads a line-delimited tree file. Each line holds one event
/// {"id", "label", "nodes": [...]} with optional "stances", "states",
/// "features" and "timestamp" extensions. Trees are validated and
/// canonicalized on read; malformed lines are counted, not fatal.
NdtreeContent read_ndtree(const std::filesystem::path& path);

/// Writes records in canonical form, preceded by a {"_meta": ...} provenance
/// line when meta is non-null. Output is byte-deterministic.
void write_ndtree(const std::filesystem::path& path, std::span<const TreeRecord> records,
                  const nlohmann::json* meta = nullptr);

nlohmann::ordered_json record_to_json(const TreeRecord& record);
TreeRecord record_from_json(const nlohmann::json& line);

}  // namespace ein
