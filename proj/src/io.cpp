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

#include "ein/io.hpp"

#include <fstream>

namespace ein {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

ordered_json record_to_json(const TreeRecord& record) {
  const PropagationTree& tree = record.tree;
  ordered_json line;
  line["id"] = tree.event_id;
  line["label"] = tree.label;
  ordered_json nodes = ordered_json::array();
  for (const Node& node : tree.nodes) {
    ordered_json n;
    n["id"] = node.id;
    if (node.parent) {
      n["parent"] = *node.parent;
    } else {
      n["parent"] = nullptr;
    }
    n["text"] = node.text;
    if (node.timestamp) n["timestamp"] = *node.timestamp;
    nodes.push_back(std::move(n));
  }
  line["nodes"] = std::move(nodes);
  if (record.labels) {
    ordered_json stances, states;
    for (const auto& [v, s] : record.labels->stances) stances[std::to_string(v)] = s;
    for (const auto& [v, s] : record.labels->states) states[std::to_string(v)] = s;
    line["stances"] = std::move(stances);
    line["states"] = std::move(states);
  }
  if (tree.features) {
    ordered_json rows = ordered_json::array();
    for (Eigen::Index r = 0; r < tree.features->rows(); ++r) {
      ordered_json row = ordered_json::array();
      for (Eigen::Index c = 0; c < tree.features->cols(); ++c) row.push_back((*tree.features)(r, c));
      rows.push_back(std::move(row));
    }
    line["features"] = std::move(rows);
  }
  return line;
}

TreeRecord record_from_json(const json& line) {
  std::vector<RawNode> raw;
  for (const json& n : line.at("nodes")) {
    RawNode rn;
    rn.id = n.at("id").get<int>();
    if (n.contains("parent") && !n.at("parent").is_null()) rn.parent = n.at("parent").get<int>();
    rn.text = n.value("text", std::string{});
    if (n.contains("timestamp") && !n.at("timestamp").is_null()) {
      rn.timestamp = n.at("timestamp").get<double>();
    }
    raw.push_back(std::move(rn));
  }
  const std::vector<int> file_order = [&raw] {
    std::vector<int> ids;
    ids.reserve(raw.size());
    for (const RawNode& rn : raw) ids.push_back(rn.id);
    return ids;
  }();

  std::unordered_map<int, int> id_map;
  TreeRecord record;
  record.tree = build_tree(line.at("id").get<std::string>(), line.at("label").get<int>(),
                           std::move(raw), &id_map);

  if (line.contains("features") && !line.at("features").is_null()) {
    const json& rows = line.at("features");
    if (rows.size() != file_order.size()) {
      throw TreeError("record_from_json: feature rows != node count in '" +
                      record.tree.event_id + "'");
    }
    const Eigen::Index dim = rows.empty() ? 0 : static_cast<Eigen::Index>(rows.at(0).size());
    Matrix features(static_cast<Eigen::Index>(rows.size()), dim);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const json& row = rows.at(i);
      if (static_cast<Eigen::Index>(row.size()) != dim) {
        throw TreeError("record_from_json: ragged feature rows in '" + record.tree.event_id + "'");
      }
      const int target = id_map.at(file_order[i]);
      for (Eigen::Index c = 0; c < dim; ++c) features(target, c) = row.at(c).get<double>();
    }
    record.tree.features = std::move(features);
  }

  const auto read_label_map = [&](const char* field) {
    std::map<int, int> out;
    if (!line.contains(field) || line.at(field).is_null()) return out;
    for (const auto& [k, v] : line.at(field).items()) {
      out[id_map.at(std::stoi(k))] = v.get<int>();
    }
    return out;
  };
  auto states = read_label_map("states");
  auto stances = read_label_map("stances");
  if (!states.empty() || !stances.empty()) {
    record.labels = StateLabels{record.tree.event_id, std::move(states), std::move(stances)};
  }
  return record;
}

NdtreeContent read_ndtree(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_ndtree: cannot open " + path.string());
  NdtreeContent content;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      const json parsed = json::parse(line);
      if (parsed.contains("_meta")) {
        content.meta = parsed.at("_meta");
        continue;
      }
      content.records.push_back(record_from_json(parsed));
    } catch (const std::exception&) {
      ++content.skipped;
    }
  }
  return content;
}

void write_ndtree(const std::filesystem::path& path, std::span<const TreeRecord> records,
                  const nlohmann::json* meta) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("write_ndtree: cannot open " + path.string());
  if (meta != nullptr) {
    ordered_json head;
    head["_meta"] = *meta;
    out << head.dump() << '\n';
  }
  for (const TreeRecord& record : records) {
    out << record_to_json(record).dump() << '\n';
  }
}

}  // namespace ein
