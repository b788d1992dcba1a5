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

#include "ein/tree.hpp"

#include <algorithm>
#include <deque>
#include <map>

namespace ein {

PropagationTree build_tree(std::string event_id, int label, std::vector<RawNode> raw_nodes,
                           std::unordered_map<int, int>* id_map) {
  if (raw_nodes.empty()) {
    throw TreeError("build_tree: event '" + event_id + "' has no nodes");
  }

  std::unordered_map<int, const RawNode*> by_id;
  by_id.reserve(raw_nodes.size());
  const RawNode* root = nullptr;
  for (const RawNode& rn : raw_nodes) {
    if (!by_id.emplace(rn.id, &rn).second) {
      throw TreeError("build_tree: duplicate node id " + std::to_string(rn.id) + " in event '" +
                      event_id + "'");
    }
    if (!rn.parent.has_value()) {
      if (root != nullptr) {
        throw MultipleRootError("build_tree: more than one parentless node in event '" + event_id +
                                "'");
      }
      root = &rn;
    }
  }
  if (root == nullptr) {
    // Every node claims a parent, so the parent relation must contain a cycle.
    throw CycleError("build_tree: no root node in event '" + event_id + "'");
  }
  for (const RawNode& rn : raw_nodes) {
    if (rn.parent && by_id.find(*rn.parent) == by_id.end()) {
      throw DanglingParentError("build_tree: node " + std::to_string(rn.id) +
                                " references missing parent " + std::to_string(*rn.parent) +
                                " in event '" + event_id + "'");
    }
  }

  // Children keyed by parent id, siblings ordered by original id.
  std::map<int, std::vector<int>> children;
  for (const RawNode& rn : raw_nodes) {
    if (rn.parent) children[*rn.parent].push_back(rn.id);
  }
  for (auto& [parent, kids] : children) std::sort(kids.begin(), kids.end());

  PropagationTree tree;
  tree.event_id = std::move(event_id);
  tree.label = label;
  tree.nodes.reserve(raw_nodes.size());

  std::unordered_map<int, int> canonical;
  canonical.reserve(raw_nodes.size());
  std::deque<int> frontier{root->id};
  while (!frontier.empty()) {
    const int original = frontier.front();
    frontier.pop_front();
    const RawNode& rn = *by_id.at(original);
    const int index = static_cast<int>(tree.nodes.size());
    canonical.emplace(original, index);
    Node node;
    node.id = index;
    node.text = rn.text;
    node.timestamp = rn.timestamp;
    if (rn.parent) node.parent = canonical.at(*rn.parent);
    tree.nodes.push_back(std::move(node));
    if (auto it = children.find(original); it != children.end()) {
      for (int kid : it->second) frontier.push_back(kid);
    }
  }

  if (tree.nodes.size() != raw_nodes.size()) {
    // Nodes unreachable from the root, with all parent ids present: a cycle.
    throw CycleError("build_tree: " + std::to_string(raw_nodes.size() - tree.nodes.size()) +
                     " nodes unreachable from the root in event '" + tree.event_id + "'");
  }
  if (id_map != nullptr) *id_map = std::move(canonical);
  return tree;
}

std::vector<int> node_depths(const PropagationTree& tree) {
  std::vector<int> depths(tree.nodes.size(), 0);
  for (std::size_t i = 1; i < tree.nodes.size(); ++i) {
    depths[i] = depths[static_cast<std::size_t>(*tree.nodes[i].parent)] + 1;
  }
  return depths;
}

int depth(const PropagationTree& tree) {
  const auto depths = node_depths(tree);
  return *std::max_element(depths.begin(), depths.end());
}

std::vector<int> nodes_at_depth(const PropagationTree& tree, int t) {
  if (t < 0 || t > depth(tree)) {
    throw std::out_of_range("nodes_at_depth: t=" + std::to_string(t) + " outside [0, " +
                            std::to_string(depth(tree)) + "]");
  }
  const auto depths = node_depths(tree);
  std::vector<int> out;
  for (std::size_t i = 0; i < depths.size(); ++i) {
    if (depths[i] == t) out.push_back(static_cast<int>(i));
  }
  return out;
}

DepthBucket depth_bucket(int d) {
  if (d < 1) {
    throw std::out_of_range("depth_bucket: depth must be >= 1, got " + std::to_string(d));
  }
  if (d == 1) return DepthBucket::D1;
  if (d <= 5) return DepthBucket::D2to5;
  return DepthBucket::Dgt5;
}

const char* to_string(DepthBucket bucket) {
  switch (bucket) {
    case DepthBucket::D1:
      return "D1";
    case DepthBucket::D2to5:
      return "D2to5";
    case DepthBucket::Dgt5:
      return "Dgt5";
  }
  return "?";
}

void validate_tree(const PropagationTree& tree) {
  if (tree.nodes.empty()) throw TreeError("tree '" + tree.event_id + "' has no nodes");
  if (tree.nodes[0].parent.has_value()) {
    throw TreeError("tree '" + tree.event_id + "': node 0 must be the root");
  }
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    const Node& node = tree.nodes[i];
    if (node.id != static_cast<int>(i)) {
      throw TreeError("tree '" + tree.event_id + "': node ids must equal their index");
    }
    if (i > 0) {
      if (!node.parent.has_value()) {
        throw MultipleRootError("tree '" + tree.event_id + "': second parentless node at index " +
                                std::to_string(i));
      }
      if (*node.parent < 0 || *node.parent >= static_cast<int>(i)) {
        throw TreeError("tree '" + tree.event_id + "': parent of node " + std::to_string(i) +
                        " must precede it");
      }
    }
  }
  if (tree.features && tree.features->rows() != tree.node_count()) {
    throw TreeError("tree '" + tree.event_id + "': feature rows (" +
                    std::to_string(tree.features->rows()) + ") != node count (" +
                    std::to_string(tree.node_count()) + ")");
  }
}

}  // namespace ein
