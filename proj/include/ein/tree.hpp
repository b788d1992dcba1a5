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

#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "ein/math.hpp"

namespace ein {

class TreeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CycleError : public TreeError {
 public:
  using TreeError::TreeError;
};

class MultipleRootError : public TreeError {
 public:
  using TreeError::TreeError;
};

class DanglingParentError : public TreeError {
 public:
  using TreeError::TreeError;
};

/// One post. The root (id 0) is the only node without a parent.
struct Node {
  int id = 0;
  std::optional<int> parent;
  std::string text;
  std::optional<double> timestamp;
};

/// Rooted tree of posts in canonical breadth-first order: node 0 is the
/// root and every parent index precedes its children. The optional feature
/// matrix has one row per node, in node order.
struct PropagationTree {
  std::string event_id;
  int label = 0;
  std::vector<Node> nodes;
  std::optional<Matrix> features;

  int node_count() const { return static_cast<int>(nodes.size()); }
};

/// Evaluation strata over positive tree depths.
enum class DepthBucket { D1, D2to5, Dgt5 };

struct RawNode {
  int id = 0;
  std::optional<int> parent;
  std::string text;
  std::optional<double> timestamp;
};

/// Validates a raw node list and returns the tree in canonical order
/// (breadth-first from the root, siblings by ascending original id, ids
/// reindexed to 0..n-1). If id_map is given it receives original id ->
/// canonical index.
PropagationTree build_tree(std::string event_id, int label, std::vector<RawNode> raw_nodes,
                           std::unordered_map<int, int>* id_map = nullptr);

/// Root distance of every node, in node order. Single pass; parents precede
/// children in canonical order.
std::vector<int> node_depths(const PropagationTree& tree);

/// Length in edges of the longest root-to-leaf path. Root-only tree -> 0.
int depth(const PropagationTree& tree);

/// Indices of the nodes at root distance t, ascending. t must lie in
/// [0, depth(tree)].
std::vector<int> nodes_at_depth(const PropagationTree& tree, int t);

/// Maps a positive depth to its stratum: 1 -> D1, 2..5 -> D2to5, >5 -> Dgt5.
/// Depth-0 trees are counted separately by the evaluation report and are
/// rejected here.
DepthBucket depth_bucket(int d);

const char* to_string(DepthBucket bucket);

/// Re-checks the structural invariants of an already-built tree.
void validate_tree(const PropagationTree& tree);

}  // namespace ein
