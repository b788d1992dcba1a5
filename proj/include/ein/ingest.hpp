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

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ein/io.hpp"
#include "ein/tree.hpp"

namespace ein {

class IngestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnknownFormat : public IngestError {
 public:
  using IngestError::IngestError;
};

class EmptyDataset : public IngestError {
 public:
  using IngestError::IngestError;
};

enum class DatasetFormat { Native, WeiboStyle, PhemeStyle };

DatasetFormat dataset_format_from_string(const std::string& name);

/// Lowercases ASCII, splits on Unicode whitespace and punctuation, and splits
/// CJK runs into single-character tokens.
std::vector<std::string> tokenize(std::string_view text);

/// Maps post text to a fixed-dimension feature vector. The hashing mode
/// buckets tokens by a stable hash and L2-normalizes the count vector; the
/// embedding-table mode averages known token vectors.
struct Featurizer {
  enum class Mode { Hashing, EmbeddingTable };

  Mode mode = Mode::Hashing;
  int dim = 200;
  std::unordered_map<std::string, Vector> table;

  static Featurizer hashing(int dim = 200);
  /// Loads a table of `token<TAB>v1 v2 ... vh` lines; dim is taken from the
  /// first line.
  static Featurizer embedding_table(const std::filesystem::path& file);

  Vector embed_text(const std::string& text) const;
};

/// Attaches an n x h feature matrix; topology, labels, and texts are
/// untouched.
PropagationTree featurize(PropagationTree tree, const Featurizer& featurizer);

struct ParseReport {
  std::vector<TreeRecord> records;
  std::size_t skipped = 0;
};

/// Parses an external dataset into validated canonical trees. Formats:
///  - native: the .ndtree line format (see io.hpp);
///  - weibo-style: a directory with `Weibo.txt` lines of `key:value` tokens
///    (requires eid: and label:) and `post/<eid>.json`, a JSON array of
///    posts {"mid": str, "parent": str|null, "text": str} with the source
///    post first;
///  - pheme-style: line-delimited JSON events {"event_id", "is_rumour",
///    "tweets": [{"id", "in_reply_to", "text"}]}.
/// Malformed events are skipped and counted, never fatal.
ParseReport parse_dataset(const std::filesystem::path& path, DatasetFormat format);

struct SplitSpec {
  double train = 0.6;
  double val = 0.2;
  double test = 0.2;
  std::uint64_t seed = 7;
};

struct DatasetSplits {
  std::vector<TreeRecord> train;
  std::vector<TreeRecord> val;
  std::vector<TreeRecord> test;
};

/// Label-stratified partition. Within each class, val and test take the
/// floor of their ratio and the remainder goes to train. Deterministic under
/// the seed.
DatasetSplits split(std::vector<TreeRecord> dataset, const SplitSpec& spec);

}  // namespace ein
