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

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "ein/tree.hpp"

namespace ein {

// Stance labels are binary: 0 = Positive (agrees with / believes the parent),
// 1 = Negative (denies or doubts it). State labels are binary relative to the
// root: 0 = Support, 1 = Denial.

class UnparseableStance : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ProviderError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Retryable transport failure (connection refused, HTTP 5xx, ...).
class TransportError : public ProviderError {
 public:
  using ProviderError::ProviderError;
};

/// Per-node stance (vs. parent) and state (vs. root) labels for every
/// non-root node of one event.
struct StateLabels {
  std::string event_id;
  std::map<int, int> states;
  std::map<int, int> stances;
};

/// Renders the annotation prompt. The root-parent and non-root-parent
/// templates differ; placeholders are substituted byte-exactly.
std::string render_prompt(const std::string& parent_text, const std::string& child_text,
                          bool parent_is_root);

/// Extracts the first standalone "0" or "1" token from a raw model reply.
/// Throws UnparseableStance when neither appears.
int parse_stance(const std::string& raw_output);

/// Deterministic lexicon-based stand-in for the LLM: 1 when the child text
/// contains a deny/doubt marker, else 0.
int mock_stance(const std::string& parent_text, const std::string& child_text);

/// A stance provider maps a (parent text, child text, parent-is-root) triple
/// to a raw completion string.
class StanceProvider {
 public:
  virtual ~StanceProvider() = default;
  virtual std::string complete(const std::string& parent_text, const std::string& child_text,
                               bool parent_is_root) = 0;
  virtual std::string id() const = 0;
};

class MockStanceProvider final : public StanceProvider {
 public:
  std::string complete(const std::string& parent_text, const std::string& child_text,
                       bool parent_is_root) override;
  std::string id() const override { return "mock"; }
};

struct HttpProviderConfig {
  std::string endpoint;  // full URL of a chat-completion endpoint
  std::string model;
  double temperature = 0.2;
  std::string auth_env = "EIN_LLM_TOKEN";  // bearer token read from this env var
  int timeout_seconds = 60;
};

/// Generic chat-completion client. Sends the rendered prompt as a single
/// user message and returns the first choice's content verbatim.
class HttpStanceProvider final : public StanceProvider {
 public:
  explicit HttpStanceProvider(HttpProviderConfig config);
  std::string complete(const std::string& parent_text, const std::string& child_text,
                       bool parent_is_root) override;
  std::string id() const override;

 private:
  HttpProviderConfig config_;
};

/// Append-only stance cache, optionally persisted as line-delimited records
/// {key, stance, provider_id, prompt_version}. Inserts are serialized
/// through one writer.
class LabelCache {
 public:
  LabelCache() = default;
  explicit LabelCache(std::filesystem::path file);

  static std::string make_key(const std::string& parent_text, const std::string& child_text,
                              bool parent_is_root, const std::string& prompt_version);

  std::optional<int> lookup(const std::string& key) const;
  void insert(const std::string& key, int stance, const std::string& provider_id,
              const std::string& prompt_version);
  std::size_t size() const;

 private:
  std::filesystem::path file_;
  std::unordered_map<std::string, int> entries_;
  mutable std::mutex mutex_;
};

struct LabelerOptions {
  std::string prompt_version = "v1";
  int max_attempts = 3;
  std::chrono::milliseconds backoff_base{250};  // doubled per retry; zero in tests
};

/// Walks the tree in topological order, obtains a stance for every
/// (parent, child) pair, and XOR-composes stances into state labels.
/// Requires n >= 2. Cached pairs never reach the provider.
StateLabels label_tree(const PropagationTree& tree, StanceProvider& provider, LabelCache& cache,
                       const LabelerOptions& options = {});

}  // namespace ein
