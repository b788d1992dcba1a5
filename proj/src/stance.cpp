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

#include "ein/stance.hpp"

#include <array>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "ein/math.hpp"

namespace ein {
namespace {

using json = nlohmann::json;

constexpr const char* kRootTemplate =
    "- Source post: '{source_sentence}'\n"
    "- Responsive post: '{response_sentence}'\n"
    "- Based on the content of the response comment, determine its attitude towards the source "
    "post and choose one of the following options: The response comment believes the source "
    "post: 0, The response comment does not believe (or doubts) the source post: 1. If the "
    "response comment only contains '@' someone(s) without any other content, then you can "
    "consider that the response is believing the source post. You only need to select one label "
    "from the options above as the final result, no additional text is required.";

constexpr const char* kNonRootTemplate =
    "- Source post: '{source_sentence}'\n"
    "- Responsive post: '{response_sentence}'\n"
    "- Based on the content of the response sentence, determine its attitude towards the source "
    "sentence and choose one of the following options: The response sentence agrees with the "
    "source sentence: 0, The response sentence disagrees (or doubts) the source sentence:1. If "
    "the response sentence only contains '@' someone(s) without any other content, then you can "
    "consider that the response is agreeing to the source sentence. You only need to select one "
    "label from the options above as the final result, no additional text is required.";

std::string substitute(std::string text, const std::string& placeholder, const std::string& value) {
  const auto pos = text.find(placeholder);
  return text.replace(pos, placeholder.size(), value);
}

const std::array<std::string, 8> kDenyLexicon = {"fake", "false",    "doubt", "rumor",
                                                 "lie",  "假",   // 假
                                                 "谣言",     // 谣言
                                                 "骗"};          // 骗

std::string ascii_lower(const std::string& s) {
  std::string out = s;
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

std::string render_prompt(const std::string& parent_text, const std::string& child_text,
                          bool parent_is_root) {
  std::string prompt = parent_is_root ? kRootTemplate : kNonRootTemplate;
  prompt = substitute(std::move(prompt), "{source_sentence}", parent_text);
  prompt = substitute(std::move(prompt), "{response_sentence}", child_text);
  return prompt;
}

int parse_stance(const std::string& raw_output) {
  const auto alnum = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; };
  for (std::size_t i = 0; i < raw_output.size(); ++i) {
    const char c = raw_output[i];
    if (c != '0' && c != '1') continue;
    const bool left_clear = i == 0 || !alnum(raw_output[i - 1]);
    const bool right_clear = i + 1 == raw_output.size() || !alnum(raw_output[i + 1]);
    if (left_clear && right_clear) return c - '0';
  }
  throw UnparseableStance("parse_stance: no standalone 0/1 token in reply: \"" + raw_output +
                          "\"");
}

int mock_stance(const std::string& /*parent_text*/, const std::string& child_text) {
  const std::string lowered = ascii_lower(child_text);
  const std::vector<std::string> tokens = tokenize(lowered);
  for (const std::string& marker : kDenyLexicon) {
    const bool ascii_marker =
        std::all_of(marker.begin(), marker.end(),
                    [](char c) { return static_cast<unsigned char>(c) < 0x80; });
    if (ascii_marker) {
      // Whole-token match; "believe" must not trip on "lie".
      if (std::find(tokens.begin(), tokens.end(), marker) != tokens.end()) return 1;
    } else if (lowered.find(marker) != std::string::npos) {
      return 1;
    }
  }
  return 0;
}

std::string MockStanceProvider::complete(const std::string& parent_text,
                                         const std::string& child_text, bool /*parent_is_root*/) {
  return mock_stance(parent_text, child_text) == 1 ? "1" : "0";
}

HttpStanceProvider::HttpStanceProvider(HttpProviderConfig config) : config_(std::move(config)) {
  if (config_.endpoint.find("://") == std::string::npos) {
    throw ProviderError("HttpStanceProvider: endpoint must be a full URL, got '" +
                        config_.endpoint + "'");
  }
}

std::string HttpStanceProvider::id() const { return "http:" + config_.model; }

std::string HttpStanceProvider::complete(const std::string& parent_text,
                                         const std::string& child_text, bool parent_is_root) {
  const auto scheme_end = config_.endpoint.find("://") + 3;
  const auto path_start = config_.endpoint.find('/', scheme_end);
  const std::string base = config_.endpoint.substr(0, path_start);
  const std::string path =
      path_start == std::string::npos ? "/" : config_.endpoint.substr(path_start);

  httplib::Client client(base);
  client.set_connection_timeout(config_.timeout_seconds);
  client.set_read_timeout(config_.timeout_seconds);
  if (const char* token = std::getenv(config_.auth_env.c_str()); token && *token) {
    client.set_bearer_token_auth(token);
  }

  json request = {
      {"model", config_.model},
      {"messages",
       json::array({{{"role", "user"},
                     {"content", render_prompt(parent_text, child_text, parent_is_root)}}})},
      {"temperature", config_.temperature},
  };

  auto response = client.Post(path, request.dump(), "application/json");
  if (!response) {
    throw TransportError("HttpStanceProvider: no response from " + config_.endpoint + " (" +
                         httplib::to_string(response.error()) + ")");
  }
  if (response->status < 200 || response->status >= 300) {
    throw TransportError("HttpStanceProvider: HTTP " + std::to_string(response->status) +
                         " from " + config_.endpoint);
  }
  try {
    const json body = json::parse(response->body);
    return body.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw ProviderError(std::string("HttpStanceProvider: malformed completion body: ") + e.what());
  }
}

LabelCache::LabelCache(std::filesystem::path file) : file_(std::move(file)) {
  std::ifstream in(file_);
  if (!in) return;  // absent cache file starts empty and is created on insert
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      const json record = json::parse(line);
      entries_[record.at("key").get<std::string>()] = record.at("stance").get<int>();
    } catch (const json::exception&) {
      continue;  // tolerate truncated trailing records
    }
  }
}

std::string LabelCache::make_key(const std::string& parent_text, const std::string& child_text,
                                 bool parent_is_root, const std::string& prompt_version) {
  std::string buffer;
  buffer.reserve(parent_text.size() + child_text.size() + prompt_version.size() + 24);
  buffer += std::to_string(parent_text.size());
  buffer += ':';
  buffer += parent_text;
  buffer += '|';
  buffer += std::to_string(child_text.size());
  buffer += ':';
  buffer += child_text;
  buffer += '|';
  buffer += parent_is_root ? '1' : '0';
  buffer += '|';
  buffer += prompt_version;
  return content_key(buffer);
}

std::optional<int> LabelCache::lookup(const std::string& key) const {
  std::lock_guard lock(mutex_);
  if (auto it = entries_.find(key); it != entries_.end()) return it->second;
  return std::nullopt;
}

void LabelCache::insert(const std::string& key, int stance, const std::string& provider_id,
                        const std::string& prompt_version) {
  std::lock_guard lock(mutex_);
  if (!entries_.emplace(key, stance).second) return;
  if (file_.empty()) return;
  std::ofstream out(file_, std::ios::app);
  out << json{{"key", key},
              {"stance", stance},
              {"provider_id", provider_id},
              {"prompt_version", prompt_version}}
             .dump()
      << '\n';
}

std::size_t LabelCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

StateLabels label_tree(const PropagationTree& tree, StanceProvider& provider, LabelCache& cache,
                       const LabelerOptions& options) {
  if (tree.node_count() < 2) {
    throw std::invalid_argument("label_tree: tree '" + tree.event_id +
                                "' has no responsive posts");
  }

  StateLabels labels;
  labels.event_id = tree.event_id;

  for (int v = 1; v < tree.node_count(); ++v) {
    const int parent = *tree.nodes[v].parent;
    const bool parent_is_root = parent == 0;
    const std::string& parent_text = tree.nodes[parent].text;
    const std::string& child_text = tree.nodes[v].text;

    const std::string key =
        LabelCache::make_key(parent_text, child_text, parent_is_root, options.prompt_version);
    int stance = -1;
    if (auto cached = cache.lookup(key)) {
      stance = *cached;
    } else {
      std::string last_error;
      for (int attempt = 0; attempt < options.max_attempts; ++attempt) {
        if (attempt > 0 && options.backoff_base.count() > 0) {
          std::this_thread::sleep_for(options.backoff_base * (1 << (attempt - 1)));
        }
        try {
          stance = parse_stance(provider.complete(parent_text, child_text, parent_is_root));
          break;
        } catch (const TransportError& e) {
          last_error = e.what();
        } catch (const UnparseableStance& e) {
          last_error = e.what();
        }
      }
      if (stance < 0) {
        throw ProviderError("label_tree: node " + std::to_string(v) + " of '" + tree.event_id +
                            "' failed after " + std::to_string(options.max_attempts) +
                            " attempts: " + last_error);
      }
      cache.insert(key, stance, provider.id(), options.prompt_version);
    }

    labels.stances[v] = stance;
    labels.states[v] = parent_is_root ? stance : labels.states.at(parent) ^ stance;
  }
  return labels;
}

}  // namespace ein
