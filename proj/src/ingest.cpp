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

#include "ein/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

namespace ein {
namespace {

using json = nlohmann::json;

// --- UTF-8 scanning -------------------------------------------------------

std::uint32_t decode_utf8(std::string_view text, std::size_t& i) {
  const auto byte = [&](std::size_t k) { return static_cast<unsigned char>(text[k]); };
  const unsigned char b0 = byte(i);
  if (b0 < 0x80) {
    i += 1;
    return b0;
  }
  const auto continuation = [&](std::size_t k) {
    return k < text.size() && (byte(k) & 0xC0) == 0x80;
  };
  if ((b0 & 0xE0) == 0xC0 && continuation(i + 1)) {
    const std::uint32_t cp = ((b0 & 0x1Fu) << 6) | (byte(i + 1) & 0x3Fu);
    i += 2;
    return cp;
  }
  if ((b0 & 0xF0) == 0xE0 && continuation(i + 1) && continuation(i + 2)) {
    const std::uint32_t cp =
        ((b0 & 0x0Fu) << 12) | ((byte(i + 1) & 0x3Fu) << 6) | (byte(i + 2) & 0x3Fu);
    i += 3;
    return cp;
  }
  if ((b0 & 0xF8) == 0xF0 && continuation(i + 1) && continuation(i + 2) && continuation(i + 3)) {
    const std::uint32_t cp = ((b0 & 0x07u) << 18) | ((byte(i + 1) & 0x3Fu) << 12) |
                             ((byte(i + 2) & 0x3Fu) << 6) | (byte(i + 3) & 0x3Fu);
    i += 4;
    return cp;
  }
  i += 1;  // invalid byte, treat as Latin-1
  return b0;
}

void encode_utf8(std::uint32_t cp, std::string& out) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

bool is_space_cp(std::uint32_t cp) {
  if (cp <= 0x7F) return std::isspace(static_cast<int>(cp)) != 0;
  switch (cp) {
    case 0x00A0:
    case 0x1680:
    case 0x2028:
    case 0x2029:
    case 0x202F:
    case 0x205F:
    case 0x3000:
    case 0xFEFF:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

bool is_punct_cp(std::uint32_t cp) {
  if (cp <= 0x7F) return std::ispunct(static_cast<int>(cp)) != 0;
  return (cp >= 0x2010 && cp <= 0x2027) ||  // dashes, quotes, ellipsis
         (cp >= 0x3001 && cp <= 0x303F) ||  // CJK punctuation
         (cp >= 0xFE30 && cp <= 0xFE4F) ||  // vertical/compat forms
         (cp >= 0xFF01 && cp <= 0xFF0F) || (cp >= 0xFF1A && cp <= 0xFF20) ||
         (cp >= 0xFF3B && cp <= 0xFF40) || (cp >= 0xFF5B && cp <= 0xFF65);
}

bool is_cjk_cp(std::uint32_t cp) {
  return (cp >= 0x3400 && cp <= 0x4DBF) || (cp >= 0x4E00 && cp <= 0x9FFF) ||
         (cp >= 0xF900 && cp <= 0xFAFF) || (cp >= 0x3040 && cp <= 0x30FF) ||
         (cp >= 0xAC00 && cp <= 0xD7AF) || (cp >= 0x20000 && cp <= 0x2A6DF);
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  const auto flush = [&] {
    if (!current.empty()) {
      tokens.push_back(current);
      current.clear();
    }
  };
  std::size_t i = 0;
  while (i < text.size()) {
    const std::uint32_t cp = decode_utf8(text, i);
    if (is_space_cp(cp) || is_punct_cp(cp)) {
      flush();
    } else if (is_cjk_cp(cp)) {
      flush();
      std::string single;
      encode_utf8(cp, single);
      tokens.push_back(std::move(single));
    } else if (cp < 0x80) {
      current.push_back(static_cast<char>(std::tolower(static_cast<int>(cp))));
    } else {
      encode_utf8(cp, current);
    }
  }
  flush();
  return tokens;
}

Featurizer Featurizer::hashing(int dim) {
  Featurizer f;
  f.mode = Mode::Hashing;
  f.dim = dim;
  return f;
}

Featurizer Featurizer::embedding_table(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IngestError("embedding_table: cannot open " + file.string());
  Featurizer f;
  f.mode = Mode::EmbeddingTable;
  f.dim = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw IngestError("embedding_table: missing tab separator in " + file.string());
    }
    std::string token = line.substr(0, tab);
    std::istringstream values(line.substr(tab + 1));
    std::vector<double> entries;
    double v = 0.0;
    while (values >> v) entries.push_back(v);
    if (f.dim == 0) f.dim = static_cast<int>(entries.size());
    if (static_cast<int>(entries.size()) != f.dim || f.dim == 0) {
      throw IngestError("embedding_table: inconsistent vector size for token '" + token + "'");
    }
    f.table[std::move(token)] = Eigen::Map<const Vector>(entries.data(), f.dim);
  }
  if (f.table.empty()) throw IngestError("embedding_table: no entries in " + file.string());
  return f;
}

Vector Featurizer::embed_text(const std::string& text) const {
  Vector row = Vector::Zero(dim);
  const auto tokens = tokenize(text);
  if (mode == Mode::Hashing) {
    for (const std::string& token : tokens) {
      row[static_cast<Eigen::Index>(fnv1a64(token) % static_cast<std::uint64_t>(dim))] += 1.0;
    }
    const double norm = row.norm();
    if (norm > 0.0) row /= norm;
  } else {
    int hits = 0;
    for (const std::string& token : tokens) {
      if (auto it = table.find(token); it != table.end()) {
        row += it->second;
        ++hits;
      }
    }
    if (hits > 0) row /= static_cast<double>(hits);
  }
  return row;
}

PropagationTree featurize(PropagationTree tree, const Featurizer& featurizer) {
  Matrix features(tree.node_count(), featurizer.dim);
  for (int i = 0; i < tree.node_count(); ++i) {
    features.row(i) = featurizer.embed_text(tree.nodes[i].text).transpose();
  }
  tree.features = std::move(features);
  return tree;
}

DatasetFormat dataset_format_from_string(const std::string& name) {
  if (name == "native") return DatasetFormat::Native;
  if (name == "weibo-style") return DatasetFormat::WeiboStyle;
  if (name == "pheme-style") return DatasetFormat::PhemeStyle;
  throw UnknownFormat("unknown dataset format '" + name + "'");
}

namespace {

ParseReport parse_native(const std::filesystem::path& path) {
  NdtreeContent content = read_ndtree(path);
  return ParseReport{std::move(content.records), content.skipped};
}

ParseReport parse_weibo_style(const std::filesystem::path& root) {
  std::ifstream index(root / "Weibo.txt");
  if (!index) throw IngestError("weibo-style: cannot open " + (root / "Weibo.txt").string());
  ParseReport report;
  std::string line;
  while (std::getline(index, line)) {
    if (line.empty()) continue;
    std::string eid;
    int label = -1;
    std::istringstream fields(line);
    std::string field;
    while (fields >> field) {
      if (field.rfind("eid:", 0) == 0) eid = field.substr(4);
      if (field.rfind("label:", 0) == 0) label = std::stoi(field.substr(6));
    }
    if (eid.empty() || label < 0) {
      ++report.skipped;
      continue;
    }
    try {
      std::ifstream post_file(root / "post" / (eid + ".json"));
      if (!post_file) throw IngestError("missing post file for eid " + eid);
      const json posts = json::parse(post_file);
      std::vector<RawNode> raw;
      std::unordered_map<std::string, int> mid_to_id;
      for (const json& post : posts) {
        const std::string mid = post.at("mid").get<std::string>();
        const int id = static_cast<int>(raw.size());
        mid_to_id.emplace(mid, id);
        RawNode rn;
        rn.id = id;
        rn.text = post.value("text", std::string{});
        if (post.contains("t") && !post.at("t").is_null()) rn.timestamp = post.at("t").get<double>();
        if (post.contains("parent") && !post.at("parent").is_null()) {
          const std::string parent_mid = post.at("parent").get<std::string>();
          auto it = mid_to_id.find(parent_mid);
          if (it == mid_to_id.end()) {
            throw DanglingParentError("weibo-style: unknown parent mid " + parent_mid);
          }
          rn.parent = it->second;
        }
        raw.push_back(std::move(rn));
      }
      report.records.push_back(TreeRecord{build_tree(eid, label, std::move(raw)), std::nullopt});
    } catch (const std::exception&) {
      ++report.skipped;
    }
  }
  return report;
}

ParseReport parse_pheme_style(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestError("pheme-style: cannot open " + path.string());
  ParseReport report;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      const json event = json::parse(line);
      const std::string event_id = event.at("event_id").get<std::string>();
      int label = 0;
      const json& rumour = event.at("is_rumour");
      if (rumour.is_boolean()) {
        label = rumour.get<bool>() ? 1 : 0;
      } else {
        label = rumour.get<std::string>() == "rumour" ? 1 : 0;
      }
      std::vector<RawNode> raw;
      std::unordered_map<std::string, int> tid_to_id;
      const auto id_string = [](const json& v) {
        return v.is_string() ? v.get<std::string>() : v.dump();
      };
      for (const json& tweet : event.at("tweets")) {
        const std::string tid = id_string(tweet.at("id"));
        const int id = static_cast<int>(raw.size());
        tid_to_id.emplace(tid, id);
        RawNode rn;
        rn.id = id;
        rn.text = tweet.value("text", std::string{});
        if (tweet.contains("in_reply_to") && !tweet.at("in_reply_to").is_null()) {
          const std::string parent_tid = id_string(tweet.at("in_reply_to"));
          auto it = tid_to_id.find(parent_tid);
          if (it == tid_to_id.end()) {
            throw DanglingParentError("pheme-style: unknown in_reply_to " + parent_tid);
          }
          rn.parent = it->second;
        }
        raw.push_back(std::move(rn));
      }
      report.records.push_back(
          TreeRecord{build_tree(event_id, label, std::move(raw)), std::nullopt});
    } catch (const std::exception&) {
      ++report.skipped;
    }
  }
  return report;
}

}  // namespace

ParseReport parse_dataset(const std::filesystem::path& path, DatasetFormat format) {
  ParseReport report;
  switch (format) {
    case DatasetFormat::Native:
      report = parse_native(path);
      break;
    case DatasetFormat::WeiboStyle:
      report = parse_weibo_style(path);
      break;
    case DatasetFormat::PhemeStyle:
      report = parse_pheme_style(path);
      break;
  }
  if (report.records.empty()) {
    throw EmptyDataset("parse_dataset: no valid events in " + path.string());
  }
  return report;
}

DatasetSplits split(std::vector<TreeRecord> dataset, const SplitSpec& spec) {
  if (dataset.size() < 5) {
    throw IngestError("split: dataset must have at least 5 items, got " +
                      std::to_string(dataset.size()));
  }
  if (spec.train <= 0 || spec.val <= 0 || spec.test <= 0 ||
      std::abs(spec.train + spec.val + spec.test - 1.0) > 1e-9) {
    throw IngestError("split: ratios must be positive and sum to 1");
  }

  std::vector<std::size_t> class0, class1;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    (dataset[i].tree.label == 0 ? class0 : class1).push_back(i);
  }
  std::mt19937_64 rng(spec.seed);
  std::shuffle(class0.begin(), class0.end(), rng);
  std::shuffle(class1.begin(), class1.end(), rng);

  DatasetSplits splits;
  const auto assign = [&](const std::vector<std::size_t>& members) {
    const auto n = members.size();
    const auto n_val = static_cast<std::size_t>(std::floor(spec.val * static_cast<double>(n)));
    const auto n_test = static_cast<std::size_t>(std::floor(spec.test * static_cast<double>(n)));
    for (std::size_t k = 0; k < n; ++k) {
      TreeRecord& record = dataset[members[k]];
      if (k < n_val) {
        splits.val.push_back(std::move(record));
      } else if (k < n_val + n_test) {
        splits.test.push_back(std::move(record));
      } else {
        splits.train.push_back(std::move(record));
      }
    }
  };
  assign(class0);
  assign(class1);
  return splits;
}

}  // namespace ein
