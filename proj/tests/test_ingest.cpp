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

#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "ein/ingest.hpp"

using namespace ein;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / ("ein_ingest_" + std::to_string(::getpid()))) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_file(const fs::path& file, const std::string& contents) {
  fs::create_directories(file.parent_path());
  std::ofstream out(file);
  out << contents;
}

}  // namespace

TEST_CASE("tokenize lowercases, strips punctuation, splits CJK per character") {
  CHECK(tokenize("Hello, WORLD!") == std::vector<std::string>{"hello", "world"});
  CHECK(tokenize("a  a\tb") == std::vector<std::string>{"a", "a", "b"});
  CHECK(tokenize("这是谣言") ==
        std::vector<std::string>{"这", "是", "谣", "言"});
  CHECK(tokenize("rt 谣言!") == std::vector<std::string>{"rt", "谣", "言"});
  CHECK(tokenize("").empty());
  CHECK(tokenize("!!! ...").empty());
}

TEST_CASE("hashing featurizer produces L2-normalized count buckets") {
  const Featurizer f = Featurizer::hashing(200);

  const Vector empty = f.embed_text("");
  CHECK(empty.size() == 200);
  CHECK(empty.norm() == 0.0);

  const Vector row = f.embed_text("a a b");
  int nonzero = 0;
  for (Eigen::Index i = 0; i < row.size(); ++i) {
    if (row[i] != 0.0) ++nonzero;
  }
  CHECK(nonzero <= 2);
  CHECK(row.norm() == doctest::Approx(1.0));
  // "a" and "b" land in distinct buckets at h = 200, giving counts (2, 1).
  CHECK(row.maxCoeff() == doctest::Approx(2.0 / std::sqrt(5.0)));

  CHECK(f.embed_text("same text") == f.embed_text("same text"));
}

TEST_CASE("hashing featurizer rows never exceed unit norm") {
  const Featurizer f = Featurizer::hashing(64);
  std::mt19937_64 rng(2);
  const std::vector<std::string> pool = {"a", "bb", "ccc", "谣", "hello", "x y z"};
  for (int round = 0; round < 100; ++round) {
    std::string text;
    for (int k = 0; k < static_cast<int>(rng() % 12); ++k) {
      text += pool[rng() % pool.size()] + " ";
    }
    CHECK(f.embed_text(text).norm() <= 1.0 + 1e-12);
  }
}

TEST_CASE("embedding-table featurizer averages known tokens") {
  TempDir dir;
  write_file(dir.path / "table.tsv", "hello\t1 0\nworld\t0 1\n");
  const Featurizer f = Featurizer::embedding_table(dir.path / "table.tsv");
  CHECK(f.dim == 2);

  const Vector both = f.embed_text("hello world");
  CHECK(both[0] == doctest::Approx(0.5));
  CHECK(both[1] == doctest::Approx(0.5));

  const Vector partial = f.embed_text("hello unseen");
  CHECK(partial[0] == doctest::Approx(1.0));

  CHECK(f.embed_text("all unknown tokens").norm() == 0.0);

  write_file(dir.path / "ragged.tsv", "a\t1 2\nb\t1\n");
  CHECK_THROWS_AS(Featurizer::embedding_table(dir.path / "ragged.tsv"), IngestError);
}

TEST_CASE("featurize attaches features and keeps topology and label") {
  auto tree = build_tree("e", 1,
                         {{0, std::nullopt, "source text", {}},
                          {1, 0, "reply", {}},
                          {2, 0, "reply", {}}});
  const auto before_parents = tree.nodes;
  const PropagationTree out = featurize(std::move(tree), Featurizer::hashing(32));
  REQUIRE(out.features.has_value());
  CHECK(out.features->rows() == 3);
  CHECK(out.features->cols() == 32);
  CHECK(out.label == 1);
  for (std::size_t v = 0; v < before_parents.size(); ++v) {
    CHECK(out.nodes[v].parent == before_parents[v].parent);
  }
  // Identical texts embed identically.
  CHECK((out.features->row(1) - out.features->row(2)).norm() == 0.0);
}

TEST_CASE("native parser keeps good events and counts bad ones") {
  TempDir dir;
  const fs::path file = dir.path / "data.ndtree";
  write_file(file,
             R"({"id":"a","label":0,"nodes":[{"id":0,"parent":null,"text":"x"}]})"
             "\n"
             R"({"id":"b","label":1,"nodes":[{"id":0,"parent":null,"text":"x"},{"id":1,"parent":0,"text":"y"}]})"
             "\n");
  const ParseReport two = parse_dataset(file, DatasetFormat::Native);
  CHECK(two.records.size() == 2);
  CHECK(two.skipped == 0);

  write_file(file,
             R"({"id":"good","label":0,"nodes":[{"id":0,"parent":null,"text":"x"}]})"
             "\n"
             R"({"id":"cyclic","label":0,"nodes":[{"id":0,"parent":null,"text":"x"},{"id":1,"parent":2,"text":"y"},{"id":2,"parent":1,"text":"z"}]})"
             "\n");
  const ParseReport one = parse_dataset(file, DatasetFormat::Native);
  CHECK(one.records.size() == 1);
  CHECK(one.skipped == 1);

  write_file(file, "not json\n");
  CHECK_THROWS_AS(parse_dataset(file, DatasetFormat::Native), EmptyDataset);
}

TEST_CASE("weibo-style adapter reads the index plus per-event post arrays") {
  TempDir dir;
  write_file(dir.path / "Weibo.txt", "eid:42 label:1\neid:43 label:0\neid:44\n");
  write_file(dir.path / "post" / "42.json",
             R"([{"mid":"m0","parent":null,"text":"src"},
                 {"mid":"m1","parent":"m0","text":"re1"},
                 {"mid":"m2","parent":"m1","text":"re2"}])");
  write_file(dir.path / "post" / "43.json", R"([{"mid":"m0","parent":null,"text":"only"}])");
  const ParseReport report = parse_dataset(dir.path, DatasetFormat::WeiboStyle);
  REQUIRE(report.records.size() == 2);
  CHECK(report.skipped == 1);  // the line without a label
  CHECK(report.records[0].tree.event_id == "42");
  CHECK(report.records[0].tree.label == 1);
  CHECK(depth(report.records[0].tree) == 2);
  CHECK(report.records[1].tree.node_count() == 1);
}

TEST_CASE("pheme-style adapter reads line-delimited events") {
  TempDir dir;
  const fs::path file = dir.path / "pheme.ndjson";
  write_file(
      file,
      R"({"event_id":"ev1","is_rumour":true,"tweets":[{"id":"1","in_reply_to":null,"text":"s"},{"id":"2","in_reply_to":"1","text":"r"}]})"
      "\n"
      R"({"event_id":"ev2","is_rumour":"non-rumour","tweets":[{"id":9,"in_reply_to":null,"text":"s"}]})"
      "\n");
  const ParseReport report = parse_dataset(file, DatasetFormat::PhemeStyle);
  REQUIRE(report.records.size() == 2);
  CHECK(report.records[0].tree.label == 1);
  CHECK(report.records[0].tree.node_count() == 2);
  CHECK(report.records[1].tree.label == 0);
}

TEST_CASE("dataset_format_from_string rejects unknown names") {
  CHECK(dataset_format_from_string("native") == DatasetFormat::Native);
  CHECK_THROWS_AS(dataset_format_from_string("csv"), UnknownFormat);
}

namespace {

std::vector<TreeRecord> tiny_dataset(int class0, int class1) {
  std::vector<TreeRecord> records;
  for (int i = 0; i < class0 + class1; ++i) {
    TreeRecord record;
    record.tree = build_tree("t" + std::to_string(i), i < class0 ? 0 : 1,
                             {{0, std::nullopt, "x", {}}});
    records.push_back(std::move(record));
  }
  return records;
}

}  // namespace

TEST_CASE("split is stratified with the remainder assigned to train") {
  const DatasetSplits splits = split(tiny_dataset(5, 5), SplitSpec{0.6, 0.2, 0.2, 7});
  CHECK(splits.train.size() == 6);
  CHECK(splits.val.size() == 2);
  CHECK(splits.test.size() == 2);
  const auto count_label = [](const std::vector<TreeRecord>& records, int label) {
    return std::count_if(records.begin(), records.end(),
                         [&](const TreeRecord& r) { return r.tree.label == label; });
  };
  CHECK(std::abs(count_label(splits.val, 0) - count_label(splits.val, 1)) <= 1);
  CHECK(std::abs(count_label(splits.test, 0) - count_label(splits.test, 1)) <= 1);
  CHECK(std::abs(count_label(splits.train, 0) - count_label(splits.train, 1)) <= 1);
}

TEST_CASE("split is deterministic and partitions the dataset") {
  const auto ids_of = [](const std::vector<TreeRecord>& records) {
    std::vector<std::string> ids;
    for (const auto& r : records) ids.push_back(r.tree.event_id);
    return ids;
  };
  const DatasetSplits a = split(tiny_dataset(13, 9), SplitSpec{0.6, 0.2, 0.2, 5});
  const DatasetSplits b = split(tiny_dataset(13, 9), SplitSpec{0.6, 0.2, 0.2, 5});
  CHECK(ids_of(a.train) == ids_of(b.train));
  CHECK(ids_of(a.val) == ids_of(b.val));
  CHECK(ids_of(a.test) == ids_of(b.test));

  std::set<std::string> all;
  for (const auto* part : {&a.train, &a.val, &a.test}) {
    for (const auto& record : *part) CHECK(all.insert(record.tree.event_id).second);
  }
  CHECK(all.size() == 22);
}

TEST_CASE("split reproduces the benchmark-scale floor arithmetic") {
  const DatasetSplits splits = split(tiny_dataset(3185, 2852), SplitSpec{0.6, 0.2, 0.2, 7});
  CHECK(splits.train.size() == 3623);
  CHECK(splits.val.size() == 1207);
  CHECK(splits.test.size() == 1207);
}

TEST_CASE("split rejects undersized or malformed requests") {
  CHECK_THROWS_AS(split(tiny_dataset(2, 2), SplitSpec{}), IngestError);
  CHECK_THROWS_AS(split(tiny_dataset(5, 5), SplitSpec{0.5, 0.2, 0.2, 1}), IngestError);
}
