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

#include "ein/io.hpp"
#include "ein/model.hpp"

namespace ein {

struct MetricsSummary {
  double acc = 0.0;
  std::optional<double> auc;  // absent when a class is missing
  double f1 = 0.0;
};

/// Accuracy at the 0.5 threshold, rank-based ROC-AUC with ties counted 0.5,
/// and F1 of the positive (rumor) class. Scores are rumor-class
/// probabilities.
MetricsSummary compute_metrics(const std::vector<double>& scores, const std::vector<int>& labels);

enum class MetricsBucket { All, D1, D2to5, Dgt5, Degenerate };

const char* to_string(MetricsBucket bucket);

struct MetricsRow {
  std::string run_id;
  std::string split;
  MetricsBucket bucket = MetricsBucket::All;
  MetricsSummary metrics;
  std::size_t support = 0;
  double proportion = 0.0;  // share of the split
};

/// One row per depth bucket plus the undivided "all" row. Depth-0 trees get
/// their own degenerate stratum; the paper's buckets start at depth 1.
std::vector<MetricsRow> depth_stratified(std::span<const TreeRecord> records,
                                         const std::vector<double>& scores,
                                         const std::string& run_id, const std::string& split);

struct AggregateValue {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation (k-1)
};

struct AggregateRow {
  std::string split;
  MetricsBucket bucket = MetricsBucket::All;
  std::size_t runs = 0;
  AggregateValue acc;
  std::optional<AggregateValue> auc;
  AggregateValue f1;
};

/// Mean and sample standard deviation across k >= 2 aligned runs.
std::vector<AggregateRow> aggregate_runs(const std::vector<std::vector<MetricsRow>>& runs);

/// CSV with header run_id,split,bucket,acc,auc,f1,support. Provenance
/// (config and version) goes into leading # comment lines.
void write_metrics_csv(const std::filesystem::path& path, std::span<const MetricsRow> rows,
                       const nlohmann::json* provenance = nullptr);

void write_aggregate_csv(const std::filesystem::path& path, std::span<const AggregateRow> rows,
                         const nlohmann::json* provenance = nullptr);

/// Per-stage predicted state distributions of one tree under a trained
/// model.
struct StageTable {
  std::string event_id;
  std::vector<Vector3> rows;  // t = 1..T: (p_u, p_s, p_d)
};

StageTable case_study_table(const Model& model, const PropagationTree& tree);

void write_stage_table_csv(const std::filesystem::path& path, const StageTable& table);

/// Stacked-area rendering of the stage table as a standalone SVG file.
void write_stacked_area_svg(const std::filesystem::path& path, const StageTable& table);

}  // namespace ein
