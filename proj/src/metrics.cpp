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

#include "ein/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace ein {

MetricsSummary compute_metrics(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size()) {
    throw std::invalid_argument("compute_metrics: scores and labels differ in length");
  }
  if (scores.empty()) throw std::invalid_argument("compute_metrics: empty input");

  MetricsSummary summary;
  std::size_t correct = 0;
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const int predicted = scores[i] > 0.5 ? 1 : 0;
    if (predicted == labels[i]) ++correct;
    if (predicted == 1 && labels[i] == 1) ++tp;
    if (predicted == 1 && labels[i] == 0) ++fp;
    if (predicted == 0 && labels[i] == 1) ++fn;
  }
  summary.acc = static_cast<double>(correct) / static_cast<double>(scores.size());

  const double precision_den = static_cast<double>(tp + fp);
  const double recall_den = static_cast<double>(tp + fn);
  const double precision = precision_den > 0 ? static_cast<double>(tp) / precision_den : 0.0;
  const double recall = recall_den > 0 ? static_cast<double>(tp) / recall_den : 0.0;
  summary.f1 = precision + recall > 0 ? 2.0 * precision * recall / (precision + recall) : 0.0;

  // Mann-Whitney pairwise statistic, ties at half credit.
  std::vector<double> positives, negatives;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    (labels[i] == 1 ? positives : negatives).push_back(scores[i]);
  }
  if (!positives.empty() && !negatives.empty()) {
    double credit = 0.0;
    for (double p : positives) {
      for (double n : negatives) {
        if (p > n) {
          credit += 1.0;
        } else if (p == n) {
          credit += 0.5;
        }
      }
    }
    summary.auc = credit / (static_cast<double>(positives.size()) *
                            static_cast<double>(negatives.size()));
  }
  return summary;
}

const char* to_string(MetricsBucket bucket) {
  switch (bucket) {
    case MetricsBucket::All:
      return "all";
    case MetricsBucket::D1:
      return "D1";
    case MetricsBucket::D2to5:
      return "D2to5";
    case MetricsBucket::Dgt5:
      return "Dgt5";
    case MetricsBucket::Degenerate:
      return "degenerate";
  }
  return "?";
}

namespace {

MetricsBucket bucket_of_depth(int d) {
  if (d < 1) return MetricsBucket::Degenerate;
  switch (depth_bucket(d)) {
    case DepthBucket::D1:
      return MetricsBucket::D1;
    case DepthBucket::D2to5:
      return MetricsBucket::D2to5;
    case DepthBucket::Dgt5:
      return MetricsBucket::Dgt5;
  }
  return MetricsBucket::Degenerate;
}

}  // namespace

std::vector<MetricsRow> depth_stratified(std::span<const TreeRecord> records,
                                         const std::vector<double>& scores,
                                         const std::string& run_id, const std::string& split) {
  if (records.size() != scores.size()) {
    throw std::invalid_argument("depth_stratified: records and scores differ in length");
  }
  struct Group {
    std::vector<double> scores;
    std::vector<int> labels;
  };
  Group all;
  std::array<Group, 4> groups;  // D1, D2to5, Dgt5, Degenerate
  for (std::size_t i = 0; i < records.size(); ++i) {
    const int label = records[i].tree.label;
    all.scores.push_back(scores[i]);
    all.labels.push_back(label);
    const MetricsBucket bucket = bucket_of_depth(depth(records[i].tree));
    Group& group = groups[static_cast<std::size_t>(bucket) - 1];
    group.scores.push_back(scores[i]);
    group.labels.push_back(label);
  }

  std::vector<MetricsRow> rows;
  const auto emit = [&](MetricsBucket bucket, const Group& group) {
    MetricsRow row;
    row.run_id = run_id;
    row.split = split;
    row.bucket = bucket;
    row.support = group.scores.size();
    row.proportion = records.empty()
                         ? 0.0
                         : static_cast<double>(group.scores.size()) /
                               static_cast<double>(records.size());
    if (!group.scores.empty()) row.metrics = compute_metrics(group.scores, group.labels);
    rows.push_back(std::move(row));
  };
  emit(MetricsBucket::All, all);
  emit(MetricsBucket::D1, groups[0]);
  emit(MetricsBucket::D2to5, groups[1]);
  emit(MetricsBucket::Dgt5, groups[2]);
  if (!groups[3].scores.empty()) emit(MetricsBucket::Degenerate, groups[3]);
  return rows;
}

std::vector<AggregateRow> aggregate_runs(const std::vector<std::vector<MetricsRow>>& runs) {
  if (runs.size() < 2) throw std::invalid_argument("aggregate_runs: need k >= 2 runs");
  const std::size_t row_count = runs.front().size();
  for (const auto& run : runs) {
    if (run.size() != row_count) throw std::invalid_argument("aggregate_runs: ragged runs");
  }

  const auto stats = [](const std::vector<double>& values) {
    const double k = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= k;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return AggregateValue{mean, std::sqrt(ss / (k - 1.0))};
  };

  std::vector<AggregateRow> rows;
  for (std::size_t r = 0; r < row_count; ++r) {
    AggregateRow row;
    row.split = runs.front()[r].split;
    row.bucket = runs.front()[r].bucket;
    row.runs = runs.size();
    std::vector<double> acc, auc, f1;
    bool auc_present = true;
    for (const auto& run : runs) {
      const MetricsRow& cell = run[r];
      if (cell.bucket != row.bucket || cell.split != row.split) {
        throw std::invalid_argument("aggregate_runs: bucket mismatch across runs");
      }
      acc.push_back(cell.metrics.acc);
      f1.push_back(cell.metrics.f1);
      if (cell.metrics.auc) {
        auc.push_back(*cell.metrics.auc);
      } else {
        auc_present = false;
      }
    }
    row.acc = stats(acc);
    row.f1 = stats(f1);
    if (auc_present) row.auc = stats(auc);
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

void write_provenance(std::ofstream& out, const nlohmann::json* provenance) {
  if (provenance != nullptr) {
    out << "# config " << provenance->dump() << '\n';
  }
}

std::string format_number(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

}  // namespace

void write_metrics_csv(const std::filesystem::path& path, std::span<const MetricsRow> rows,
                       const nlohmann::json* provenance) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("write_metrics_csv: cannot open " + path.string());
  write_provenance(out, provenance);
  out << "run_id,split,bucket,acc,auc,f1,support\n";
  for (const MetricsRow& row : rows) {
    out << row.run_id << ',' << row.split << ',' << to_string(row.bucket) << ','
        << format_number(row.metrics.acc) << ','
        << (row.metrics.auc ? format_number(*row.metrics.auc) : std::string{}) << ','
        << format_number(row.metrics.f1) << ',' << row.support << '\n';
  }
}

void write_aggregate_csv(const std::filesystem::path& path, std::span<const AggregateRow> rows,
                         const nlohmann::json* provenance) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("write_aggregate_csv: cannot open " + path.string());
  write_provenance(out, provenance);
  out << "split,bucket,runs,acc_mean,acc_std,auc_mean,auc_std,f1_mean,f1_std\n";
  for (const AggregateRow& row : rows) {
    out << row.split << ',' << to_string(row.bucket) << ',' << row.runs << ','
        << format_number(row.acc.mean) << ',' << format_number(row.acc.stddev) << ',';
    if (row.auc) {
      out << format_number(row.auc->mean) << ',' << format_number(row.auc->stddev);
    } else {
      out << ',';
    }
    out << ',' << format_number(row.f1.mean) << ',' << format_number(row.f1.stddev) << '\n';
  }
}

StageTable case_study_table(const Model& model, const PropagationTree& tree) {
  if (!model.config.use_encoder) {
    throw std::invalid_argument("case_study_table: model has no encoder");
  }
  const int stages = std::max(depth(tree), 1);
  const EncoderForward forward = encoder_forward(
      model.encoder, static_cast<double>(tree.node_count()), stages, model.config.dynamics);
  return StageTable{tree.event_id, forward.phat};
}

void write_stage_table_csv(const std::filesystem::path& path, const StageTable& table) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("write_stage_table_csv: cannot open " + path.string());
  out << "event_id,stage,p_unknown,p_support,p_denial\n";
  for (std::size_t t = 0; t < table.rows.size(); ++t) {
    const Vector3& row = table.rows[t];
    out << table.event_id << ',' << t + 1 << ',' << format_number(row[0]) << ','
        << format_number(row[1]) << ',' << format_number(row[2]) << '\n';
  }
}

void write_stacked_area_svg(const std::filesystem::path& path, const StageTable& table) {
  const int width = 640, height = 400;
  const int margin = 48;
  const double plot_w = width - 2.0 * margin;
  const double plot_h = height - 2.0 * margin;
  const std::size_t stages = table.rows.size();

  const auto x_of = [&](std::size_t t) {
    return stages == 1 ? margin + plot_w / 2.0
                       : margin + plot_w * static_cast<double>(t) /
                                      static_cast<double>(stages - 1);
  };
  const auto y_of = [&](double fraction) { return margin + plot_h * (1.0 - fraction); };

  // Bands stacked bottom-up: support, denial, unknown.
  const auto cumulative = [&](std::size_t t, int level) {
    const Vector3& row = table.rows[t];
    switch (level) {
      case 0:
        return 0.0;
      case 1:
        return row[1];
      case 2:
        return row[1] + row[2];
      default:
        return 1.0;
    }
  };
  const auto band = [&](int level, const char* color) {
    std::ostringstream polygon;
    polygon << "<polygon fill=\"" << color << "\" fill-opacity=\"0.8\" points=\"";
    for (std::size_t t = 0; t < stages; ++t) {
      polygon << x_of(t) << ',' << y_of(cumulative(t, level - 1)) << ' ';
    }
    for (std::size_t t = stages; t-- > 0;) {
      polygon << x_of(t) << ',' << y_of(cumulative(t, level)) << ' ';
    }
    polygon << "\"/>";
    return polygon.str();
  };

  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("write_stacked_area_svg: cannot open " + path.string());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << band(1, "#4c9f70") << '\n';  // support
  out << band(2, "#c94f4f") << '\n';  // denial
  out << band(3, "#b9c2cc") << '\n';  // unknown
  out << "<rect x=\"" << margin << "\" y=\"" << margin << "\" width=\"" << plot_w
      << "\" height=\"" << plot_h << "\" fill=\"none\" stroke=\"black\"/>\n";
  out << "<text x=\"" << margin << "\" y=\"" << margin - 12 << "\" font-size=\"14\">event "
      << table.event_id << " state distribution by stage</text>\n";
  out << "<text x=\"" << margin << "\" y=\"" << height - 12
      << "\" font-size=\"12\">stage 1.." << stages
      << "; green support, red denial, grey unknown</text>\n";
  out << "</svg>\n";
}

}  // namespace ein
