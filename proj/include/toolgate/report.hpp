#pragma once

#include "toolgate/json.hpp"
#include "toolgate/metrics.hpp"
#include "toolgate/stats.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace toolgate {

inline constexpr int kBootstrapReplicates = 10000;
inline constexpr double kConfidenceLevel = 0.95;

// One aggregated column: mean over runs with a defined value.
struct MetricSummary {
  std::string metric;
  int n = 0;
  std::optional<double> mean;
  std::optional<Interval> ci;
};

struct PackRow {
  std::string pack;
  int runs = 0;
  std::vector<MetricSummary> metrics;

  const MetricSummary* find(const std::string& metric) const;
};

struct ComparisonRow {
  std::string pack_a;
  std::string pack_b;
  std::string metric;
  int pairs = 0;
  SignTest test;
  std::optional<double> mean_difference;  // b - a over defined pairs
};

struct Report {
  std::vector<PackRow> table1;
  std::vector<ComparisonRow> table2;

  const PackRow* pack(const std::string& name) const;
  const ComparisonRow* comparison(const std::string& a, const std::string& b, const std::string& metric) const;
};

struct MetricColumn {
  std::string name;
  std::function<std::optional<double>(const RunResult&)> get;
  bool faulted_only = false;  // restrict to mild and harsh profiles
};

const std::vector<MetricColumn>& table1_columns();
const std::vector<std::string>& table2_metrics();

// Aggregates runs grouped by pack in P0..P4 order (other names follow,
// sorted). Sign tests pair runs on (suite, fault profile, seed).
Report build_report(const std::vector<RunResult>& runs);

std::string table1_csv(const Report& report);
std::string table2_csv(const Report& report);
Json report_to_json(const Report& report);

// Loads results.jsonl from a matrix output directory, falling back to
// runs/*/result.json.
std::vector<RunResult> load_results(const std::filesystem::path& runs_dir);

}  // namespace toolgate
