#include "toolgate/report.hpp"

#include "toolgate/rng.hpp"
#include "toolgate/trace_io.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <tuple>

namespace toolgate {

namespace {

bool faulted(const RunResult& r) { return r.key.fault_profile == "mild" || r.key.fault_profile == "harsh"; }

int pack_rank(const std::string& pack) {
  static const char* order[] = {"P0", "P1", "P2", "P3", "P4"};
  for (int i = 0; i < 5; ++i) {
    if (pack == order[i]) return i;
  }
  return 5;
}

std::string fmt(std::optional<double> v) {
  if (!v) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", *v);
  return buf;
}

// p-values span many orders of magnitude; fixed decimals would flatten them.
std::string fmt_p(std::optional<double> v) {
  if (!v) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", *v);
  return buf;
}

Json opt_json(std::optional<double> v) { return v ? Json(*v) : Json(nullptr); }

const MetricColumn& column(const std::string& name) {
  for (const auto& c : table1_columns()) {
    if (c.name == name) return c;
  }
  throw std::invalid_argument("unknown metric " + name);
}

}  // namespace

const std::vector<MetricColumn>& table1_columns() {
  static const std::vector<MetricColumn> cols = {
      {"vpr", [](const RunResult& r) { return r.vpr; }},
      {"fbr", [](const RunResult& r) { return r.fbr; }},
      {"task_success", [](const RunResult& r) { return std::optional<double>(r.task_success); }},
      {"retry_amplification", [](const RunResult& r) { return r.retry_amplification; }},
      {"retry_amplification_faulted", [](const RunResult& r) { return r.retry_amplification; }, true},
      {"retry_amplification_admitted", [](const RunResult& r) { return r.retry_amplification_admitted; }},
      {"approvals_per_task", [](const RunResult& r) { return std::optional<double>(r.approvals_per_task); }},
      {"leakage_recall", [](const RunResult& r) { return r.leakage_recall; }},
      {"leakage_precision", [](const RunResult& r) { return r.leakage_precision; }},
      {"latency_p95_ms", [](const RunResult& r) { return std::optional<double>(r.latency_p95_ms); }},
      {"latency_p99_ms", [](const RunResult& r) { return std::optional<double>(r.latency_p99_ms); }},
      {"time_to_success_ms", [](const RunResult& r) { return r.time_to_success_ms; }},
      {"fix_hint_valid_retry_rate", [](const RunResult& r) { return r.fix_hint_valid_retry_rate; }},
      {"median_overhead_ms", [](const RunResult& r) { return std::optional<double>(r.median_overhead_ms); }},
      {"log_volume_bytes",
       [](const RunResult& r) { return std::optional<double>(static_cast<double>(r.log_volume_bytes)); }},
  };
  return cols;
}

const std::vector<std::string>& table2_metrics() {
  static const std::vector<std::string> m = {"vpr", "fbr", "task_success", "retry_amplification",
                                             "leakage_recall"};
  return m;
}

const MetricSummary* PackRow::find(const std::string& metric) const {
  for (const auto& m : metrics) {
    if (m.metric == metric) return &m;
  }
  return nullptr;
}

const PackRow* Report::pack(const std::string& name) const {
  for (const auto& r : table1) {
    if (r.pack == name) return &r;
  }
  return nullptr;
}

const ComparisonRow* Report::comparison(const std::string& a, const std::string& b, const std::string& metric) const {
  for (const auto& r : table2) {
    if (r.pack_a == a && r.pack_b == b && r.metric == metric) return &r;
  }
  return nullptr;
}

Report build_report(const std::vector<RunResult>& runs) {
  std::map<std::string, std::vector<const RunResult*>> by_pack;
  for (const auto& r : runs) by_pack[r.key.pack].push_back(&r);
  std::vector<std::string> packs;
  for (const auto& [p, _] : by_pack) packs.push_back(p);
  std::stable_sort(packs.begin(), packs.end(),
                   [](const std::string& a, const std::string& b) { return pack_rank(a) < pack_rank(b); });

  Report report;
  for (const auto& pack : packs) {
    PackRow row;
    row.pack = pack;
    row.runs = static_cast<int>(by_pack[pack].size());
    for (const auto& col : table1_columns()) {
      std::vector<double> xs;
      for (const RunResult* r : by_pack[pack]) {
        if (col.faulted_only && !faulted(*r)) continue;
        if (auto v = col.get(*r)) xs.push_back(*v);
      }
      MetricSummary s;
      s.metric = col.name;
      s.n = static_cast<int>(xs.size());
      if (!xs.empty()) {
        s.mean = mean(xs);
        const std::uint64_t seed = StreamKey(0).add(std::string_view(pack)).add(std::string_view(col.name)).value();
        s.ci = bootstrap_ci(xs, kBootstrapReplicates, seed, kConfidenceLevel);
      }
      row.metrics.push_back(std::move(s));
    }
    report.table1.push_back(std::move(row));
  }

  using Cell = std::tuple<std::string, std::string, std::uint64_t>;
  for (std::size_t i = 0; i + 1 < packs.size(); ++i) {
    std::map<Cell, const RunResult*> a_cells;
    std::map<Cell, const RunResult*> b_cells;
    for (const RunResult* r : by_pack[packs[i]]) a_cells[{r->key.suite, r->key.fault_profile, r->key.seed}] = r;
    for (const RunResult* r : by_pack[packs[i + 1]]) b_cells[{r->key.suite, r->key.fault_profile, r->key.seed}] = r;
    for (const auto& metric : table2_metrics()) {
      const MetricColumn& col = column(metric);
      std::vector<std::pair<double, double>> pairs;
      for (const auto& [cell, a] : a_cells) {
        const auto it = b_cells.find(cell);
        if (it == b_cells.end()) continue;
        const auto va = col.get(*a);
        const auto vb = col.get(*it->second);
        if (va && vb) pairs.emplace_back(*va, *vb);
      }
      ComparisonRow row;
      row.pack_a = packs[i];
      row.pack_b = packs[i + 1];
      row.metric = metric;
      row.pairs = static_cast<int>(pairs.size());
      row.test = paired_sign_test(pairs);
      if (!pairs.empty()) {
        std::vector<double> d;
        for (const auto& [a, b] : pairs) d.push_back(b - a);
        row.mean_difference = mean(d);
      }
      report.table2.push_back(std::move(row));
    }
  }
  return report;
}

std::string table1_csv(const Report& report) {
  std::string out = "pack,runs";
  for (const auto& col : table1_columns()) out += "," + col.name + "," + col.name + "_lo," + col.name + "_hi";
  out += "\n";
  for (const auto& row : report.table1) {
    out += row.pack + "," + std::to_string(row.runs);
    for (const auto& m : row.metrics) {
      out += "," + fmt(m.mean) + "," + fmt(m.ci ? std::optional<double>(m.ci->lo) : std::nullopt) + "," +
             fmt(m.ci ? std::optional<double>(m.ci->hi) : std::nullopt);
    }
    out += "\n";
  }
  return out;
}

std::string table2_csv(const Report& report) {
  std::string out = "comparison,metric,pairs,positive,negative,ties,mean_difference,p_value\n";
  for (const auto& r : report.table2) {
    out += r.pack_a + " vs " + r.pack_b + "," + r.metric + "," + std::to_string(r.pairs) + "," +
           std::to_string(r.test.positive) + "," + std::to_string(r.test.negative) + "," +
           std::to_string(r.test.ties) + "," + fmt(r.mean_difference) + "," + fmt_p(r.test.p_value) + "\n";
  }
  return out;
}

Json report_to_json(const Report& report) {
  Json t1 = Json::array();
  for (const auto& row : report.table1) {
    Json metrics = Json::object();
    for (const auto& m : row.metrics) {
      Json ci = m.ci ? Json::array({m.ci->lo, m.ci->hi}) : Json(nullptr);
      metrics[m.metric] = Json{{"n", m.n}, {"mean", opt_json(m.mean)}, {"ci", std::move(ci)}};
    }
    t1.push_back(Json{{"pack", row.pack}, {"runs", row.runs}, {"metrics", std::move(metrics)}});
  }
  Json t2 = Json::array();
  for (const auto& r : report.table2) {
    t2.push_back(Json{{"pack_a", r.pack_a},
                      {"pack_b", r.pack_b},
                      {"metric", r.metric},
                      {"pairs", r.pairs},
                      {"positive", r.test.positive},
                      {"negative", r.test.negative},
                      {"ties", r.test.ties},
                      {"mean_difference", opt_json(r.mean_difference)},
                      {"p_value", opt_json(r.test.p_value)}});
  }
  return Json{{"bootstrap", Json{{"replicates", kBootstrapReplicates}, {"level", kConfidenceLevel}}},
              {"table1", std::move(t1)},
              {"table2", std::move(t2)}};
}

std::vector<RunResult> load_results(const std::filesystem::path& runs_dir) {
  std::vector<RunResult> out;
  const auto results = runs_dir / "results.jsonl";
  if (std::filesystem::exists(results)) {
    for (const auto& j : parse_jsonl(read_file(results))) out.push_back(run_result_from_json(j));
    return out;
  }
  const auto dir = std::filesystem::exists(runs_dir / "runs") ? runs_dir / "runs" : runs_dir;
  std::set<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const auto f = entry.path() / "result.json";
    if (entry.is_directory() && std::filesystem::exists(f)) files.insert(f);
  }
  for (const auto& f : files) out.push_back(run_result_from_json(Json::parse(read_file(f))));
  if (out.empty()) throw std::runtime_error("no run results under " + runs_dir.string());
  return out;
}

}  // namespace toolgate
