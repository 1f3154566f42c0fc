#include <catch_amalgamated.hpp>

#include "log_rescan.hpp"
#include "toolgate/report.hpp"
#include "toolgate/runner.hpp"

#include <filesystem>

using namespace toolgate;
namespace fs = std::filesystem;

namespace {

MatrixConfig small_matrix() {
  MatrixConfig c;
  c.packs = {PackLevel::P1, PackLevel::P3, PackLevel::P4};
  c.fault_profiles = {"none", "harsh"};
  c.seeds = {1, 2};
  c.suites = {Suite::A, Suite::D};
  c.gen = GenOptions{4, 20};
  return c;
}

fs::path scratch(const char* name) {
  const fs::path p = fs::temp_directory_path() / name;
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("suites are deterministic in the seed", "[suites]") {
  for (Suite s : kAllSuites) {
    INFO(to_string(s));
    const SuiteCorpus a = generate_suite(s, 5, GenOptions{3, 25});
    CHECK(a.trace == generate_suite(s, 5, GenOptions{3, 25}).trace);
    CHECK(a.trace != generate_suite(s, 6, GenOptions{3, 25}).trace);
    CHECK(split_traces(a.trace).size() == 3);
    CHECK(a.trace.size() == 75);
  }
}

TEST_CASE("empty suites are valid", "[suites]") {
  CHECK(generate_suite(Suite::B, 1, GenOptions{0, 30}).trace.empty());
  CHECK(generate_suite(Suite::B, 1, GenOptions{2, 0}).trace.empty());
}

TEST_CASE("matrix config parsing", "[runner]") {
  const MatrixConfig d = parse_matrix_config(default_matrix_config_yaml());
  CHECK(d.cell_count() == 225);
  CHECK(d.gen.traces == 15);
  CHECK(d.gen.steps == 30);
  CHECK(d.approver.mode == ApproverMode::Probabilistic);

  const MatrixConfig f = parse_matrix_config(read_file(fs::path(TOOLGATE_SOURCE_DIR) / "data" / "matrix.yaml"),
                                             fs::path(TOOLGATE_SOURCE_DIR) / "data");
  CHECK(f.cell_count() == 225);
  CHECK(f.misuse_yaml == default_misuse_config_yaml());

  CHECK_THROWS_AS(parse_matrix_config("matrix:\n  packs: [P9]\n"), ConfigError);
  CHECK_THROWS_AS(parse_matrix_config("matrix:\n  suites: [Z]\n"), ConfigError);
  CHECK_THROWS_AS(parse_matrix_config("matrix:\n  fault_profiles: [stormy]\n"), ConfigError);
  CHECK_THROWS_AS(parse_matrix_config("matrix:\n  colour: blue\n"), ConfigError);
  CHECK_THROWS_AS(parse_matrix_config("matrix:\n  approver: {mode: probabilistic, p: 2}\n"), ConfigError);
  CHECK_THROWS_AS(parse_matrix_config("matrix:\n  misuse_config: /nonexistent/misuse.yaml\n"), ConfigError);
  CHECK_THROWS_AS(parse_matrix_config("[1, 2]\n"), ConfigError);
}

TEST_CASE("run metrics agree with a rescan of the logs", "[runner][metrics]") {
  const MatrixConfig cfg = small_matrix();
  for (Suite s : cfg.suites) {
    const SuiteCorpus corpus = generate_suite(s, 2, cfg.gen);
    for (PackLevel p : cfg.packs) {
      const CellOutput out = run_cell(CellSpec{s, p, "harsh", 2}, corpus, cfg);
      const auto rs = test_support::rescan_run(out.trace, out.decisions, out.mutations, corpus.env);
      INFO(out.result.key.id());
      CHECK(out.result.unsafe_injected == rs.unsafe_injected);
      CHECK(out.result.unsafe_blocked == rs.unsafe_blocked);
      CHECK(out.result.benign_blocked == rs.benign_blocked);
      CHECK(out.result.executed == rs.executed);
      CHECK(out.result.successful_traces == rs.successful_traces);
      CHECK(out.result.leakage.planted_detected == rs.planted_detected);
      CHECK(out.result.leakage.detections == rs.detections);
    }
  }
}

TEST_CASE("matrix runs are reproducible and reportable", "[runner][report]") {
  const MatrixConfig cfg = small_matrix();
  const fs::path a = scratch("toolgate_runner_a");
  const fs::path b = scratch("toolgate_runner_b");
  const MatrixRun ra = run_matrix(cfg, a);
  const MatrixRun rb = run_matrix(cfg, b);
  CHECK(ra.results.size() == cfg.cell_count());
  CHECK(ra.manifest_digests == rb.manifest_digests);
  CHECK(read_file(a / "results.jsonl") == read_file(b / "results.jsonl"));
  CHECK(read_file(a / "table1.csv") == read_file(b / "table1.csv"));

  const Json manifest = Json::parse(read_file(a / "runs" / ra.results.front().key.id() / "manifest.json"));
  CHECK(manifest["status"] == "complete");
  CHECK(manifest.contains("inputs"));
  CHECK(manifest.contains("outputs"));

  // The stored tables are reproducible from the stored results.
  const auto loaded = load_results(a);
  REQUIRE(loaded.size() == ra.results.size());
  const Report rep = build_report(loaded);
  CHECK(table1_csv(rep) == read_file(a / "table1.csv"));
  CHECK(table2_csv(rep) == read_file(a / "table2.csv"));
  CHECK(rep.table1.size() == 3);
  const PackRow* p3 = rep.pack("P3");
  REQUIRE(p3);
  CHECK(p3->runs == 8);
  const MetricSummary* vpr = p3->find("vpr");
  REQUIRE(vpr);
  REQUIRE(vpr->ci);
  CHECK(vpr->ci->lo <= *vpr->mean);
  CHECK(*vpr->mean <= vpr->ci->hi);
  CHECK(rep.comparison("P3", "P4", "vpr"));
  CHECK(rep.comparison("P1", "P3", "vpr")->pairs == 8);
  CHECK(table2_csv(rep).rfind("comparison,", 0) == 0);

  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("permissive packs block nothing", "[runner][property]") {
  MatrixConfig cfg = small_matrix();
  cfg.packs = {PackLevel::P0, PackLevel::P2};
  for (Suite s : kAllSuites) {
    const SuiteCorpus corpus = generate_suite(s, 3, cfg.gen);
    for (PackLevel p : cfg.packs) {
      const CellOutput out = run_cell(CellSpec{s, p, "mild", 3}, corpus, cfg);
      INFO(out.result.key.id());
      CHECK(out.result.unsafe_blocked == 0);
      CHECK(out.result.benign_blocked == 0);
    }
  }
}
