#pragma once

#include "toolgate/approver.hpp"
#include "toolgate/config_error.hpp"
#include "toolgate/faults.hpp"
#include "toolgate/metrics.hpp"
#include "toolgate/misuse.hpp"
#include "toolgate/policy.hpp"
#include "toolgate/suites.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace toolgate {

inline constexpr const char* kToolVersion = "toolgate 0.1.0";

struct ApproverConfig {
  ApproverMode mode = ApproverMode::Probabilistic;
  double p = 0.5;
  std::int64_t delay_ms = 500;
};

struct MatrixConfig {
  std::vector<PackLevel> packs{PackLevel::P0, PackLevel::P1, PackLevel::P2, PackLevel::P3, PackLevel::P4};
  std::vector<std::string> fault_profiles{"none", "mild", "harsh"};
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::vector<Suite> suites{Suite::A, Suite::B, Suite::C, Suite::D, Suite::E};
  GenOptions gen;
  ApproverConfig approver;
  std::string misuse_yaml = default_misuse_config_yaml();
  std::string fault_yaml = default_fault_config_yaml();
  bool measure_overhead = false;

  std::size_t cell_count() const { return packs.size() * fault_profiles.size() * seeds.size() * suites.size(); }
};

// `matrix:` document. Config file references resolve against `base_dir`.
// Throws ConfigError.
MatrixConfig parse_matrix_config(std::string_view yaml_text, const std::filesystem::path& base_dir = ".");
std::string default_matrix_config_yaml();

struct CellSpec {
  Suite suite = Suite::A;
  PackLevel pack = PackLevel::P0;
  std::string fault_profile = "none";
  std::uint64_t seed = 1;

  RunKey key() const;
};

struct CellOutput {
  RunResult result;
  std::string trace;      // mutated trace, canonical JSONL
  std::string decisions;  // decision log
  std::string faults;
  std::string mutations;
  Json manifest;
};

// Fault and approver streams for a cell are derived from the run seed.
std::uint64_t fault_seed(std::uint64_t config_seed, std::uint64_t run_seed);
Approver make_approver(const ApproverConfig& config, std::uint64_t run_seed);

CellOutput run_cell(const CellSpec& cell, const SuiteCorpus& corpus, const MatrixConfig& config);

// Files: trace.jsonl, decisions.jsonl, faults.jsonl, mutations.jsonl,
// result.json, manifest.json.
void write_cell(const CellOutput& output, const std::filesystem::path& dir);

// Digest over the canonical manifest bytes.
std::string manifest_digest(const Json& manifest);

std::vector<CellSpec> matrix_cells(const MatrixConfig& config);

struct MatrixRun {
  std::vector<RunResult> results;
  std::vector<std::string> manifest_digests;  // aligned with results
};

// Runs every cell, writing <out>/runs/<id>/..., <out>/corpora/<suite>_s<seed>/,
// <out>/results.jsonl and the aggregate tables.
MatrixRun run_matrix(const MatrixConfig& config, const std::filesystem::path& out_dir,
                     const std::function<void(const CellSpec&, std::size_t, std::size_t)>& progress = {});

}  // namespace toolgate
