#pragma once

#include "toolgate/environment.hpp"
#include "toolgate/trace_io.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace toolgate {

enum class Suite { A, B, C, D, E };
inline constexpr Suite kAllSuites[] = {Suite::A, Suite::B, Suite::C, Suite::D, Suite::E};

std::string_view to_string(Suite suite);
std::optional<Suite> parse_suite(std::string_view text);

struct GenOptions {
  int traces = 15;
  int steps = 30;  // per trace
};

// A generated corpus: concatenated traces plus the world every trace starts
// from.
struct SuiteCorpus {
  std::vector<TraceRecord> trace;
  SimulatedEnvironment env;
};

inline constexpr const char* kWorkspaceRoot = "repo";

SimulatedEnvironment initial_environment();

SuiteCorpus generate_suite(Suite suite, std::uint64_t seed, const GenOptions& options = {});

// <dir>/trace.jsonl, <dir>/env.json and <dir>/blobs/<id>.
void write_corpus(const SuiteCorpus& corpus, const std::filesystem::path& dir);
SuiteCorpus read_corpus(const std::filesystem::path& dir);

// Steps grouped by trace_id, in first-appearance order.
std::vector<std::vector<TraceRecord>> split_traces(const std::vector<TraceRecord>& trace);

}  // namespace toolgate
