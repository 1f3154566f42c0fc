#pragma once

#include "toolgate/decision.hpp"
#include "toolgate/environment.hpp"
#include "toolgate/json.hpp"
#include "toolgate/tool_call.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace toolgate {

class TraceError : public std::runtime_error {
 public:
  TraceError(const std::string& message, int line)
      : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

struct TraceRecord {
  std::string trace_id;
  std::int64_t step_id = 0;
  std::optional<std::string> ts;
  std::string tool;
  Json args = Json::object();
  CallContext context;
  std::optional<CallBudget> budget;
  Json annotations;  // object or null
  Json extra = Json::object();  // unrecognized fields, kept for round trips

  ToolCall to_call() const;
  std::string annotation(const char* key) const;  // empty when absent
  bool operator==(const TraceRecord&) const = default;
};

TraceRecord trace_record_from_json(const Json& j, int line = 0);
Json trace_record_to_json(const TraceRecord& r);

std::vector<TraceRecord> parse_trace(std::string_view text);
std::vector<TraceRecord> read_trace(const std::filesystem::path& path);
std::string serialize_trace(const std::vector<TraceRecord>& records);
void write_trace(const std::vector<TraceRecord>& records, const std::filesystem::path& path);

struct ApprovalRecord {
  std::string mode;
  bool approved = false;
  std::int64_t delay_ms = 0;
  bool operator==(const ApprovalRecord&) const = default;
};

struct RedactionSummary {
  std::string pattern_id;
  std::size_t offset = 0;
  std::size_t length = 0;
  bool operator==(const RedactionSummary&) const = default;
};

struct OutcomeRecord {
  std::string status;      // success | error
  std::string error;       // PEP error code
  std::string tool_error;  // last error reported by the tool
  std::vector<SideEffectRecord> side_effects;
  std::int64_t executions = 0;
  std::int64_t latency_ms = 0;
  std::int64_t cost = 0;
  std::vector<RedactionSummary> redactions;
  std::int64_t detector_hits = 0;  // fixed-detector matches left in the returned output
  bool operator==(const OutcomeRecord&) const = default;
};

struct DecisionRecord {
  std::string trace_id;
  std::int64_t step_id = 0;
  Decision decision;
  std::optional<ApprovalRecord> approval;
  std::optional<OutcomeRecord> outcome;
  bool operator==(const DecisionRecord&) const = default;
};

Json decision_record_to_json(const DecisionRecord& r);
DecisionRecord decision_record_from_json(const Json& j);
std::string serialize_decision_log(const std::vector<DecisionRecord>& records);
std::vector<DecisionRecord> parse_decision_log(std::string_view text);
void write_decision_log(const std::vector<DecisionRecord>& records, const std::filesystem::path& path);
std::vector<DecisionRecord> read_decision_log(const std::filesystem::path& path);

struct FaultEventRecord {
  std::string trace_id;
  std::int64_t step_id = 0;
  std::string fault;
  bool applied = true;
  Json parameters = Json::object();
  bool operator==(const FaultEventRecord&) const = default;
};

Json fault_event_to_json(const FaultEventRecord& r);
FaultEventRecord fault_event_from_json(const Json& j);

struct MutationRecord {
  std::string trace_id;
  std::int64_t step_id = 0;
  std::string type;
  std::string taxonomy_class;
  std::string original_fragment;
  std::string mutated_fragment;
  bool is_unsafe = false;
  bool operator==(const MutationRecord&) const = default;
};

Json mutation_record_to_json(const MutationRecord& r);
MutationRecord mutation_record_from_json(const Json& j);

// Writes one canonical JSON line per element.
template <typename T, typename Fn>
std::string serialize_lines(const std::vector<T>& items, Fn&& to_json) {
  std::string out;
  for (const auto& item : items) {
    out += canonical_dump(to_json(item));
    out += '\n';
  }
  return out;
}

std::vector<Json> parse_jsonl(std::string_view text);
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

class JoinError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Pairs each decision with its trace step, in decision order. Throws
// JoinError for decisions without a matching step.
std::vector<std::pair<const TraceRecord*, const DecisionRecord*>> join(const std::vector<TraceRecord>& trace,
                                                                         const std::vector<DecisionRecord>& decisions);

}  // namespace toolgate
