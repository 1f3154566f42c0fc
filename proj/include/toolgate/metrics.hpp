#pragma once

#include "toolgate/environment.hpp"
#include "toolgate/json.hpp"
#include "toolgate/registry.hpp"
#include "toolgate/trace_io.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace toolgate {

struct RunKey {
  std::string suite;
  std::string pack;
  std::string fault_profile;
  std::uint64_t seed = 0;

  std::string id() const;  // e.g. "A_P3_harsh_s2"
  bool operator==(const RunKey&) const = default;
};

struct LeakageCounts {
  std::int64_t planted = 0;
  std::int64_t planted_detected = 0;
  std::int64_t detections = 0;
  std::int64_t true_detections = 0;
  bool operator==(const LeakageCounts&) const = default;
};

struct RunResult {
  RunKey key;
  std::int64_t traces = 0;
  std::int64_t steps = 0;

  std::int64_t unsafe_injected = 0;
  std::int64_t unsafe_blocked = 0;
  std::int64_t benign = 0;
  std::int64_t benign_blocked = 0;
  std::optional<double> vpr;
  std::optional<double> fbr;

  std::int64_t successful_traces = 0;
  double task_success = 0.0;  // fraction of traces
  std::optional<double> time_to_success_ms;

  std::int64_t executed = 0;
  std::int64_t minimal = 0;         // un-injected trace length
  std::int64_t admitted_steps = 0;  // steps executed at least once
  std::optional<double> retry_amplification;
  std::optional<double> retry_amplification_admitted;

  double latency_p95_ms = 0.0;
  double latency_p99_ms = 0.0;

  LeakageCounts leakage;
  std::optional<double> leakage_recall;
  std::optional<double> leakage_precision;

  std::int64_t unsafe_side_effect_count = 0;
  std::int64_t approvals = 0;
  std::int64_t approvals_rejected = 0;
  double approvals_per_task = 0.0;

  std::int64_t denials = 0;
  std::int64_t fixed_denials = 0;
  std::optional<double> time_to_fix_proxy;
  std::optional<double> fix_hint_valid_retry_rate;

  double mean_overhead_ms = 0.0;
  double median_overhead_ms = 0.0;
  std::int64_t log_volume_bytes = 0;
};

Json run_result_to_json(const RunResult& r);
RunResult run_result_from_json(const Json& j);

// A step counts as blocked when it was denied or its approval was rejected.
bool is_blocked(const DecisionRecord& record);

// Incremental metric computation, fed step by step while a run executes.
class MetricsAccumulator {
 public:
  explicit MetricsAccumulator(RunKey key) { result_.key = std::move(key); }

  void begin_trace(const std::vector<TraceRecord>& steps);
  void observe(const TraceRecord& step, const DecisionRecord& record, const MutationRecord* mutation);
  void end_trace();

  void set_leakage(const LeakageCounts& counts) { result_.leakage = counts; }
  void set_log_volume(std::int64_t bytes) { result_.log_volume_bytes = bytes; }

  RunResult finish() const;

 private:
  struct PendingDenial {
    std::size_t index;
    std::string tool;
    Json args;
  };

  RunResult result_;
  std::vector<double> latencies_;
  std::vector<double> overheads_;
  std::vector<double> success_times_;
  std::vector<double> fix_distances_;

  // Current trace.
  std::optional<CallBudget> budget_;
  std::size_t index_ = 0;
  bool required_ok_ = true;
  bool unsafe_effect_ = false;
  std::int64_t calls_ = 0;
  std::int64_t cost_ = 0;
  std::int64_t elapsed_ = 0;
  std::vector<PendingDenial> pending_;
};

// Fixed-detector leakage measured on a fault-free, policy-free replay of the
// (mutated) trace, so it is identical for every pack.
LeakageCounts measure_leakage(const std::vector<TraceRecord>& trace, const SimulatedEnvironment& initial,
                              const Registry& registry = default_registry());

}  // namespace toolgate
