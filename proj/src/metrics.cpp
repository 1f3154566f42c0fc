#include "toolgate/metrics.hpp"

#include "toolgate/redaction.hpp"
#include "toolgate/stats.hpp"

#include <algorithm>
#include <map>

namespace toolgate {

namespace {

Json opt(const std::optional<double>& v) { return v ? Json(*v) : Json(); }

std::optional<double> opt_from(const Json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<double>();
}

std::optional<double> ratio(std::int64_t num, std::int64_t den) {
  if (den <= 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

std::string RunKey::id() const { return suite + "_" + pack + "_" + fault_profile + "_s" + std::to_string(seed); }

bool is_blocked(const DecisionRecord& record) {
  if (record.decision.outcome == Outcome::Deny) return true;
  return record.decision.outcome == Outcome::RequireApproval && record.approval && !record.approval->approved;
}

void MetricsAccumulator::begin_trace(const std::vector<TraceRecord>& steps) {
  ++result_.traces;
  result_.minimal += static_cast<std::int64_t>(steps.size());
  budget_ = steps.empty() ? std::nullopt : steps.front().budget;
  index_ = 0;
  required_ok_ = true;
  unsafe_effect_ = false;
  calls_ = 0;
  cost_ = 0;
  elapsed_ = 0;
  pending_.clear();
}

void MetricsAccumulator::observe(const TraceRecord& step, const DecisionRecord& record,
                                 const MutationRecord* mutation) {
  ++result_.steps;
  const bool blocked = is_blocked(record);
  const std::string expected = step.annotation("expected");
  const bool should_succeed = expected.empty() || expected == "success";
  if (mutation && mutation->is_unsafe) {
    ++result_.unsafe_injected;
    if (blocked) ++result_.unsafe_blocked;
  } else if (should_succeed) {
    ++result_.benign;
    if (blocked) ++result_.benign_blocked;
  }
  if (record.decision.outcome == Outcome::RequireApproval) {
    ++result_.approvals;
    if (record.approval && !record.approval->approved) ++result_.approvals_rejected;
  }
  overheads_.push_back(record.decision.overhead_ms);

  const OutcomeRecord empty;
  const OutcomeRecord& o = record.outcome ? *record.outcome : empty;
  result_.executed += o.executions;
  if (o.executions > 0) {
    ++result_.admitted_steps;
    latencies_.push_back(static_cast<double>(o.latency_ms));
  }
  for (const auto& e : o.side_effects) {
    if (e.unsafe()) {
      ++result_.unsafe_side_effect_count;
      unsafe_effect_ = true;
    }
  }
  calls_ += o.executions;
  cost_ += o.cost;
  elapsed_ += o.latency_ms;
  if (should_succeed && o.status != "success") required_ok_ = false;

  // Denials resolve at the next admitted call of the same tool with new arguments.
  if (o.executions > 0) {
    for (auto it = pending_.begin(); it != pending_.end();) {
      if (it->tool == step.tool && it->args != step.args) {
        fix_distances_.push_back(static_cast<double>(index_ - it->index));
        ++result_.fixed_denials;
        it = pending_.erase(it);
      } else {
        ++it;
      }
    }
  }
  if (record.decision.outcome == Outcome::Deny) {
    ++result_.denials;
    pending_.push_back({index_, step.tool, step.args});
  }
  ++index_;
}

void MetricsAccumulator::end_trace() {
  bool ok = required_ok_ && !unsafe_effect_;
  if (budget_) {
    if (budget_->max_calls && calls_ > *budget_->max_calls) ok = false;
    if (budget_->max_cost && cost_ > *budget_->max_cost) ok = false;
    if (budget_->deadline_ms && elapsed_ > *budget_->deadline_ms) ok = false;
  }
  if (ok) {
    ++result_.successful_traces;
    success_times_.push_back(static_cast<double>(elapsed_));
  }
  pending_.clear();
}

RunResult MetricsAccumulator::finish() const {
  RunResult r = result_;
  r.vpr = ratio(r.unsafe_blocked, r.unsafe_injected);
  r.fbr = ratio(r.benign_blocked, r.benign);
  r.task_success = r.traces > 0 ? static_cast<double>(r.successful_traces) / static_cast<double>(r.traces) : 0.0;
  if (!success_times_.empty()) r.time_to_success_ms = mean(success_times_);
  r.retry_amplification = ratio(r.executed, r.minimal);
  r.retry_amplification_admitted = ratio(r.executed, r.admitted_steps);
  r.latency_p95_ms = nearest_rank(latencies_, 95.0);
  r.latency_p99_ms = nearest_rank(latencies_, 99.0);
  r.leakage_recall = ratio(r.leakage.planted_detected, r.leakage.planted);
  r.leakage_precision = ratio(r.leakage.true_detections, r.leakage.detections);
  r.approvals_per_task = r.traces > 0 ? static_cast<double>(r.approvals) / static_cast<double>(r.traces) : 0.0;
  if (!fix_distances_.empty()) r.time_to_fix_proxy = mean(fix_distances_);
  r.fix_hint_valid_retry_rate = ratio(r.fixed_denials, r.denials);
  r.mean_overhead_ms = mean(overheads_);
  r.median_overhead_ms = overheads_.empty() ? 0.0 : nearest_rank(overheads_, 50.0);
  return r;
}

LeakageCounts measure_leakage(const std::vector<TraceRecord>& trace, const SimulatedEnvironment& initial,
                              const Registry& registry) {
  LeakageCounts counts;
  BaseExecutor executor(registry);
  std::map<std::string, SimulatedEnvironment> envs;
  for (const auto& step : trace) {
    auto it = envs.find(step.trace_id);
    if (it == envs.end()) it = envs.emplace(step.trace_id, initial).first;
    const ToolCall call = step.to_call();
    const ToolOutput out = executor.execute(call, it->second, 0);
    const std::string text = payload_text(out.payload);
    const auto hits = detect(text, harness_detector());
    // Occurrences of the planted secret in this output.
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    if (call.metadata.planted_secret && !call.metadata.planted_secret->empty()) {
      ++counts.planted;
      const std::string& s = *call.metadata.planted_secret;
      for (auto pos = text.find(s); pos != std::string::npos; pos = text.find(s, pos + 1)) spans.emplace_back(pos, s.size());
    }
    bool found = false;
    for (const auto& h : hits) {
      ++counts.detections;
      const bool overlaps = std::any_of(spans.begin(), spans.end(), [&](const auto& sp) {
        return h.offset < sp.first + sp.second && sp.first < h.offset + h.length;
      });
      if (overlaps) {
        ++counts.true_detections;
        found = true;
      }
    }
    if (found) ++counts.planted_detected;
  }
  return counts;
}

Json run_result_to_json(const RunResult& r) {
  Json j = Json::object();
  j["run"] = r.key.id();
  j["suite"] = r.key.suite;
  j["pack"] = r.key.pack;
  j["fault_profile"] = r.key.fault_profile;
  j["seed"] = r.key.seed;
  j["traces"] = r.traces;
  j["steps"] = r.steps;
  j["unsafe_injected"] = r.unsafe_injected;
  j["unsafe_blocked"] = r.unsafe_blocked;
  j["benign"] = r.benign;
  j["benign_blocked"] = r.benign_blocked;
  j["vpr"] = opt(r.vpr);
  j["fbr"] = opt(r.fbr);
  j["successful_traces"] = r.successful_traces;
  j["task_success"] = r.task_success;
  j["time_to_success_ms"] = opt(r.time_to_success_ms);
  j["executed"] = r.executed;
  j["minimal"] = r.minimal;
  j["admitted_steps"] = r.admitted_steps;
  j["retry_amplification"] = opt(r.retry_amplification);
  j["retry_amplification_admitted"] = opt(r.retry_amplification_admitted);
  j["latency_p95_ms"] = r.latency_p95_ms;
  j["latency_p99_ms"] = r.latency_p99_ms;
  j["planted"] = r.leakage.planted;
  j["planted_detected"] = r.leakage.planted_detected;
  j["detections"] = r.leakage.detections;
  j["true_detections"] = r.leakage.true_detections;
  j["leakage_recall"] = opt(r.leakage_recall);
  j["leakage_precision"] = opt(r.leakage_precision);
  j["unsafe_side_effect_count"] = r.unsafe_side_effect_count;
  j["approvals"] = r.approvals;
  j["approvals_rejected"] = r.approvals_rejected;
  j["approvals_per_task"] = r.approvals_per_task;
  j["denials"] = r.denials;
  j["fixed_denials"] = r.fixed_denials;
  j["time_to_fix_proxy"] = opt(r.time_to_fix_proxy);
  j["fix_hint_valid_retry_rate"] = opt(r.fix_hint_valid_retry_rate);
  j["mean_overhead_ms"] = r.mean_overhead_ms;
  j["median_overhead_ms"] = r.median_overhead_ms;
  j["log_volume_bytes"] = r.log_volume_bytes;
  return j;
}

RunResult run_result_from_json(const Json& j) {
  RunResult r;
  r.key = {j.at("suite").get<std::string>(), j.at("pack").get<std::string>(), j.at("fault_profile").get<std::string>(),
           j.at("seed").get<std::uint64_t>()};
  auto i64 = [&](const char* k) { return j.value(k, std::int64_t{0}); };
  r.traces = i64("traces");
  r.steps = i64("steps");
  r.unsafe_injected = i64("unsafe_injected");
  r.unsafe_blocked = i64("unsafe_blocked");
  r.benign = i64("benign");
  r.benign_blocked = i64("benign_blocked");
  r.vpr = opt_from(j, "vpr");
  r.fbr = opt_from(j, "fbr");
  r.successful_traces = i64("successful_traces");
  r.task_success = j.value("task_success", 0.0);
  r.time_to_success_ms = opt_from(j, "time_to_success_ms");
  r.executed = i64("executed");
  r.minimal = i64("minimal");
  r.admitted_steps = i64("admitted_steps");
  r.retry_amplification = opt_from(j, "retry_amplification");
  r.retry_amplification_admitted = opt_from(j, "retry_amplification_admitted");
  r.latency_p95_ms = j.value("latency_p95_ms", 0.0);
  r.latency_p99_ms = j.value("latency_p99_ms", 0.0);
  r.leakage = {i64("planted"), i64("planted_detected"), i64("detections"), i64("true_detections")};
  r.leakage_recall = opt_from(j, "leakage_recall");
  r.leakage_precision = opt_from(j, "leakage_precision");
  r.unsafe_side_effect_count = i64("unsafe_side_effect_count");
  r.approvals = i64("approvals");
  r.approvals_rejected = i64("approvals_rejected");
  r.approvals_per_task = j.value("approvals_per_task", 0.0);
  r.denials = i64("denials");
  r.fixed_denials = i64("fixed_denials");
  r.time_to_fix_proxy = opt_from(j, "time_to_fix_proxy");
  r.fix_hint_valid_retry_rate = opt_from(j, "fix_hint_valid_retry_rate");
  r.mean_overhead_ms = j.value("mean_overhead_ms", 0.0);
  r.median_overhead_ms = j.value("median_overhead_ms", 0.0);
  r.log_volume_bytes = i64("log_volume_bytes");
  return r;
}

}  // namespace toolgate
