#include "toolgate/pipeline.hpp"

#include "toolgate/engine.hpp"
#include "toolgate/recovery.hpp"

#include <chrono>

namespace toolgate {

namespace {

using SteadyClock = std::chrono::steady_clock;

double elapsed_ms(SteadyClock::time_point since) {
  return std::chrono::duration<double, std::milli>(SteadyClock::now() - since).count();
}

OutcomeRecord blocked_outcome(const std::string& error) {
  OutcomeRecord o;
  o.status = "error";
  o.error = error;
  return o;
}

}  // namespace

StepResult Enforcer::enforce(const ToolCall& call, BudgetState& state, SimulatedEnvironment& env) {
  StepResult result;
  result.record.trace_id = call.metadata.trace_id;
  result.record.step_id = call.metadata.step_id;
  result.executed_call = call;
  const std::int64_t step_start = env.clock_ms;
  double overhead = 0.0;

  auto t0 = SteadyClock::now();
  state.now_ms = env.clock_ms;
  Decision decision = evaluate(pack_, call, state, registry_);
  if (options_.measure_overhead) overhead += elapsed_ms(t0);

  auto finish_blocked = [&](const std::string& error) {
    result.error = error;
    result.record.decision = decision;
    result.record.decision.overhead_ms = overhead;
    result.record.outcome = blocked_outcome(error);
    result.record.outcome->latency_ms = env.clock_ms - step_start;
    return result;
  };

  if (decision.outcome == Outcome::Deny) {
    return finish_blocked(decision.stage == BlockStage::Budget ? "budget_exhausted" : "policy_denied");
  }
  if (decision.outcome == Outcome::RequireApproval) {
    const ApprovalVerdict verdict = approver_.request(call, decision);
    env.clock_ms += verdict.delay_ms;
    result.record.approval = ApprovalRecord{std::string(to_string(approver_.mode())), verdict.approved, verdict.delay_ms};
    if (!verdict.approved) return finish_blocked("approval_rejected");
  }

  t0 = SteadyClock::now();
  const ToolCall effective = apply_sanitizers(pack_, call);
  result.executed_call = effective;
  const ToolManifest* manifest = registry_.find(call.tool_name);
  const std::string category = manifest ? std::string(to_string(manifest->category)) : call.tool_name;
  const RecoveryConfig& recovery = manifest ? pack_.recovery_for(manifest->category) : pack_.recovery.at("default");
  const EffectiveBudget budget = effective_budget(pack_, call);
  const std::int64_t unit_cost = manifest ? manifest->cost : 0;
  state.admitted_at[call.tool_name].push_back(env.clock_ms);

  RetryLimits limits;
  limits.max_retries = recovery.max_retries;
  if (budget.max_retries) {
    limits.max_retries = limits.max_retries ? std::min(*limits.max_retries, *budget.max_retries) : *budget.max_retries;
  }
  limits.step_cap = call.budget.max_calls.value_or(kDefaultStepCap);
  CircuitState scratch_circuit;
  CircuitState& circuit = recovery.failure_threshold > 0 ? state.circuits[category] : scratch_circuit;
  Rng jitter = make_stream(options_.seed, std::string_view("backoff"), std::string_view(call.metadata.trace_id),
                           call.metadata.step_id);
  if (options_.measure_overhead) overhead += elapsed_ms(t0);

  auto attempt_fn = [&](int attempt) {
    ToolOutput out = executor_.execute(effective, env, attempt);
    ++state.calls_made;
    state.cost_spent += out.cost_charged;
    ++state.calls_by_tool[call.tool_name];
    state.cost_by_tool[call.tool_name] += out.cost_charged;
    return out;
  };
  auto may_retry = [&]() {
    if (!budget.enforced) return true;
    if (budget.max_calls && state.calls_made >= *budget.max_calls) return false;
    if (budget.max_cost && state.cost_spent + unit_cost > *budget.max_cost) return false;
    if (budget.deadline_ms && env.clock_ms - state.run_start_ms >= *budget.deadline_ms) return false;
    return true;
  };
  RecoveryResult rr = retry_with_recovery(attempt_fn, recovery, limits, circuit, env.clock_ms, jitter, may_retry);

  t0 = SteadyClock::now();
  result.executions = rr.executions;
  if (rr.executions > 0) state.retries_by_step[call.metadata.step_id] = rr.executions - 1;
  result.output = redact_output(rr.output, pack_, call.tool_name, result.redactions);
  result.ok = rr.error.empty();
  result.error = rr.error;

  OutcomeRecord o;
  o.status = result.ok ? "success" : "error";
  o.error = rr.error;
  o.tool_error = rr.output.error;
  for (const auto& a : rr.attempts) {
    o.side_effects.insert(o.side_effects.end(), a.side_effects.begin(), a.side_effects.end());
    o.cost += a.cost_charged;
  }
  o.executions = rr.executions;
  o.latency_ms = env.clock_ms - step_start;
  for (const auto& e : result.redactions) o.redactions.push_back({e.pattern_id, e.offset, e.length});
  o.detector_hits = static_cast<std::int64_t>(detect(payload_text(result.output.payload), harness_detector()).size());
  if (options_.measure_overhead) overhead += elapsed_ms(t0);

  result.record.decision = std::move(decision);
  result.record.decision.overhead_ms = overhead;
  result.record.outcome = std::move(o);
  return result;
}

}  // namespace toolgate
