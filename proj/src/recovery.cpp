#include "toolgate/recovery.hpp"

#include <algorithm>
#include <cmath>

namespace toolgate {

std::int64_t backoff_delay_ms(const RecoveryConfig& config, int attempt, double u) {
  if (config.base_backoff_ms <= 0) return 0;
  const double scale = std::ldexp(1.0, std::min(attempt, 30));
  const double factor = 1.0 + config.jitter_fraction * (2.0 * u - 1.0);
  return std::max<std::int64_t>(0, std::llround(static_cast<double>(config.base_backoff_ms) * scale * factor));
}

bool circuit_allows(CircuitState& circuit, std::int64_t now_ms) {
  if (circuit.phase != CircuitPhase::Open) return true;
  if (now_ms < circuit.open_until_ms) return false;
  circuit.phase = CircuitPhase::HalfOpen;
  return true;
}

void circuit_record(CircuitState& circuit, const RecoveryConfig& config, bool failure, std::int64_t now_ms) {
  if (config.failure_threshold <= 0) return;
  if (!failure) {
    circuit = CircuitState{};
    return;
  }
  ++circuit.consecutive_failures;
  if (circuit.phase == CircuitPhase::HalfOpen || circuit.consecutive_failures >= config.failure_threshold) {
    circuit.phase = CircuitPhase::Open;
    circuit.open_until_ms = now_ms + config.cooldown_ms;
    circuit.consecutive_failures = 0;
  }
}

RecoveryResult retry_with_recovery(const std::function<ToolOutput(int)>& attempt_fn, const RecoveryConfig& config,
                                   const RetryLimits& limits, CircuitState& circuit, std::int64_t& clock_ms,
                                   Rng& jitter, const std::function<bool()>& may_retry) {
  RecoveryResult result;
  std::int64_t allowed = std::max<std::int64_t>(1, limits.step_cap);
  if (limits.max_retries) allowed = std::min(allowed, 1 + std::max<std::int64_t>(0, *limits.max_retries));
  for (int attempt = 0;; ++attempt) {
    if (config.failure_threshold > 0 && !circuit_allows(circuit, clock_ms)) {
      result.error = "circuit_open";
      return result;
    }
    if (attempt > 0 && may_retry && !may_retry()) {
      result.error = "budget_exhausted";
      return result;
    }
    ToolOutput out = attempt_fn(attempt);
    ++result.executions;
    clock_ms += out.latency_ms;
    const bool retryable = !out.ok() && is_retryable_error(out.error);
    // Non-retryable errors are answers from a healthy tool.
    if (out.ok() || retryable) circuit_record(circuit, config, retryable, clock_ms);
    result.attempts.push_back(out);
    result.output = std::move(out);
    if (result.output.ok()) return result;
    if (!retryable || result.executions >= allowed) {
      result.error = "tool_failed";
      return result;
    }
    const std::int64_t delay = backoff_delay_ms(config, attempt, jitter.uniform());
    result.backoffs_ms.push_back(delay);
    clock_ms += delay;
  }
}

}  // namespace toolgate
