#pragma once

#include "toolgate/budget_state.hpp"
#include "toolgate/environment.hpp"
#include "toolgate/policy.hpp"
#include "toolgate/rng.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace toolgate {

inline constexpr std::int64_t kDefaultStepCap = 100;

struct RecoveryResult {
  ToolOutput output;           // last attempt's output; empty on circuit_open before any attempt
  std::string error;           // "", tool_failed, circuit_open, budget_exhausted
  std::int64_t executions = 0;
  std::vector<std::int64_t> backoffs_ms;
  std::vector<ToolOutput> attempts;
};

struct RetryLimits {
  std::optional<std::int64_t> max_retries;  // nullopt: bounded only by step_cap
  std::int64_t step_cap = kDefaultStepCap;  // maximum attempts per step
};

// Delay before retry number `attempt` + 1:
// base · 2^attempt · (1 + jitter · (2u − 1)), rounded to whole milliseconds.
std::int64_t backoff_delay_ms(const RecoveryConfig& config, int attempt, double u);

// Advances the breaker on an attempt result and reports whether the call may
// proceed. Keyed by tool category in state.circuits.
bool circuit_allows(CircuitState& circuit, std::int64_t now_ms);
void circuit_record(CircuitState& circuit, const RecoveryConfig& config, bool failure, std::int64_t now_ms);

// Runs `attempt_fn` until success, a non-retryable error, exhaustion of the
// retry allowance, or an open circuit. The virtual clock advances by each
// attempt's latency and by every backoff. `may_retry` is consulted before
// each retry (budget checks).
RecoveryResult retry_with_recovery(const std::function<ToolOutput(int)>& attempt_fn, const RecoveryConfig& config,
                                   const RetryLimits& limits, CircuitState& circuit, std::int64_t& clock_ms,
                                   Rng& jitter, const std::function<bool()>& may_retry = {});

}  // namespace toolgate
