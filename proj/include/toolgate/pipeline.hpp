#pragma once

#include "toolgate/approver.hpp"
#include "toolgate/budget_state.hpp"
#include "toolgate/environment.hpp"
#include "toolgate/policy.hpp"
#include "toolgate/redaction.hpp"
#include "toolgate/registry.hpp"
#include "toolgate/trace_io.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace toolgate {

struct StepResult {
  bool ok = false;
  std::string error;  // policy_denied, approval_rejected, budget_exhausted, tool_failed, circuit_open
  ToolOutput output;  // redacted
  ToolCall executed_call;  // after transforms
  DecisionRecord record;
  std::vector<RedactionEvent> redactions;
  std::int64_t executions = 0;
};

struct EnforcerOptions {
  std::uint64_t seed = 0;         // backoff jitter streams
  bool measure_overhead = false;  // wall-clock PDP+PEP time; 0 otherwise so logs replay byte for byte
};

// Policy enforcement point: evaluate, log, approve, transform, execute with
// recovery, redact, update state.
class Enforcer {
 public:
  Enforcer(const PolicyPack& pack, const Registry& registry, Executor& executor, Approver& approver,
           EnforcerOptions options = {})
      : pack_(pack), registry_(registry), executor_(executor), approver_(approver), options_(options) {}

  StepResult enforce(const ToolCall& call, BudgetState& state, SimulatedEnvironment& env);

 private:
  const PolicyPack& pack_;
  const Registry& registry_;
  Executor& executor_;
  Approver& approver_;
  EnforcerOptions options_;
};

}  // namespace toolgate
