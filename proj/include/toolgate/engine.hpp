#pragma once

#include "toolgate/budget_state.hpp"
#include "toolgate/decision.hpp"
#include "toolgate/policy.hpp"
#include "toolgate/registry.hpp"
#include "toolgate/tool_call.hpp"

#include <optional>

namespace toolgate {

struct RiskBreakdown {
  double tool = 0.0;
  double args = 0.0;
  double context = 0.0;
  double score = 0.0;
};

RiskBreakdown risk_breakdown(const ToolCall& call, const PolicyPack& pack,
                             const Registry& registry = default_registry());
double risk_score(const ToolCall& call, const PolicyPack& pack, const Registry& registry = default_registry());

// Effective run budget: the trace budget, tightened by unscoped pack budget
// policies. Budgets are only enforced when the pack declares one.
struct EffectiveBudget {
  bool enforced = false;
  std::optional<std::int64_t> max_calls;
  std::optional<std::int64_t> max_cost;
  std::optional<std::int64_t> deadline_ms;
  std::optional<std::int64_t> max_retries;
};

EffectiveBudget effective_budget(const PolicyPack& pack, const ToolCall& call);

// Pure policy decision point. Never throws: internal failures yield a
// fail-closed DENY.
Decision evaluate(const PolicyPack& pack, const ToolCall& call, const BudgetState& state,
                  const Registry& registry = default_registry());

// Arguments after the pack's sanitizers; equal to call.args when none apply.
ToolCall apply_sanitizers(const PolicyPack& pack, const ToolCall& call);

}  // namespace toolgate
