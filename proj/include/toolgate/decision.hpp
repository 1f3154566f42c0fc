#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace toolgate {

// Declared in severity order.
enum class Outcome { Allow, Transform, RequireApproval, Deny };

std::string_view to_string(Outcome outcome);
std::optional<Outcome> parse_outcome(std::string_view text);
inline int severity(Outcome o) { return static_cast<int>(o); }

struct TransformSpec {
  std::string kind;  // sanitize_arg | redact_output
  std::string detail;
  bool operator==(const TransformSpec&) const = default;
};

// Which stage produced a DENY; drives the PEP error code.
enum class BlockStage { None, Schema, DenyRule, Budget, DefaultDeny, EngineFault };

struct Decision {
  Outcome outcome = Outcome::Allow;
  std::vector<std::string> policy_ids;
  std::vector<std::string> rationale;
  std::string fix_hint;
  double risk_score = 0.0;
  std::vector<TransformSpec> transforms;
  double overhead_ms = 0.0;
  BlockStage stage = BlockStage::None;  // not serialized; excluded from ==
  bool operator==(const Decision& o) const {
    return outcome == o.outcome && policy_ids == o.policy_ids && rationale == o.rationale && fix_hint == o.fix_hint &&
           risk_score == o.risk_score && transforms == o.transforms && overhead_ms == o.overhead_ms;
  }
};

// "why blocked / how to fix" rendering.
std::string explain(const Decision& decision);

}  // namespace toolgate
