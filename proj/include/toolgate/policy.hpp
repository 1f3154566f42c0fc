#pragma once

#include "toolgate/json.hpp"
#include "toolgate/pattern.hpp"
#include "toolgate/registry.hpp"
#include "toolgate/tool_call.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace toolgate {

struct SourcePos {
  int line = 0;
  int column = 0;
};

struct Operand {
  enum class Kind { Arg, Context, Tool, Literal };
  Kind kind = Kind::Literal;
  std::string field;  // Arg: argument name; Context: context field
  Json literal;
  bool operator==(const Operand& other) const {
    return kind == other.kind && field == other.field && literal == other.literal;
  }
};

enum class CompareOp { StartsWith, Matches, Eq, Ne, Lt, Gt, In };

std::string_view to_string(CompareOp op);

struct Predicate {
  enum class Kind { And, Or, Not, Compare };
  Kind kind = Kind::Compare;
  std::vector<Predicate> children;
  CompareOp op = CompareOp::Eq;
  Operand lhs;
  Operand rhs;
  // Precompiled when rhs is a literal pattern; ROOT already expanded.
  std::shared_ptr<const Pattern> pattern;
  SourcePos pos;

  // Structural equality; ignores positions and compiled state.
  bool operator==(const Predicate& other) const;
};

struct PredicateResult {
  bool value = false;
  std::vector<std::string> missing;  // "args.recursive" etc., fields absent at evaluation
};

PredicateResult evaluate_predicate(const Predicate& pred, const ToolCall& call);

struct BudgetSpec {
  std::optional<std::int64_t> max_calls_per_minute;
  std::optional<std::int64_t> max_calls;
  std::optional<std::int64_t> max_cost;
  std::optional<std::int64_t> max_retries;
  bool operator==(const BudgetSpec&) const = default;
};

struct RedactPattern {
  std::string id;
  std::string source;
  std::shared_ptr<const Pattern> compiled;
  bool operator==(const RedactPattern& other) const { return id == other.id && source == other.source; }
};

enum class Sanitizer { CanonicalizePath, StripSecretQuery };
std::string_view to_string(Sanitizer s);

struct Policy {
  std::string name;
  std::vector<std::string> tools;  // empty: every tool
  bool tool_group = false;         // scope written as a list
  bool on_output = false;
  std::optional<Predicate> allow_if;
  std::optional<Predicate> deny_if;
  std::optional<Predicate> require_approval_if;
  std::optional<BudgetSpec> budget;
  std::vector<RedactPattern> redact_patterns;
  std::vector<Sanitizer> sanitize;
  std::string fix_hint;
  SourcePos pos;

  bool applies_to(const std::string& tool_name) const;
  bool operator==(const Policy& other) const;
};

struct RiskConfig {
  double w_tool = 0.5;
  double w_args = 0.3;
  double w_context = 0.2;
  double threshold = 0.7;
  bool gating = false;  // when false the score is computed and logged but never gates
  std::map<std::string, double> side_effect_risk{
      {"delete", 0.9}, {"exec", 0.8}, {"write", 0.5}, {"network", 0.4}, {"read_only", 0.1}};
  std::map<std::string, double> feature_risk{
      {"traversal", 1.0}, {"recursive", 0.8}, {"overwrite", 0.5}, {"hazard", 1.0}};
  std::vector<std::string> hazard_patterns{R"(rm\s+-[a-zA-Z]*[rR])", R"(mkfs)", R"(:\(\)\{)", R"(dd\s+if=)"};
  std::vector<std::string> approved_domains{"api.example.com"};
  std::vector<std::shared_ptr<const Pattern>> hazard_compiled;

  bool operator==(const RiskConfig& o) const {
    return w_tool == o.w_tool && w_args == o.w_args && w_context == o.w_context && threshold == o.threshold &&
           gating == o.gating && side_effect_risk == o.side_effect_risk && feature_risk == o.feature_risk &&
           hazard_patterns == o.hazard_patterns && approved_domains == o.approved_domains;
  }
};

struct RecoveryConfig {
  std::optional<std::int64_t> max_retries;  // nullopt: until the step cap
  std::int64_t base_backoff_ms = 0;
  double jitter_fraction = 0.0;
  std::int64_t failure_threshold = 0;  // 0 disables the circuit breaker
  std::int64_t cooldown_ms = 0;
  bool idempotency = false;
  std::vector<std::string> key_fields{"path", "contents_ref", "mode", "key", "value", "recursive"};
  bool operator==(const RecoveryConfig&) const = default;
};

enum class PackLevel { P0, P1, P2, P3, P4, Custom };
std::string_view to_string(PackLevel level);
std::optional<PackLevel> parse_level(std::string_view text);

struct PolicyPack {
  std::string name = "custom";
  PackLevel level = PackLevel::Custom;
  bool schema_validation = false;
  std::string root_prefix = "/";
  std::vector<Policy> policies;
  RiskConfig risk;
  // "default" plus optional per-category overrides keyed by category name.
  std::map<std::string, RecoveryConfig> recovery{{"default", RecoveryConfig{}}};

  const RecoveryConfig& recovery_for(ToolCategory category) const;
  bool operator==(const PolicyPack&) const = default;
};

// Parameter snapshot recorded in run manifests.
Json pack_parameters(const PolicyPack& pack);

}  // namespace toolgate
