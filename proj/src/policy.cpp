#include "toolgate/policy.hpp"

#include <algorithm>

namespace toolgate {

std::string_view to_string(CompareOp op) {
  switch (op) {
    case CompareOp::StartsWith: return "starts_with";
    case CompareOp::Matches: return "matches";
    case CompareOp::Eq: return "==";
    case CompareOp::Ne: return "!=";
    case CompareOp::Lt: return "<";
    case CompareOp::Gt: return ">";
    case CompareOp::In: return "in";
  }
  return "?";
}

std::string_view to_string(Sanitizer s) {
  return s == Sanitizer::CanonicalizePath ? "canonicalize_path" : "strip_secret_query";
}

std::string_view to_string(PackLevel level) {
  static constexpr std::string_view names[] = {"P0", "P1", "P2", "P3", "P4", "custom"};
  return names[static_cast<int>(level)];
}

std::optional<PackLevel> parse_level(std::string_view text) {
  for (int i = 0; i <= 5; ++i) {
    if (to_string(static_cast<PackLevel>(i)) == text) return static_cast<PackLevel>(i);
  }
  return std::nullopt;
}

bool Predicate::operator==(const Predicate& other) const {
  if (kind != other.kind) return false;
  if (kind == Kind::Compare) return op == other.op && lhs == other.lhs && rhs == other.rhs;
  return children == other.children;
}

bool Policy::applies_to(const std::string& tool_name) const {
  return tools.empty() || std::find(tools.begin(), tools.end(), tool_name) != tools.end();
}

bool Policy::operator==(const Policy& o) const {
  return name == o.name && tools == o.tools && tool_group == o.tool_group && on_output == o.on_output &&
         allow_if == o.allow_if && deny_if == o.deny_if && require_approval_if == o.require_approval_if &&
         budget == o.budget && redact_patterns == o.redact_patterns && sanitize == o.sanitize &&
         fix_hint == o.fix_hint;
}

const RecoveryConfig& PolicyPack::recovery_for(ToolCategory category) const {
  if (const auto it = recovery.find(std::string(to_string(category))); it != recovery.end()) return it->second;
  if (const auto it = recovery.find("default"); it != recovery.end()) return it->second;
  static const RecoveryConfig fallback;
  return fallback;
}

namespace {

const Json* resolve(const Operand& operand, const ToolCall& call, Json& scratch, PredicateResult& result) {
  switch (operand.kind) {
    case Operand::Kind::Literal:
      return &operand.literal;
    case Operand::Kind::Tool:
      scratch = call.tool_name;
      return &scratch;
    case Operand::Kind::Arg: {
      const Json* v = find_arg(call, operand.field);
      if (!v) result.missing.push_back("args." + operand.field);
      return v;
    }
    case Operand::Kind::Context: {
      const CallContext& c = call.context;
      if (operand.field == "workspace_root") {
        scratch = c.workspace_root;
        return &scratch;
      }
      const std::optional<std::string>& v = operand.field == "repo_state" ? c.repo_state : c.env;
      if (!v) {
        result.missing.push_back("context." + operand.field);
        return nullptr;
      }
      scratch = *v;
      return &scratch;
    }
  }
  return nullptr;
}

bool compare(const Predicate& p, const ToolCall& call, PredicateResult& result) {
  Json lscratch;
  Json rscratch;
  const Json* l = resolve(p.lhs, call, lscratch, result);
  const Json* r = resolve(p.rhs, call, rscratch, result);
  if (!l || !r) return false;
  switch (p.op) {
    case CompareOp::StartsWith:
      return l->is_string() && r->is_string() && l->get_ref<const std::string&>().rfind(r->get_ref<const std::string&>(), 0) == 0;
    case CompareOp::Matches: {
      if (!l->is_string()) return false;
      if (p.pattern) return p.pattern->search(l->get_ref<const std::string&>());
      if (!r->is_string()) return false;
      try {
        return Pattern::compile(r->get_ref<const std::string&>()).search(l->get_ref<const std::string&>());
      } catch (const PatternError&) {
        return false;
      }
    }
    case CompareOp::Eq:
      return *l == *r;
    case CompareOp::Ne:
      return *l != *r;
    case CompareOp::Lt:
      return l->is_number() && r->is_number() && l->get<double>() < r->get<double>();
    case CompareOp::Gt:
      return l->is_number() && r->is_number() && l->get<double>() > r->get<double>();
    case CompareOp::In:
      if (r->is_array()) return std::find(r->begin(), r->end(), *l) != r->end();
      if (r->is_string() && l->is_string()) {
        return r->get_ref<const std::string&>().find(l->get_ref<const std::string&>()) != std::string::npos;
      }
      return false;
  }
  return false;
}

bool eval(const Predicate& p, const ToolCall& call, PredicateResult& result) {
  switch (p.kind) {
    case Predicate::Kind::Compare:
      return compare(p, call, result);
    case Predicate::Kind::Not:
      return !eval(p.children.front(), call, result);
    case Predicate::Kind::And: {
      bool all = true;
      for (const auto& c : p.children) all = eval(c, call, result) && all;
      return all;
    }
    case Predicate::Kind::Or: {
      bool any = false;
      for (const auto& c : p.children) any = eval(c, call, result) || any;
      return any;
    }
  }
  return false;
}

}  // namespace

PredicateResult evaluate_predicate(const Predicate& pred, const ToolCall& call) {
  PredicateResult result;
  result.value = eval(pred, call, result);
  return result;
}

Json pack_parameters(const PolicyPack& pack) {
  Json j = Json::object();
  j["name"] = pack.name;
  j["level"] = std::string(to_string(pack.level));
  j["schema_validation"] = pack.schema_validation;
  j["root_prefix"] = pack.root_prefix;
  Json policies = Json::array();
  for (const auto& p : pack.policies) policies.push_back(p.name);
  j["policies"] = std::move(policies);
  Json risk = Json::object();
  risk["w_tool"] = pack.risk.w_tool;
  risk["w_args"] = pack.risk.w_args;
  risk["w_context"] = pack.risk.w_context;
  risk["threshold"] = pack.risk.threshold;
  risk["gating"] = pack.risk.gating;
  risk["side_effect_risk"] = Json::object();
  for (const auto& [k, v] : pack.risk.side_effect_risk) risk["side_effect_risk"][k] = v;
  risk["feature_risk"] = Json::object();
  for (const auto& [k, v] : pack.risk.feature_risk) risk["feature_risk"][k] = v;
  risk["hazard_patterns"] = pack.risk.hazard_patterns;
  risk["approved_domains"] = pack.risk.approved_domains;
  j["risk"] = std::move(risk);
  Json recovery = Json::object();
  for (const auto& [k, r] : pack.recovery) {
    Json rj = Json::object();
    rj["max_retries"] = r.max_retries ? Json(*r.max_retries) : Json("unbounded");
    rj["base_backoff_ms"] = r.base_backoff_ms;
    rj["jitter_fraction"] = r.jitter_fraction;
    rj["failure_threshold"] = r.failure_threshold;
    rj["cooldown_ms"] = r.cooldown_ms;
    rj["idempotency"] = r.idempotency;
    rj["key_fields"] = r.key_fields;
    recovery[k] = std::move(rj);
  }
  j["recovery"] = std::move(recovery);
  Json redact = Json::array();
  for (const auto& p : pack.policies) {
    for (const auto& r : p.redact_patterns) redact.push_back(Json{{"id", r.id}, {"pattern", r.source}});
  }
  j["redact_patterns"] = std::move(redact);
  return j;
}

}  // namespace toolgate
