#include "toolgate/engine.hpp"

#include "toolgate/dsl.hpp"
#include "toolgate/environment.hpp"
#include "toolgate/json.hpp"
#include "toolgate/path_util.hpp"

#include <algorithm>
#include <sstream>

namespace toolgate {

std::string_view to_string(Outcome outcome) {
  static constexpr std::string_view names[] = {"ALLOW", "TRANSFORM", "REQUIRE_APPROVAL", "DENY"};
  return names[static_cast<int>(outcome)];
}

std::optional<Outcome> parse_outcome(std::string_view text) {
  for (int i = 0; i < 4; ++i) {
    if (to_string(static_cast<Outcome>(i)) == text) return static_cast<Outcome>(i);
  }
  return std::nullopt;
}

std::string explain(const Decision& d) {
  if (d.outcome == Outcome::Allow) return "allowed; rules consulted: " + std::to_string(d.rationale.size());
  std::ostringstream out;
  out << to_string(d.outcome);
  if (!d.policy_ids.empty()) {
    out << " by ";
    for (std::size_t i = 0; i < d.policy_ids.size(); ++i) out << (i ? ", " : "") << d.policy_ids[i];
  }
  out << "\nwhy:\n";
  for (const auto& r : d.rationale) out << "  - " << r << "\n";
  for (const auto& t : d.transforms) out << "  * " << t.kind << ": " << t.detail << "\n";
  if (!d.fix_hint.empty()) out << "fix: " << d.fix_hint << "\n";
  out << "risk: " << format_fixed6(d.risk_score);
  return out.str();
}

namespace {

std::string str_arg(const ToolCall& call, const char* name) {
  const Json* v = find_arg(call, name);
  return v && v->is_string() ? v->get<std::string>() : std::string();
}

bool traversal_like(const std::string& path) {
  return path.find("../") != std::string::npos || path == ".." || (!path.empty() && (path[0] == '/' || path[0] == '~'));
}

bool shell_touches_outside(const std::string& cmd, const std::string& workspace_root) {
  const std::string ws = normalize_path(workspace_root);
  std::istringstream in(cmd);
  std::string tok;
  while (in >> tok) {
    if (tok.find("of=") == 0 || tok.find("if=") == 0) tok = tok.substr(3);
    const bool pathish = !tok.empty() && (tok[0] == '/' || tok[0] == '~' || tok.find("../") != std::string::npos);
    if (!pathish) continue;
    const std::string resolved = (tok[0] == '/' || tok[0] == '~') ? normalize_path(tok) : normalize_path(ws + "/" + tok);
    if (!path_within(resolved, ws)) return true;
  }
  return false;
}

double table_value(const std::map<std::string, double>& table, const std::string& key, double fallback) {
  const auto it = table.find(key);
  return it == table.end() ? fallback : it->second;
}

struct Accumulator {
  Decision d;
  int consulted = 0;
  void note(const std::string& line) {
    d.rationale.push_back(line);
    ++consulted;
  }
  void blocker(const std::string& policy) {
    if (std::find(d.policy_ids.begin(), d.policy_ids.end(), policy) == d.policy_ids.end()) {
      d.policy_ids.push_back(policy);
    }
  }
};

std::string describe_missing(const PredicateResult& r) {
  std::string s;
  for (const auto& m : r.missing) s += (s.empty() ? "" : ", ") + m;
  return s.empty() ? s : " [missing: " + s + "; comparison false]";
}

bool check_rule(Accumulator& acc, const Policy& p, const char* rule, const Predicate& pred, const ToolCall& call) {
  const PredicateResult r = evaluate_predicate(pred, call);
  acc.note(p.name + "." + rule + " " + (r.value ? "matched" : "not matched") + ": " + print_predicate(pred) +
           describe_missing(r));
  return r.value;
}

std::int64_t rate_count(const Policy& p, const BudgetState& s) {
  std::int64_t n = 0;
  for (const auto& [tool, times] : s.admitted_at) {
    if (!p.applies_to(tool)) continue;
    for (auto t : times) {
      if (t > s.now_ms - 60000) ++n;
    }
  }
  return n;
}

std::int64_t scoped_total(const Policy& p, const std::map<std::string, std::int64_t>& by_tool) {
  std::int64_t n = 0;
  for (const auto& [tool, v] : by_tool) {
    if (p.applies_to(tool)) n += v;
  }
  return n;
}

Decision evaluate_impl(const PolicyPack& pack, const ToolCall& call, const BudgetState& state,
                       const Registry& registry) {
  Accumulator acc;
  acc.d.risk_score = risk_score(call, pack, registry);
  const ToolManifest* manifest = registry.find(call.tool_name);

  auto deny = [&](BlockStage stage, std::string hint) {
    acc.d.outcome = Outcome::Deny;
    acc.d.stage = stage;
    if (acc.d.fix_hint.empty()) acc.d.fix_hint = std::move(hint);
    return acc.d;
  };

  // (1) schema
  if (pack.schema_validation) {
    if (!manifest) {
      acc.note("schema_validation failed: tool '" + call.tool_name + "' is not registered");
      acc.blocker("schema_validation");
      return deny(BlockStage::Schema, "Call a registered tool.");
    }
    const auto violations = validate_args(*manifest, call.args);
    if (!violations.empty()) {
      for (const auto& v : violations) acc.note("schema_validation failed: " + v.field + ": " + v.reason);
      acc.blocker("schema_validation");
      return deny(BlockStage::Schema,
                  "Fix argument '" + violations.front().field + "' to match the " + call.tool_name + " schema.");
    }
    acc.note("schema_validation passed");
  }

  std::vector<const Policy*> scoped;
  for (const auto& p : pack.policies) {
    if (!p.on_output && p.applies_to(call.tool_name)) scoped.push_back(&p);
  }

  // (2) deny rules; every matching rule is reported.
  bool denied = false;
  for (const Policy* p : scoped) {
    if (p->deny_if && check_rule(acc, *p, "deny_if", *p->deny_if, call)) {
      acc.blocker(p->name);
      if (!denied && !p->fix_hint.empty()) acc.d.fix_hint = p->fix_hint;
      denied = true;
    }
  }
  if (denied) return deny(BlockStage::DenyRule, "Change the arguments so that no deny rule matches.");

  // (3) budgets, rate limits, deadline
  const EffectiveBudget budget = effective_budget(pack, call);
  const std::int64_t tool_cost = manifest ? manifest->cost : 0;
  const std::string budget_hint = "Adjust budget or call rate.";
  if (budget.enforced) {
    if (budget.max_calls && state.calls_made >= *budget.max_calls) {
      acc.note("budget exhausted: " + std::to_string(state.calls_made) + " calls made, max_calls " +
               std::to_string(*budget.max_calls));
      acc.blocker("budget");
      return deny(BlockStage::Budget, budget_hint);
    }
    if (budget.max_cost && state.cost_spent + tool_cost > *budget.max_cost) {
      acc.note("budget exhausted: cost " + std::to_string(state.cost_spent) + " + " + std::to_string(tool_cost) +
               " exceeds max_cost " + std::to_string(*budget.max_cost));
      acc.blocker("budget");
      return deny(BlockStage::Budget, budget_hint);
    }
    if (budget.deadline_ms && state.now_ms - state.run_start_ms >= *budget.deadline_ms) {
      acc.note("deadline exceeded: " + std::to_string(state.now_ms - state.run_start_ms) + " ms elapsed, deadline_ms " +
               std::to_string(*budget.deadline_ms));
      acc.blocker("budget");
      return deny(BlockStage::Budget, budget_hint);
    }
    acc.note("run budget ok");
  }
  for (const Policy* p : scoped) {
    if (!p->budget) continue;
    const BudgetSpec& b = *p->budget;
    if (b.max_calls_per_minute) {
      const std::int64_t n = rate_count(*p, state);
      if (n >= *b.max_calls_per_minute) {
        acc.note(p->name + " rate_limit: " + std::to_string(n) + " calls in the last minute, limit " +
                 std::to_string(*b.max_calls_per_minute));
        acc.blocker(p->name);
        return deny(BlockStage::Budget, budget_hint);
      }
      acc.note(p->name + " rate ok: " + std::to_string(n) + "/" + std::to_string(*b.max_calls_per_minute));
    }
    if (!p->tools.empty() && b.max_calls && scoped_total(*p, state.calls_by_tool) >= *b.max_calls) {
      acc.note(p->name + " budget exhausted: max_calls " + std::to_string(*b.max_calls));
      acc.blocker(p->name);
      return deny(BlockStage::Budget, budget_hint);
    }
    if (!p->tools.empty() && b.max_cost && scoped_total(*p, state.cost_by_tool) + tool_cost > *b.max_cost) {
      acc.note(p->name + " budget exhausted: max_cost " + std::to_string(*b.max_cost));
      acc.blocker(p->name);
      return deny(BlockStage::Budget, budget_hint);
    }
  }

  // (4) default deny within scope
  for (const Policy* p : scoped) {
    if (p->allow_if && !check_rule(acc, *p, "allow_if", *p->allow_if, call)) {
      acc.blocker(p->name);
      if (!denied) {
        acc.d.fix_hint = p->fix_hint.empty() ? "Satisfy " + p->name + ".allow_if: " + print_predicate(*p->allow_if)
                                              : p->fix_hint;
      }
      denied = true;
    }
  }
  if (denied) return deny(BlockStage::DefaultDeny, "");

  // (5) approval
  bool approval = false;
  for (const Policy* p : scoped) {
    if (p->require_approval_if && check_rule(acc, *p, "require_approval_if", *p->require_approval_if, call)) {
      acc.blocker(p->name);
      if (!approval) {
        acc.d.fix_hint = p->fix_hint.empty() ? "Request approval for this call." : p->fix_hint;
      }
      approval = true;
    }
  }
  if (pack.risk.gating) {
    const bool over = acc.d.risk_score >= pack.risk.threshold;
    acc.note("risk " + format_fixed6(acc.d.risk_score) + (over ? " >= " : " < ") + "threshold " +
             format_fixed6(pack.risk.threshold));
    if (over) {
      acc.blocker("risk_threshold");
      if (!approval) {
        acc.d.fix_hint = "Request approval, or lower the call's risk (score " + format_fixed6(acc.d.risk_score) +
                         " >= " + format_fixed6(pack.risk.threshold) + ").";
      }
      approval = true;
    }
  }

  // (6) transforms
  const ToolCall sanitized = apply_sanitizers(pack, call);
  if (sanitized.args != call.args) {
    for (const auto& p : pack.policies) {
      if (p.sanitize.empty() || !p.applies_to(call.tool_name)) continue;
      for (const auto& [k, v] : sanitized.args.items()) {
        const Json* before = find_arg(call, k);
        if (!before || *before != v) {
          acc.d.transforms.push_back({"sanitize_arg", k + ": " + (before ? before->dump() : "null") + " -> " + v.dump()});
        }
      }
      if (!approval) acc.blocker(p.name);
      break;
    }
  }
  for (const auto& p : pack.policies) {
    if (!p.on_output || p.redact_patterns.empty() || !p.applies_to(call.tool_name)) continue;
    std::string ids;
    for (const auto& r : p.redact_patterns) ids += (ids.empty() ? "" : ",") + r.id;
    acc.d.transforms.push_back({"redact_output", p.name + " [" + ids + "]"});
    if (!approval) acc.blocker(p.name);
  }

  if (approval) {
    acc.d.outcome = Outcome::RequireApproval;
    return acc.d;
  }
  if (!acc.d.transforms.empty()) {
    acc.d.outcome = Outcome::Transform;
    return acc.d;
  }
  acc.d.outcome = Outcome::Allow;
  acc.d.policy_ids.clear();
  return acc.d;
}

}  // namespace

RiskBreakdown risk_breakdown(const ToolCall& call, const PolicyPack& pack, const Registry& registry) {
  const RiskConfig& cfg = pack.risk;
  RiskBreakdown r;
  const ToolManifest* manifest = registry.find(call.tool_name);
  r.tool = manifest ? table_value(cfg.side_effect_risk, std::string(to_string(manifest->side_effect)), 1.0) : 1.0;

  auto feature = [&](const char* name) { return table_value(cfg.feature_risk, name, 0.0); };
  const std::string path = str_arg(call, "path");
  if (find_arg(call, "path") && traversal_like(path)) r.args = std::max(r.args, feature("traversal"));
  if (const Json* rec = find_arg(call, "recursive"); rec && rec->is_boolean() && rec->get<bool>()) {
    r.args = std::max(r.args, feature("recursive"));
  }
  if (str_arg(call, "mode") == "overwrite") r.args = std::max(r.args, feature("overwrite"));
  const std::string cmd = str_arg(call, "cmd");
  if (!cmd.empty()) {
    for (const auto& h : cfg.hazard_compiled) {
      if (h->search(cmd)) {
        r.args = std::max(r.args, feature("hazard"));
        break;
      }
    }
  }

  const std::string category = manifest ? std::string(to_string(manifest->category)) : std::string();
  if (category == "fs" && find_arg(call, "path")) {
    if (outside_workspace(path, call.context.workspace_root)) r.context = 1.0;
  } else if (category == "shell") {
    if (shell_touches_outside(cmd, call.context.workspace_root)) r.context = 1.0;
  } else if (category == "http") {
    const auto url = parse_url(str_arg(call, "url"));
    if (!url || std::find(cfg.approved_domains.begin(), cfg.approved_domains.end(), url->host) ==
                    cfg.approved_domains.end()) {
      r.context = 1.0;
    }
  }
  r.score = std::clamp(cfg.w_tool * r.tool + cfg.w_args * r.args + cfg.w_context * r.context, 0.0, 1.0);
  return r;
}

double risk_score(const ToolCall& call, const PolicyPack& pack, const Registry& registry) {
  return risk_breakdown(call, pack, registry).score;
}

EffectiveBudget effective_budget(const PolicyPack& pack, const ToolCall& call) {
  EffectiveBudget b;
  auto tighten = [](std::optional<std::int64_t>& slot, const std::optional<std::int64_t>& v) {
    if (v && (!slot || *v < *slot)) slot = v;
  };
  for (const auto& p : pack.policies) {
    if (!p.budget || !p.tools.empty() || p.on_output) continue;
    b.enforced = true;
    tighten(b.max_calls, p.budget->max_calls);
    tighten(b.max_cost, p.budget->max_cost);
    tighten(b.max_retries, p.budget->max_retries);
  }
  if (!b.enforced) return b;
  tighten(b.max_calls, call.budget.max_calls);
  tighten(b.max_cost, call.budget.max_cost);
  tighten(b.deadline_ms, call.budget.deadline_ms);
  return b;
}

ToolCall apply_sanitizers(const PolicyPack& pack, const ToolCall& call) {
  ToolCall out = call;
  for (const auto& p : pack.policies) {
    if (p.sanitize.empty() || !p.applies_to(call.tool_name)) continue;
    for (Sanitizer s : p.sanitize) {
      if (s == Sanitizer::CanonicalizePath) {
        const Json* path = find_arg(out, "path");
        if (!path || !path->is_string()) continue;
        const std::string raw = path->get<std::string>();
        const std::string normalized = normalize_path(raw);
        const std::string ws = normalize_path(call.context.workspace_root);
        if (!path_within(normalized, ws) || ws == "/") continue;
        const std::string relative = normalized.substr(1);
        if (relative != raw) out.args["path"] = relative;
      } else {
        const Json* url = find_arg(out, "url");
        if (!url || !url->is_string()) continue;
        const std::string raw = url->get<std::string>();
        const auto q = raw.find('?');
        if (q == std::string::npos) continue;
        std::string kept;
        std::istringstream params(raw.substr(q + 1));
        std::string param;
        while (std::getline(params, param, '&')) {
          if (has_secret_query(param)) continue;
          kept += (kept.empty() ? "" : "&") + param;
        }
        const std::string rebuilt = raw.substr(0, q) + (kept.empty() ? "" : "?" + kept);
        if (rebuilt != raw) out.args["url"] = rebuilt;
      }
    }
  }
  return out;
}

Decision evaluate(const PolicyPack& pack, const ToolCall& call, const BudgetState& state, const Registry& registry) {
  try {
    return evaluate_impl(pack, call, state, registry);
  } catch (const std::exception& e) {
    Decision d;
    d.outcome = Outcome::Deny;
    d.stage = BlockStage::EngineFault;
    d.policy_ids = {"engine"};
    d.rationale = {std::string("policy engine fault: ") + e.what()};
    d.fix_hint = "Retry after the policy configuration is fixed.";
    return d;
  }
}

}  // namespace toolgate
