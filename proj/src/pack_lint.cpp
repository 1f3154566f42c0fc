#include "toolgate/pack_lint.hpp"

#include <algorithm>
#include <set>

namespace toolgate {

namespace {

void collect(const Predicate& p, std::set<std::string>& args, std::set<std::string>& tool_literals) {
  if (p.kind != Predicate::Kind::Compare) {
    for (const auto& c : p.children) collect(c, args, tool_literals);
    return;
  }
  for (const Operand* o : {&p.lhs, &p.rhs}) {
    if (o->kind == Operand::Kind::Arg) args.insert(o->field);
  }
  const bool tool_side = p.lhs.kind == Operand::Kind::Tool || p.rhs.kind == Operand::Kind::Tool;
  if (!tool_side) return;
  const Operand& lit = p.lhs.kind == Operand::Kind::Literal ? p.lhs : p.rhs;
  if (lit.kind != Operand::Kind::Literal) return;
  if (lit.literal.is_string() && (p.op == CompareOp::Eq || p.op == CompareOp::Ne)) {
    tool_literals.insert(lit.literal.get<std::string>());
  } else if (lit.literal.is_array() && p.op == CompareOp::In) {
    for (const auto& v : lit.literal) {
      if (v.is_string()) tool_literals.insert(v.get<std::string>());
    }
  }
}

bool covers(const Policy& earlier, const Policy& later) {
  if (earlier.tools.empty()) return true;
  if (later.tools.empty()) return false;
  return std::all_of(later.tools.begin(), later.tools.end(),
                     [&](const std::string& t) { return earlier.applies_to(t); });
}

}  // namespace

std::vector<Diagnostic> validate_pack(const PolicyPack& pack, const Registry& registry) {
  std::vector<Diagnostic> out;
  for (std::size_t i = 0; i < pack.policies.size(); ++i) {
    const Policy& p = pack.policies[i];
    std::set<std::string> tools(p.tools.begin(), p.tools.end());
    std::set<std::string> args;
    std::set<std::string> literals;
    for (const auto* pred : {&p.allow_if, &p.deny_if, &p.require_approval_if}) {
      if (*pred) collect(**pred, args, literals);
    }
    tools.insert(literals.begin(), literals.end());
    for (const auto& t : tools) {
      if (!registry.find(t)) out.push_back({"unregistered_tool", p.name, "tool '" + t + "' is not registered"});
    }
    std::vector<const ToolManifest*> scope;
    for (const auto& m : registry.tools()) {
      if (p.applies_to(m.name)) scope.push_back(&m);
    }
    for (const auto& a : args) {
      const bool declared =
          std::any_of(scope.begin(), scope.end(), [&](const ToolManifest* m) { return m->arg(a) != nullptr; });
      if (!declared) {
        out.push_back({"undeclared_arg", p.name, "args." + a + " is not declared by any tool in scope"});
      }
    }
    if (p.deny_if) {
      for (std::size_t j = 0; j < i; ++j) {
        const Policy& q = pack.policies[j];
        if (q.deny_if && *q.deny_if == *p.deny_if && covers(q, p)) {
          out.push_back({"shadowed_rule", p.name, "deny_if duplicates the rule in '" + q.name + "'"});
          break;
        }
      }
    }
  }
  return out;
}

}  // namespace toolgate
