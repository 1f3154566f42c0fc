#include <catch_amalgamated.hpp>

#include "call_gen.hpp"
#include "helpers.hpp"
#include "toolgate/builtin_packs.hpp"
#include "toolgate/dsl.hpp"
#include "toolgate/engine.hpp"

#include <cmath>

using namespace toolgate;
using test_support::make_call;

namespace {

bool contains(const std::vector<std::string>& lines, const std::string& needle) {
  return std::any_of(lines.begin(), lines.end(), [&](const std::string& s) { return s.find(needle) != std::string::npos; });
}

}  // namespace

TEST_CASE("traversal write is denied by the workspace rule", "[engine]") {
  const Decision d = evaluate(builtin_pack(PackLevel::P3),
                              make_call("fs.write", {{"path", "../etc/passwd"}, {"contents_ref", "blob:1"}, {"mode", "overwrite"}}),
                              BudgetState{});
  CHECK(d.outcome == Outcome::Deny);
  CHECK(d.policy_ids.front() == "workspace_fs_safety");
  CHECK(contains(d.rationale, "workspace_fs_safety.deny_if matched"));
  CHECK(d.fix_hint.find("workspace_root") != std::string::npos);
}

TEST_CASE("P0 allows everything", "[engine]") {
  Rng rng(5);
  const PolicyPack p0 = builtin_pack(PackLevel::P0);
  for (int i = 0; i < 500; ++i) {
    const Decision d = evaluate(p0, test_support::random_call(rng), test_support::random_state(rng));
    REQUIRE(d.outcome == Outcome::Allow);
    REQUIRE(d.policy_ids.empty());
  }
}

TEST_CASE("recursive delete inside the workspace needs approval under P4", "[engine]") {
  const ToolCall c = make_call("fs.delete", {{"path", "repo/build"}, {"recursive", true}});
  const Decision d = evaluate(builtin_pack(PackLevel::P4), c, BudgetState{});
  CHECK(d.outcome == Outcome::RequireApproval);
  CHECK(d.policy_ids.front() == "workspace_fs_approval");
  CHECK_FALSE(d.fix_hint.empty());
  CHECK(evaluate(builtin_pack(PackLevel::P3), c, BudgetState{}).outcome == Outcome::Allow);
}

TEST_CASE("eleventh shell call within a minute is rate limited", "[engine]") {
  const PolicyPack p3 = builtin_pack(PackLevel::P3);
  BudgetState s;
  s.now_ms = 30000;
  for (int i = 0; i < 10; ++i) s.admitted_at["shell.exec"].push_back(1000 * i);
  const ToolCall c = make_call("shell.exec", {{"cmd", "make"}});
  const Decision d = evaluate(p3, c, s);
  CHECK(d.outcome == Outcome::Deny);
  CHECK(d.stage == BlockStage::Budget);
  CHECK(contains(d.rationale, "shell_safety rate_limit"));
  CHECK(d.fix_hint == "Adjust budget or call rate.");

  s.admitted_at["shell.exec"].pop_back();
  CHECK(evaluate(p3, c, s).outcome == Outcome::Allow);
  s.admitted_at["shell.exec"].push_back(9000);
  s.now_ms = 61000;  // the call at t=0 and t=1000 have aged out
  CHECK(evaluate(p3, c, s).outcome == Outcome::Allow);
}

TEST_CASE("schema validation rejects out-of-range timeouts", "[engine]") {
  const PolicyPack p1 = builtin_pack(PackLevel::P1);
  for (const Json& v : {Json(-1), Json("fast"), Json(999999999)}) {
    const Decision d = evaluate(p1, make_call("http.get", {{"url", "https://api.example.com/x"}, {"timeout_ms", v}}), BudgetState{});
    CHECK(d.outcome == Outcome::Deny);
    CHECK(d.stage == BlockStage::Schema);
    CHECK(d.fix_hint.find("timeout_ms") != std::string::npos);
  }
  CHECK(evaluate(p1, make_call("http.get", {{"url", "https://api.example.com/x"}, {"timeout_ms", 500}}), BudgetState{}).outcome ==
        Outcome::Allow);
  CHECK(evaluate(builtin_pack(PackLevel::P0), make_call("http.get", {{"url", "x"}, {"timeout_ms", -1}}), BudgetState{}).outcome ==
        Outcome::Allow);
}

TEST_CASE("run budgets apply once the pack declares one", "[engine]") {
  ToolCall c = make_call("fs.read", {{"path", "repo/a"}});
  c.budget.max_calls = 40;
  c.budget.max_cost = 120;
  c.budget.deadline_ms = 60000;
  BudgetState s;
  s.calls_made = 40;
  CHECK(evaluate(builtin_pack(PackLevel::P2), c, s).outcome == Outcome::Allow);
  const Decision d = evaluate(builtin_pack(PackLevel::P3), c, s);
  CHECK(d.outcome == Outcome::Deny);
  CHECK(d.stage == BlockStage::Budget);
  s.calls_made = 10;
  s.cost_spent = 120;
  CHECK(evaluate(builtin_pack(PackLevel::P3), c, s).stage == BlockStage::Budget);
  s.cost_spent = 0;
  s.now_ms = 60000;
  CHECK(evaluate(builtin_pack(PackLevel::P3), c, s).stage == BlockStage::Budget);
}

TEST_CASE("risk score arithmetic", "[engine][risk]") {
  const PolicyPack pack = builtin_pack(PackLevel::P4);
  const double outside_delete = risk_score(make_call("fs.delete", {{"path", "tmp/x"}, {"recursive", true}}), pack);
  CHECK(std::abs(outside_delete - (0.5 * 0.9 + 0.3 * 0.8 + 0.2 * 1.0)) < 1e-12);
  CHECK(std::abs(outside_delete - 0.89) < 1e-12);
  CHECK(outside_delete >= pack.risk.threshold);

  const double read = risk_score(make_call("fs.read", {{"path", "repo/src/main.c"}}), pack);
  CHECK(std::abs(read - 0.05) < 1e-12);

  PolicyPack zero = pack;
  zero.risk.w_tool = zero.risk.w_args = zero.risk.w_context = 0;
  Rng rng(3);
  for (int i = 0; i < 300; ++i) CHECK(risk_score(test_support::random_call(rng), zero) == 0.0);

  CHECK(risk_score(make_call("db.drop", {}), pack) >= 0.5);
  CHECK(std::abs(risk_score(make_call("shell.exec", {{"cmd", "rm -rf build"}}), pack) - 0.7) < 1e-12);
  CHECK(std::abs(risk_score(make_call("http.get", {{"url", "https://uploads.example.net/c"}}), pack) - 0.4) < 1e-12);
}

TEST_CASE("risk score is bounded and monotone in each weight", "[engine][risk]") {
  Rng rng(11);
  const PolicyPack base = builtin_pack(PackLevel::P4);
  for (int i = 0; i < 1000; ++i) {
    const ToolCall c = test_support::random_call(rng);
    PolicyPack a = base;
    a.risk.w_tool = rng.uniform();
    a.risk.w_args = rng.uniform();
    a.risk.w_context = rng.uniform();
    const double r = risk_score(c, a);
    REQUIRE(r >= 0.0);
    REQUIRE(r <= 1.0);
    for (double* w : {&a.risk.w_tool, &a.risk.w_args, &a.risk.w_context}) {
      PolicyPack b = a;
      double* wb = w == &a.risk.w_tool ? &b.risk.w_tool : w == &a.risk.w_args ? &b.risk.w_args : &b.risk.w_context;
      *wb += rng.uniform();
      REQUIRE(risk_score(c, b) >= r);
    }
  }
}

TEST_CASE("evaluation is deterministic", "[engine][property]") {
  Rng rng(21);
  std::vector<PolicyPack> packs;
  for (PackLevel l : kBuiltinLevels) packs.push_back(builtin_pack(l));
  for (int i = 0; i < 1000; ++i) {
    const ToolCall c = test_support::random_call(rng);
    const BudgetState s = test_support::random_state(rng);
    for (const auto& p : packs) REQUIRE(evaluate(p, c, s) == evaluate(p, c, s));
  }
}

TEST_CASE("outcome severity never weakens from P1 to P4", "[engine][property]") {
  Rng rng(42);
  std::vector<PolicyPack> packs;
  for (PackLevel l : kBuiltinLevels) packs.push_back(builtin_pack(l));
  for (int i = 0; i < 2000; ++i) {
    const ToolCall c = test_support::random_call(rng);
    const BudgetState s = test_support::random_state(rng);
    int prev = severity(evaluate(packs[1], c, s).outcome);
    for (int k = 2; k < 5; ++k) {
      const int cur = severity(evaluate(packs[k], c, s).outcome);
      INFO("tool=" << c.tool_name << " args=" << c.args.dump() << " k=" << k);
      REQUIRE(cur >= prev);
      prev = cur;
    }
  }
}

TEST_CASE("blocking decisions always explain themselves", "[engine][property]") {
  Rng rng(8);
  std::vector<PolicyPack> packs;
  for (PackLevel l : kBuiltinLevels) packs.push_back(builtin_pack(l));
  for (int i = 0; i < 1000; ++i) {
    const ToolCall c = test_support::random_call(rng);
    const BudgetState s = test_support::random_state(rng);
    for (const auto& p : packs) {
      const Decision d = evaluate(p, c, s);
      REQUIRE(d.risk_score >= 0.0);
      REQUIRE(d.risk_score <= 1.0);
      if (d.outcome == Outcome::Deny || d.outcome == Outcome::RequireApproval) {
        REQUIRE_FALSE(d.rationale.empty());
        REQUIRE_FALSE(d.fix_hint.empty());
        REQUIRE_FALSE(d.policy_ids.empty());
      }
      if (d.outcome == Outcome::Transform) REQUIRE_FALSE(d.transforms.empty());
    }
  }
}

TEST_CASE("explain renders rationale and hint", "[engine]") {
  Decision allow;
  allow.rationale = {"a", "b", "c"};
  CHECK(explain(allow) == "allowed; rules consulted: 3");

  Decision example;
  example.outcome = Outcome::RequireApproval;
  example.policy_ids = {"workspace_fs_safety"};
  example.rationale = {"fs.write allowed only under workspace_root", "overwrite requires approval for *.yaml"};
  example.fix_hint = "Use a path under workspace_root or request approval for overwrite.";
  example.risk_score = 0.71;
  const std::string text = explain(example);
  CHECK(text ==
        "REQUIRE_APPROVAL by workspace_fs_safety\n"
        "why:\n"
        "  - fs.write allowed only under workspace_root\n"
        "  - overwrite requires approval for *.yaml\n"
        "fix: Use a path under workspace_root or request approval for overwrite.\n"
        "risk: 0.710000");

  // Two deny rules fire; both appear in policy order.
  const PolicyPack p3 = builtin_pack(PackLevel::P3);
  const Decision d = evaluate(p3, make_call("fs.delete", {{"path", "/repo/.git"}, {"recursive", true}}), BudgetState{});
  REQUIRE(d.outcome == Outcome::Deny);
  REQUIRE(d.policy_ids == std::vector<std::string>{"workspace_fs_safety", "repo_integrity"});
  const std::string e = explain(d);
  CHECK(e.find("workspace_fs_safety.deny_if matched") < e.find("repo_integrity.deny_if matched"));
  CHECK(explain(d) == explain(d));
}

TEST_CASE("sanitizers rewrite containable paths only", "[engine]") {
  const PolicyPack p4 = builtin_pack(PackLevel::P4);
  const ToolCall messy = make_call("fs.read", {{"path", "repo/./src//main.c"}});
  CHECK(apply_sanitizers(p4, messy).args["path"] == "repo/src/main.c");
  const Decision d = evaluate(p4, messy, BudgetState{});
  CHECK(d.outcome == Outcome::Transform);
  CHECK(d.transforms.front().kind == "sanitize_arg");
  const ToolCall escape = make_call("fs.read", {{"path", "etc/passwd"}});
  CHECK(apply_sanitizers(p4, escape).args == escape.args);

  const PolicyPack strip = parse_pack(R"(policy "q" {
  tool: "http.get"
  sanitize: [strip_secret_query]
})");
  CHECK(apply_sanitizers(strip, make_call("http.get", {{"url", "https://a.b/c?page=1&token=xyz"}})).args["url"] ==
        "https://a.b/c?page=1");
}

TEST_CASE("default deny in scope", "[engine]") {
  const PolicyPack p3 = builtin_pack(PackLevel::P3);
  const Decision d = evaluate(p3, make_call("http.get", {{"url", "https://uploads.example.net/collect"}}), BudgetState{});
  CHECK(d.outcome == Outcome::Deny);
  CHECK(d.stage == BlockStage::DefaultDeny);
  CHECK(evaluate(p3, make_call("http.get", {{"url", "https://api.example.com/v1/x"}}), BudgetState{}).outcome == Outcome::Allow);
  CHECK(evaluate(p3, make_call("fs.read", {{"path", "./repo/a"}}), BudgetState{}).stage == BlockStage::DefaultDeny);
}
