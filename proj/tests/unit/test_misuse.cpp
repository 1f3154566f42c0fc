#include <catch_amalgamated.hpp>

#include "toolgate/misuse.hpp"
#include "toolgate/suites.hpp"

using namespace toolgate;

namespace {

std::vector<TraceRecord> corpus() { return generate_suite(Suite::A, 1, GenOptions{10, 30}).trace; }

MisuseConfig with_rate(double rate) {
  MisuseConfig c = default_misuse_config();
  c.rate = rate;
  return c;
}

}  // namespace

TEST_CASE("default misuse config parses", "[misuse]") {
  const MisuseConfig c = default_misuse_config();
  CHECK(c.rate == 0.20);
  CHECK(c.seed == 1337);
  CHECK(c.mutations.size() == 6);
  CHECK_NOTHROW(validate_misuse_config(c, default_registry()));
}

TEST_CASE("misuse config errors", "[misuse]") {
  CHECK_THROWS_AS(parse_misuse_config("misuse_injection:\n  rate: 1.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_misuse_config("misuse_injection:\n  rate: 0.1\n  mutations:\n    - type: teleport\n      tools: [fs.read]\n"),
                  ConfigError);
  CHECK_THROWS_AS(parse_misuse_config("misuse_injection:\n  rate: 0.1\n  mutations:\n    - type: path_traversal\n"),
                  ConfigError);
  CHECK_THROWS_AS(parse_misuse_config("other: {}\n"), ConfigError);

  const MisuseConfig bad = parse_misuse_config(
      "misuse_injection:\n  rate: 0.1\n  mutations:\n    - type: path_traversal\n      tools: [fs.copy]\n      patterns: [\"../\"]\n");
  CHECK_THROWS_AS(validate_misuse_config(bad, default_registry()), ConfigError);
}

TEST_CASE("rate zero leaves the trace untouched", "[misuse]") {
  const auto trace = corpus();
  const MisuseResult r = inject_misuse(trace, with_rate(0.0));
  CHECK(r.trace == trace);
  CHECK(r.log.empty());
}

TEST_CASE("rate one mutates every eligible step", "[misuse]") {
  const auto trace = corpus();
  const MisuseResult r = inject_misuse(trace, with_rate(1.0));
  REQUIRE(r.trace.size() == trace.size());
  std::size_t eligible = 0;
  for (const auto& s : trace) {
    if (s.annotation("expected") == "fail") continue;
    for (const auto& m : default_misuse_config().mutations) {
      if (std::find(m.tools.begin(), m.tools.end(), s.tool) != m.tools.end()) {
        ++eligible;
        break;
      }
    }
  }
  CHECK(r.log.size() == eligible);
}

TEST_CASE("injection is deterministic and local to each step", "[misuse][property]") {
  const auto trace = corpus();
  const MisuseConfig cfg = default_misuse_config();
  const MisuseResult a = inject_misuse(trace, cfg);
  CHECK(a.log == inject_misuse(trace, cfg).log);
  CHECK_FALSE(a.log.empty());

  // Dropping one trace does not change the mutations of the others.
  std::vector<TraceRecord> rest;
  const std::string dropped = trace.front().trace_id;
  for (const auto& s : trace) {
    if (s.trace_id != dropped) rest.push_back(s);
  }
  std::vector<MutationRecord> expected;
  for (const auto& m : a.log) {
    if (m.trace_id != dropped) expected.push_back(m);
  }
  CHECK(inject_misuse(rest, cfg).log == expected);

  MisuseConfig other = cfg;
  other.seed = cfg.seed + 1;
  CHECK(inject_misuse(trace, other).log != a.log);
}

TEST_CASE("steps expected to fail are never mutated", "[misuse]") {
  auto trace = corpus();
  for (auto& s : trace) s.annotations = Json{{"expected", "fail"}};
  CHECK(inject_misuse(trace, with_rate(1.0)).log.empty());
}

TEST_CASE("mutation records describe the change", "[misuse]") {
  const MisuseResult r = inject_misuse(corpus(), with_rate(1.0));
  for (const auto& m : r.log) {
    const auto type = parse_mutation_type(m.type);
    REQUIRE(type);
    CHECK(m.is_unsafe == is_unsafe(*type));
    CHECK(m.taxonomy_class == taxonomy_class(*type));
    CHECK(m.original_fragment != m.mutated_fragment);
  }
  CHECK(is_unsafe(MutationType::PathTraversal));
  CHECK_FALSE(is_unsafe(MutationType::SchemaInvalid));
}

TEST_CASE("placeholders and secrets", "[misuse]") {
  CHECK(expand_placeholders("rm -rf ROOT", "repo") == "rm -rf /");
  CHECK(expand_placeholders("WORKSPACE/src", "repo") == "repo/src");
  const std::string s = make_secret("AKIA................", 42);
  CHECK(s.size() == 20);
  CHECK(s.rfind("AKIA", 0) == 0);
  CHECK(s.find('.') == std::string::npos);
  CHECK(make_secret("AKIA................", 42) == s);
  CHECK(make_secret("AKIA................", 43) != s);
}
