#include "toolgate/runner.hpp"

#include "toolgate/builtin_packs.hpp"
#include "toolgate/digest.hpp"
#include "toolgate/idempotency.hpp"
#include "toolgate/pipeline.hpp"
#include "toolgate/redaction.hpp"
#include "toolgate/report.hpp"
#include "toolgate/rng.hpp"

#include <yaml-cpp/yaml.h>

#include <map>

namespace toolgate {

namespace {

int line_of(const YAML::Node& node) { return node.Mark().line >= 0 ? node.Mark().line + 1 : 0; }

template <typename T>
std::vector<T> list_of(const YAML::Node& node, const char* key) {
  if (!node.IsSequence()) throw ConfigError(std::string("'") + key + "' must be a list", line_of(node));
  std::vector<T> out;
  for (const auto& item : node) {
    try {
      out.push_back(item.as<T>());
    } catch (const YAML::BadConversion&) {
      throw ConfigError(std::string("bad entry in '") + key + "'", line_of(item));
    }
  }
  return out;
}

std::string load_referenced(const YAML::Node& node, const std::filesystem::path& base_dir) {
  const auto rel = node.as<std::string>();
  const std::filesystem::path p = std::filesystem::path(rel).is_absolute() ? std::filesystem::path(rel) : base_dir / rel;
  try {
    return read_file(p);
  } catch (const std::exception& e) {
    throw ConfigError(e.what(), line_of(node));
  }
}

Json detector_snapshot() {
  Json d = Json::array();
  for (const auto& p : harness_detector()) d.push_back(Json{{"id", p.id}, {"pattern", p.source}});
  return d;
}

Json fault_profile_snapshot(const FaultProfile& p) {
  Json j = Json::object();
  j["name"] = p.name;
  j["seed"] = p.seed;
  for (FaultKind k : kFaultPriority) j[std::string(probability_key(k))] = p.rates[k];
  Json o = Json::object();
  for (const auto& [tool, m] : p.tool_overrides) {
    Json t = Json::object();
    for (const auto& [k, v] : m) t[std::string(probability_key(k))] = v;
    o[tool] = std::move(t);
  }
  j["tool_overrides"] = std::move(o);
  j["timeout_ms"] = p.default_timeout_ms;
  j["rate_limit_window_ms"] = p.rate_limit_window_ms;
  j["timeout_effect_p"] = p.timeout_effect_p;
  return j;
}

}  // namespace

std::string default_matrix_config_yaml() {
  return R"(matrix:
  packs: [P0, P1, P2, P3, P4]
  fault_profiles: [none, mild, harsh]
  seeds: [1, 2, 3]
  suites: [A, B, C, D, E]
  traces_per_suite: 15
  steps_per_trace: 30
  approver:
    mode: probabilistic
    p: 0.5
    delay_ms: 500
)";
}

MatrixConfig parse_matrix_config(std::string_view yaml_text, const std::filesystem::path& base_dir) {
  YAML::Node doc;
  try {
    doc = YAML::Load(std::string(yaml_text));
  } catch (const YAML::ParserException& e) {
    throw ConfigError(e.msg, e.mark.line + 1);
  }
  const YAML::Node root = doc["matrix"];
  if (!root || !root.IsMap()) throw ConfigError("missing 'matrix' mapping");
  MatrixConfig cfg;
  for (const auto& kv : root) {
    const auto key = kv.first.as<std::string>();
    const YAML::Node& v = kv.second;
    if (key == "packs") {
      cfg.packs.clear();
      for (const auto& name : list_of<std::string>(v, "packs")) {
        const auto level = parse_level(name);
        if (!level || *level == PackLevel::Custom) throw ConfigError("unknown pack '" + name + "'", line_of(v));
        cfg.packs.push_back(*level);
      }
    } else if (key == "fault_profiles") {
      cfg.fault_profiles = list_of<std::string>(v, "fault_profiles");
    } else if (key == "seeds") {
      cfg.seeds = list_of<std::uint64_t>(v, "seeds");
    } else if (key == "suites") {
      cfg.suites.clear();
      for (const auto& name : list_of<std::string>(v, "suites")) {
        const auto s = parse_suite(name);
        if (!s) throw ConfigError("unknown suite '" + name + "'", line_of(v));
        cfg.suites.push_back(*s);
      }
    } else if (key == "traces_per_suite") {
      cfg.gen.traces = v.as<int>();
    } else if (key == "steps_per_trace") {
      cfg.gen.steps = v.as<int>();
    } else if (key == "approver") {
      if (const YAML::Node m = v["mode"]) {
        const auto mode = parse_approver_mode(m.as<std::string>());
        if (!mode || *mode == ApproverMode::Scripted) {
          throw ConfigError("unsupported approver mode '" + m.as<std::string>() + "'", line_of(m));
        }
        cfg.approver.mode = *mode;
      }
      if (const YAML::Node p = v["p"]) cfg.approver.p = p.as<double>();
      if (const YAML::Node d = v["delay_ms"]) cfg.approver.delay_ms = d.as<std::int64_t>();
      if (!(cfg.approver.p >= 0.0 && cfg.approver.p <= 1.0)) throw ConfigError("approver p must be in [0, 1]", line_of(v));
    } else if (key == "misuse_config") {
      cfg.misuse_yaml = load_referenced(v, base_dir);
    } else if (key == "fault_config") {
      cfg.fault_yaml = load_referenced(v, base_dir);
    } else if (key == "measure_overhead") {
      cfg.measure_overhead = v.as<bool>();
    } else {
      throw ConfigError("unknown matrix field '" + key + "'", line_of(kv.first));
    }
  }
  if (cfg.gen.traces < 0 || cfg.gen.steps < 0) throw ConfigError("trace counts must be non-negative");
  // Fail early on broken injector configs.
  validate_misuse_config(parse_misuse_config(cfg.misuse_yaml), default_registry());
  const FaultConfig faults = parse_fault_config(cfg.fault_yaml);
  for (const auto& name : cfg.fault_profiles) faults.profile(name);
  return cfg;
}

RunKey CellSpec::key() const {
  return {std::string(to_string(suite)), std::string(to_string(pack)), fault_profile, seed};
}

std::uint64_t fault_seed(std::uint64_t config_seed, std::uint64_t run_seed) {
  return StreamKey(config_seed).add(std::string_view("faults")).add(static_cast<std::int64_t>(run_seed)).value();
}

Approver make_approver(const ApproverConfig& config, std::uint64_t run_seed) {
  switch (config.mode) {
    case ApproverMode::AlwaysApprove: return Approver::always_approve(config.delay_ms);
    case ApproverMode::AlwaysReject: return Approver::always_reject(config.delay_ms);
    default: break;
  }
  const std::uint64_t seed = StreamKey(run_seed).add(std::string_view("approver")).value();
  return Approver::probabilistic(config.p, seed, config.delay_ms);
}

CellOutput run_cell(const CellSpec& cell, const SuiteCorpus& corpus, const MatrixConfig& config) {
  const Registry& registry = default_registry();
  const std::string& pack_text = builtin_pack_text(cell.pack);
  const PolicyPack pack = builtin_pack(cell.pack);
  const MisuseConfig misuse = parse_misuse_config(config.misuse_yaml);
  const FaultConfig fault_config = parse_fault_config(config.fault_yaml);
  FaultProfile profile = fault_config.profile(cell.fault_profile);
  profile.seed = fault_seed(fault_config.seed, cell.seed);

  const MisuseResult injected = inject_misuse(corpus.trace, misuse, registry);
  std::map<std::pair<std::string, std::int64_t>, const MutationRecord*> mutation_at;
  for (const auto& m : injected.log) mutation_at[{m.trace_id, m.step_id}] = &m;

  MetricsAccumulator metrics(cell.key());
  metrics.set_leakage(measure_leakage(injected.trace, corpus.env, registry));

  std::vector<DecisionRecord> decisions;
  std::vector<FaultEventRecord> fault_log;
  Approver approver = make_approver(config.approver, cell.seed);
  EnforcerOptions options;
  options.seed = cell.seed;
  options.measure_overhead = config.measure_overhead;

  for (const auto& steps : split_traces(injected.trace)) {
    SimulatedEnvironment env = corpus.env;
    BudgetState state;
    BaseExecutor base(registry);
    IdempotentExecutor idempotent(base, registry, pack);
    FaultInjectingExecutor faulty(idempotent, registry, profile, fault_log);
    Enforcer enforcer(pack, registry, faulty, approver, options);
    metrics.begin_trace(steps);
    for (const auto& step : steps) {
      StepResult r = enforcer.enforce(step.to_call(), state, env);
      const auto it = mutation_at.find({step.trace_id, step.step_id});
      metrics.observe(step, r.record, it == mutation_at.end() ? nullptr : it->second);
      decisions.push_back(std::move(r.record));
    }
    metrics.end_trace();
  }

  CellOutput out;
  out.trace = serialize_trace(injected.trace);
  out.decisions = serialize_decision_log(decisions);
  out.faults = serialize_lines(fault_log, fault_event_to_json);
  out.mutations = serialize_lines(injected.log, mutation_record_to_json);
  metrics.set_log_volume(
      static_cast<std::int64_t>(out.decisions.size() + out.faults.size() + out.mutations.size()));
  out.result = metrics.finish();

  const std::string result_bytes = canonical_dump(run_result_to_json(out.result)) + "\n";
  Json m = Json::object();
  m["run"] = cell.key().id();
  m["key"] = Json{{"suite", std::string(to_string(cell.suite))},
                  {"pack", std::string(to_string(cell.pack))},
                  {"fault_profile", cell.fault_profile},
                  {"seed", cell.seed}};
  m["inputs"] = Json{{"corpus_trace", sha256_hex(serialize_trace(corpus.trace))},
                     {"corpus_env", sha256_hex(canonical_dump(corpus.env.to_json(true)))},
                     {"pack", sha256_hex(pack_text)},
                     {"misuse_config", sha256_hex(config.misuse_yaml)},
                     {"fault_config", sha256_hex(config.fault_yaml)}};
  m["outputs"] = Json{{"trace.jsonl", sha256_hex(out.trace)},
                      {"decisions.jsonl", sha256_hex(out.decisions)},
                      {"faults.jsonl", sha256_hex(out.faults)},
                      {"mutations.jsonl", sha256_hex(out.mutations)},
                      {"result.json", sha256_hex(result_bytes)}};
  m["tool_versions"] = Json{{"toolgate", kToolVersion}, {"compiler", __VERSION__}};
  m["parameters"] = Json{{"pack", pack_parameters(pack)},
                         {"detector", detector_snapshot()},
                         {"fault_profile", fault_profile_snapshot(profile)},
                         {"misuse", Json{{"rate", misuse.rate}, {"seed", misuse.seed}}},
                         {"approver", Json{{"mode", std::string(to_string(approver.mode()))},
                                           {"p", approver.probability()},
                                           {"delay_ms", approver.delay_ms()}}},
                         {"measure_overhead", config.measure_overhead},
                         {"traces", config.gen.traces},
                         {"steps_per_trace", config.gen.steps}};
  m["status"] = "complete";
  out.manifest = std::move(m);
  return out;
}

void write_cell(const CellOutput& output, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file(dir / "trace.jsonl", output.trace);
  write_file(dir / "decisions.jsonl", output.decisions);
  write_file(dir / "faults.jsonl", output.faults);
  write_file(dir / "mutations.jsonl", output.mutations);
  write_file(dir / "result.json", canonical_dump(run_result_to_json(output.result)) + "\n");
  write_file(dir / "manifest.json", canonical_dump(output.manifest) + "\n");
}

std::string manifest_digest(const Json& manifest) { return sha256_hex(canonical_dump(manifest)); }

std::vector<CellSpec> matrix_cells(const MatrixConfig& config) {
  std::vector<CellSpec> cells;
  for (Suite s : config.suites) {
    for (std::uint64_t seed : config.seeds) {
      for (const auto& profile : config.fault_profiles) {
        for (PackLevel p : config.packs) cells.push_back({s, p, profile, seed});
      }
    }
  }
  return cells;
}

MatrixRun run_matrix(const MatrixConfig& config, const std::filesystem::path& out_dir,
                     const std::function<void(const CellSpec&, std::size_t, std::size_t)>& progress) {
  MatrixRun run;
  const auto cells = matrix_cells(config);
  std::map<std::pair<Suite, std::uint64_t>, SuiteCorpus> corpora;
  std::string results_lines;
  Json index = Json::array();
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const CellSpec& cell = cells[i];
    if (progress) progress(cell, i, cells.size());
    auto it = corpora.find({cell.suite, cell.seed});
    if (it == corpora.end()) {
      it = corpora.emplace(std::make_pair(cell.suite, cell.seed), generate_suite(cell.suite, cell.seed, config.gen)).first;
      if (!out_dir.empty()) {
        write_corpus(it->second, out_dir / "corpora" / (std::string(to_string(cell.suite)) + "_s" + std::to_string(cell.seed)));
      }
    }
    CellOutput out;
    try {
      out = run_cell(cell, it->second, config);
    } catch (const std::exception& e) {
      if (!out_dir.empty()) {
        Json partial = Json{{"run", cell.key().id()}, {"status", "failed"}, {"error", e.what()}};
        write_file(out_dir / "runs" / cell.key().id() / "manifest.json", canonical_dump(partial) + "\n");
      }
      throw std::runtime_error("cell " + cell.key().id() + " failed: " + e.what());
    }
    const std::string digest = manifest_digest(out.manifest);
    if (!out_dir.empty()) write_cell(out, out_dir / "runs" / cell.key().id());
    results_lines += canonical_dump(run_result_to_json(out.result)) + "\n";
    index.push_back(Json{{"run", cell.key().id()}, {"manifest_sha256", digest}});
    run.results.push_back(std::move(out.result));
    run.manifest_digests.push_back(digest);
  }
  if (!out_dir.empty()) {
    write_file(out_dir / "results.jsonl", results_lines);
    // Tables come from the stored results so `report --runs` reproduces them.
    const Report report = build_report(load_results(out_dir));
    write_file(out_dir / "table1.csv", table1_csv(report));
    write_file(out_dir / "table2.csv", table2_csv(report));
    write_file(out_dir / "report.json", canonical_dump(report_to_json(report)) + "\n");
    Json manifest = Json::object();
    manifest["tool_versions"] = Json{{"toolgate", kToolVersion}, {"compiler", __VERSION__}};
    manifest["cells"] = std::move(index);
    manifest["results_sha256"] = sha256_hex(results_lines);
    manifest["report_sha256"] = sha256_hex(canonical_dump(report_to_json(report)) + "\n");
    write_file(out_dir / "manifest.json", canonical_dump(manifest) + "\n");
  }
  return run;
}

}  // namespace toolgate
