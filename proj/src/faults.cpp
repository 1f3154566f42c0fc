#include "toolgate/faults.hpp"

#include "toolgate/rng.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>

namespace toolgate {

namespace {

int line_of(const YAML::Node& node) { return node.Mark().line >= 0 ? node.Mark().line + 1 : 0; }

double probability(const YAML::Node& node, const std::string& key) {
  double v = 0.0;
  try {
    v = node.as<double>();
  } catch (const YAML::BadConversion&) {
    throw ConfigError("'" + key + "' must be a number", line_of(node));
  }
  if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("'" + key + "' must be in [0, 1]", line_of(node));
  return v;
}

std::int64_t tool_timeout_ms(const ToolCall& call, std::int64_t fallback) {
  const Json* t = find_arg(call, "timeout_ms");
  if (t && t->is_number_integer() && t->get<std::int64_t>() > 0) return t->get<std::int64_t>();
  return fallback;
}

}  // namespace

std::string_view to_string(FaultKind kind) {
  switch (kind) {
    case FaultKind::RateLimit: return "rate_limit";
    case FaultKind::Timeout: return "timeout";
    case FaultKind::Transient: return "transient";
    case FaultKind::CorruptOutput: return "corrupt_output";
    case FaultKind::PartialWrite: return "partial_write";
    case FaultKind::Nondeterminism: return "nondeterminism";
  }
  return "transient";
}

std::string_view probability_key(FaultKind kind) {
  switch (kind) {
    case FaultKind::RateLimit: return "rate_limit_p";
    case FaultKind::Timeout: return "timeout_p";
    case FaultKind::Transient: return "transient_p";
    case FaultKind::CorruptOutput: return "corrupt_output_p";
    case FaultKind::PartialWrite: return "partial_write_p";
    case FaultKind::Nondeterminism: return "nondeterminism_p";
  }
  return "transient_p";
}

std::optional<FaultKind> parse_probability_key(std::string_view key) {
  for (FaultKind k : kFaultPriority) {
    if (key == probability_key(k)) return k;
  }
  return std::nullopt;
}

double FaultRates::total() const {
  double s = 0.0;
  for (double v : p) s += v;
  return s;
}

FaultRates FaultProfile::rates_for(const std::string& tool) const {
  FaultRates r = rates;
  if (const auto it = tool_overrides.find(tool); it != tool_overrides.end()) {
    for (const auto& [k, v] : it->second) r[k] = v;
  }
  return r;
}

bool FaultProfile::active() const {
  if (rates.total() > 0.0) return true;
  for (const auto& [tool, o] : tool_overrides) {
    for (const auto& [k, v] : o) {
      if (v > 0.0) return true;
    }
  }
  return false;
}

FaultProfile FaultConfig::profile(std::string_view name) const {
  for (const auto& p : profiles) {
    if (p.name == name) return p;
  }
  if (name == "none") {
    FaultProfile none;
    none.seed = seed;
    return none;
  }
  throw ConfigError("unknown fault profile '" + std::string(name) + "'");
}

std::vector<std::string> FaultConfig::names() const {
  std::vector<std::string> out{"none"};
  for (const auto& p : profiles) {
    if (p.name != "none") out.push_back(p.name);
  }
  return out;
}

FaultConfig parse_fault_config(std::string_view yaml_text) {
  YAML::Node doc;
  try {
    doc = YAML::Load(std::string(yaml_text));
  } catch (const YAML::ParserException& e) {
    throw ConfigError(e.msg, e.mark.line + 1);
  }
  const YAML::Node root = doc["fault_injection"];
  if (!root || !root.IsMap()) throw ConfigError("missing 'fault_injection' mapping");
  FaultConfig cfg;
  if (const YAML::Node s = root["seed"]) {
    try {
      cfg.seed = s.as<std::uint64_t>();
    } catch (const YAML::BadConversion&) {
      throw ConfigError("'seed' must be a non-negative integer", line_of(s));
    }
  }
  std::map<std::string, std::map<FaultKind, double>> overrides;
  if (const YAML::Node o = root["tool_overrides"]) {
    if (!o.IsMap()) throw ConfigError("'tool_overrides' must be a mapping", line_of(o));
    for (const auto& entry : o) {
      const auto tool = entry.first.as<std::string>();
      if (!entry.second.IsMap()) throw ConfigError("overrides for '" + tool + "' must be a mapping", line_of(entry.second));
      for (const auto& kv : entry.second) {
        const auto key = kv.first.as<std::string>();
        const auto kind = parse_probability_key(key);
        if (!kind) throw ConfigError("unknown fault probability '" + key + "'", line_of(kv.first));
        overrides[tool][*kind] = probability(kv.second, key);
      }
    }
  }
  const YAML::Node profiles = root["profiles"];
  if (profiles && !profiles.IsSequence()) throw ConfigError("'profiles' must be a list", line_of(profiles));
  for (const auto& node : profiles) {
    if (!node.IsMap()) throw ConfigError("profile must be a mapping", line_of(node));
    FaultProfile p;
    p.seed = cfg.seed;
    p.tool_overrides = overrides;
    bool named = false;
    for (const auto& kv : node) {
      const auto key = kv.first.as<std::string>();
      if (key == "name") {
        p.name = kv.second.as<std::string>();
        named = true;
      } else if (key == "timeout_ms") {
        p.default_timeout_ms = kv.second.as<std::int64_t>();
      } else if (key == "rate_limit_window_ms") {
        p.rate_limit_window_ms = kv.second.as<std::int64_t>();
      } else if (const auto kind = parse_probability_key(key)) {
        p.rates[*kind] = probability(kv.second, key);
      } else {
        throw ConfigError("unknown profile field '" + key + "'", line_of(kv.first));
      }
    }
    if (!named) throw ConfigError("profile without a name", line_of(node));
    for (const auto& existing : cfg.profiles) {
      if (existing.name == p.name) throw ConfigError("duplicate profile '" + p.name + "'", line_of(node));
    }
    if (p.rates.total() > 1.0 + 1e-12) throw ConfigError("probabilities of '" + p.name + "' sum above 1", line_of(node));
    for (const auto& [tool, o] : overrides) {
      if (p.rates_for(tool).total() > 1.0 + 1e-12) {
        throw ConfigError("probabilities of '" + p.name + "' for '" + tool + "' sum above 1", line_of(node));
      }
    }
    cfg.profiles.push_back(std::move(p));
  }
  return cfg;
}

std::string default_fault_config_yaml() {
  return R"(fault_injection:
  seed: 2026
  profiles:
    - name: mild
      timeout_p: 0.03
      transient_p: 0.05
      rate_limit_p: 0.01
      corrupt_output_p: 0.02
      partial_write_p: 0.01
    - name: harsh
      timeout_p: 0.10
      transient_p: 0.15
      rate_limit_p: 0.05
      corrupt_output_p: 0.08
      partial_write_p: 0.05
  tool_overrides:
    shell.exec:
      timeout_p: 0.12
      transient_p: 0.08
)";
}

FaultConfig default_fault_config() { return parse_fault_config(default_fault_config_yaml()); }

std::optional<FaultKind> select_fault(const FaultRates& rates, double u, bool partial_write_applies) {
  double edge = 0.0;
  for (FaultKind k : kFaultPriority) {
    edge += rates[k];
    if (u < edge) {
      if (k == FaultKind::PartialWrite && !partial_write_applies) return std::nullopt;
      return k;
    }
  }
  return std::nullopt;
}

void FaultInjectingExecutor::record(const ToolCall& call, FaultKind kind, Json parameters) {
  log_.push_back({call.metadata.trace_id, call.metadata.step_id, std::string(to_string(kind)), true,
                  std::move(parameters)});
}

ToolOutput FaultInjectingExecutor::execute(const ToolCall& call, SimulatedEnvironment& env, int attempt) {
  if (!profile_.active()) return inner_.execute(call, env, attempt);
  const ToolManifest* m = registry_.find(call.tool_name);
  const std::string category = m ? std::string(to_string(m->category)) : call.tool_name;
  const std::int64_t cost = m ? m->cost : 0;
  const std::int64_t base = base_latency_ms(call.tool_name);

  Json params = Json::object();
  params["tool"] = call.tool_name;
  params["attempt"] = attempt;

  if (const auto it = window_until_.find(category); it != window_until_.end() && env.clock_ms < it->second) {
    params["window_until_ms"] = it->second;
    record(call, FaultKind::RateLimit, std::move(params));
    ToolOutput out = make_error("rate_limited");
    out.latency_ms = profile_.rate_limit_latency_ms;
    return out;
  }

  Rng rng = make_stream(profile_.seed, std::string_view(call.metadata.trace_id), call.metadata.step_id,
                        static_cast<std::int64_t>(attempt));
  const FaultRates rates = profile_.rates_for(call.tool_name);
  const double u = rng.uniform();
  const auto fault = select_fault(rates, u, call.tool_name == "fs.write");
  if (!fault) return inner_.execute(call, env, attempt);
  params["p"] = rates[*fault];

  switch (*fault) {
    case FaultKind::RateLimit: {
      window_until_[category] = env.clock_ms + profile_.rate_limit_window_ms;
      params["window_ms"] = profile_.rate_limit_window_ms;
      record(call, *fault, std::move(params));
      ToolOutput out = make_error("rate_limited");
      out.latency_ms = profile_.rate_limit_latency_ms;
      return out;
    }
    case FaultKind::Timeout: {
      const std::int64_t duration = tool_timeout_ms(call, profile_.default_timeout_ms);
      const bool writes = m && (m->side_effect == SideEffect::Write || m->side_effect == SideEffect::Delete);
      const bool landed = writes && rng.uniform() < profile_.timeout_effect_p;
      ToolOutput out = make_error("timeout");
      if (landed) {
        ToolOutput effect = inner_.execute(call, env, attempt);
        out.side_effects = std::move(effect.side_effects);
        out.cost_charged = effect.cost_charged;
      } else {
        out.cost_charged = cost;
      }
      out.latency_ms = duration;
      params["duration_ms"] = duration;
      params["effect_landed"] = landed;
      record(call, *fault, std::move(params));
      return out;
    }
    case FaultKind::Transient: {
      record(call, *fault, std::move(params));
      ToolOutput out = make_error("transient");
      out.cost_charged = cost;
      out.latency_ms = base;
      return out;
    }
    case FaultKind::CorruptOutput: {
      ToolOutput inner = inner_.execute(call, env, attempt);
      const std::string text = inner.payload.is_string() ? inner.payload.get<std::string>() : inner.payload.dump();
      const std::size_t keep = text.size() / 2;
      params["truncated_to"] = keep;
      record(call, *fault, std::move(params));
      ToolOutput out = make_error("corrupt_output", Json(text.substr(0, keep)));
      out.side_effects = std::move(inner.side_effects);
      out.cost_charged = inner.cost_charged;
      out.latency_ms = inner.latency_ms;
      return out;
    }
    case FaultKind::PartialWrite: {
      // Trial run on a copy: only a write that would have succeeded can tear.
      SimulatedEnvironment scratch = env;
      ToolOutput trial = inner_.execute(call, scratch, attempt);
      if (!trial.ok() || trial.side_effects.empty()) {
        env = std::move(scratch);
        return trial;
      }
      const double fraction = 0.1 + 0.8 * rng.uniform();
      apply_partial_write(call, env, fraction);
      params["fraction"] = fraction;
      record(call, *fault, std::move(params));
      ToolOutput out = make_error("partial_write");
      out.side_effects = std::move(trial.side_effects);
      out.cost_charged = trial.cost_charged;
      out.latency_ms = trial.latency_ms;
      return out;
    }
    case FaultKind::Nondeterminism: {
      ToolOutput out = inner_.execute(call, env, attempt);
      if (!out.ok()) return out;
      const std::uint64_t nonce = rng.next_u64() & 0xffffffULL;
      params["nonce"] = nonce;
      record(call, *fault, std::move(params));
      if (out.payload.is_object()) {
        out.payload["nonce"] = nonce;
      } else if (out.payload.is_string()) {
        out.payload = out.payload.get<std::string>() + " #" + std::to_string(nonce);
      } else {
        Json wrapped = Json::object();
        wrapped["value"] = out.payload;
        wrapped["nonce"] = nonce;
        out.payload = std::move(wrapped);
      }
      return out;
    }
  }
  return inner_.execute(call, env, attempt);
}

}  // namespace toolgate
