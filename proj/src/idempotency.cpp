#include "toolgate/idempotency.hpp"

#include "toolgate/digest.hpp"

namespace toolgate {

std::string idempotency_key(const ToolCall& call, const std::vector<std::string>& key_fields) {
  Json material = Json::object();
  material["tool"] = call.tool_name;
  material["trace_id"] = call.metadata.trace_id;
  material["step_id"] = call.metadata.step_id;
  Json fields = Json::object();
  for (const auto& f : key_fields) {
    if (const auto it = call.args.find(f); it != call.args.end()) fields[f] = *it;
  }
  material["fields"] = std::move(fields);
  return sha256_hex(canonical_dump(material));
}

ToolOutput output_from_json(const Json& j) {
  ToolOutput out;
  out.status = j.value("status", std::string("success")) == "success" ? OutputStatus::Success : OutputStatus::Error;
  out.error = j.value("error", std::string());
  out.payload = j.contains("payload") ? j.at("payload") : Json();
  if (const auto e = j.find("side_effects"); e != j.end()) {
    for (const auto& ej : *e) {
      out.side_effects.push_back(
          {ej.value("kind", std::string()), ej.value("target", std::string()), ej.value("unsafe", std::string())});
    }
  }
  out.cost_charged = j.value("cost_charged", std::int64_t{0});
  out.latency_ms = j.value("latency_ms", std::int64_t{0});
  return out;
}

std::optional<ToolOutput> idempotency_guard(const ToolCall& call, const SimulatedEnvironment& env,
                                            const RecoveryConfig& config) {
  if (!config.idempotency) return std::nullopt;
  const auto it = env.kv.find(kLedgerPrefix + idempotency_key(call, config.key_fields));
  if (it == env.kv.end()) return std::nullopt;
  return output_from_json(it->second);
}

void record_commit(const ToolCall& call, SimulatedEnvironment& env, const RecoveryConfig& config,
                   const ToolOutput& output) {
  if (!config.idempotency || !output.ok()) return;
  env.kv[kLedgerPrefix + idempotency_key(call, config.key_fields)] = output_to_json(output);
}

ToolOutput IdempotentExecutor::execute(const ToolCall& call, SimulatedEnvironment& env, int attempt) {
  const ToolManifest* m = registry_.find(call.tool_name);
  const bool guarded = m && (m->side_effect == SideEffect::Write || m->side_effect == SideEffect::Delete);
  if (!guarded) return inner_.execute(call, env, attempt);
  const RecoveryConfig& cfg = pack_.recovery_for(m->category);
  if (auto prior = idempotency_guard(call, env, cfg)) {
    ++replays_;
    // Nothing runs: no new effects, no charge.
    prior->side_effects.clear();
    prior->cost_charged = 0;
    prior->latency_ms = 1;
    return *prior;
  }
  ToolOutput out = inner_.execute(call, env, attempt);
  record_commit(call, env, cfg, out);
  return out;
}

}  // namespace toolgate
