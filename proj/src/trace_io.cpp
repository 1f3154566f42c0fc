#include "toolgate/trace_io.hpp"

#include <fstream>
#include <map>
#include <sstream>

namespace toolgate {

namespace {

const char* const kTraceKeys[] = {"trace_id", "step_id", "ts", "tool", "args", "context", "budget", "annotations"};
// Reserved optional fields; accepted and not interpreted.
const char* const kIgnoredKeys[] = {"expected_output_hash", "depends_on"};

std::string require_string(const Json& j, const char* key, int line) {
  const auto it = j.find(key);
  if (it == j.end()) throw TraceError(std::string("missing required field '") + key + "'", line);
  if (!it->is_string()) throw TraceError(std::string("field '") + key + "' must be a string", line);
  return it->get<std::string>();
}

std::optional<std::int64_t> opt_int(const Json& j, const char* key, int line) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_number_integer()) throw TraceError(std::string("field '") + key + "' must be an integer", line);
  return it->get<std::int64_t>();
}

}  // namespace

ToolCall TraceRecord::to_call() const {
  ToolCall c;
  c.tool_name = tool;
  c.args = args;
  c.context = context;
  if (budget) c.budget = *budget;
  c.metadata.trace_id = trace_id;
  c.metadata.step_id = step_id;
  c.metadata.ts = ts;
  if (annotations.is_object()) {
    if (const auto it = annotations.find("planted_secret"); it != annotations.end() && it->is_string()) {
      c.metadata.planted_secret = it->get<std::string>();
    }
  }
  return c;
}

std::string TraceRecord::annotation(const char* key) const {
  if (!annotations.is_object()) return "";
  const auto it = annotations.find(key);
  return it != annotations.end() && it->is_string() ? it->get<std::string>() : "";
}

TraceRecord trace_record_from_json(const Json& j, int line) {
  if (!j.is_object()) throw TraceError("record must be a JSON object", line);
  TraceRecord r;
  r.trace_id = require_string(j, "trace_id", line);
  const auto step = j.find("step_id");
  if (step == j.end()) throw TraceError("missing required field 'step_id'", line);
  if (!step->is_number_integer()) throw TraceError("field 'step_id' must be an integer", line);
  r.step_id = step->get<std::int64_t>();
  if (const auto ts = j.find("ts"); ts != j.end()) {
    if (!ts->is_string()) throw TraceError("field 'ts' must be a string", line);
    r.ts = ts->get<std::string>();
  }
  r.tool = require_string(j, "tool", line);
  const auto args = j.find("args");
  if (args == j.end()) throw TraceError("missing required field 'args'", line);
  if (!args->is_object()) throw TraceError("field 'args' must be an object", line);
  r.args = *args;
  const auto ctx = j.find("context");
  if (ctx == j.end()) throw TraceError("missing required field 'context'", line);
  if (!ctx->is_object()) throw TraceError("field 'context' must be an object", line);
  r.context.workspace_root = require_string(*ctx, "workspace_root", line);
  if (const auto v = ctx->find("repo_state"); v != ctx->end() && v->is_string()) r.context.repo_state = v->get<std::string>();
  if (const auto v = ctx->find("env"); v != ctx->end() && v->is_string()) r.context.env = v->get<std::string>();
  if (const auto b = j.find("budget"); b != j.end() && !b->is_null()) {
    if (!b->is_object()) throw TraceError("field 'budget' must be an object", line);
    CallBudget budget;
    budget.max_calls = opt_int(*b, "max_calls", line);
    budget.max_cost = opt_int(*b, "max_cost", line);
    budget.deadline_ms = opt_int(*b, "deadline_ms", line);
    r.budget = budget;
  }
  if (const auto a = j.find("annotations"); a != j.end()) {
    if (!a->is_object() && !a->is_null()) throw TraceError("field 'annotations' must be an object", line);
    r.annotations = *a;
  }
  for (const auto& [k, v] : j.items()) {
    bool known = false;
    for (const char* key : kTraceKeys) known = known || k == key;
    if (!known) r.extra[k] = v;
  }
  return r;
}

Json trace_record_to_json(const TraceRecord& r) {
  Json j = Json::object();
  j["trace_id"] = r.trace_id;
  j["step_id"] = r.step_id;
  if (r.ts) j["ts"] = *r.ts;
  j["tool"] = r.tool;
  j["args"] = r.args;
  Json ctx = Json::object();
  ctx["workspace_root"] = r.context.workspace_root;
  if (r.context.repo_state) ctx["repo_state"] = *r.context.repo_state;
  if (r.context.env) ctx["env"] = *r.context.env;
  j["context"] = std::move(ctx);
  if (r.budget) {
    Json b = Json::object();
    if (r.budget->max_calls) b["max_calls"] = *r.budget->max_calls;
    if (r.budget->max_cost) b["max_cost"] = *r.budget->max_cost;
    if (r.budget->deadline_ms) b["deadline_ms"] = *r.budget->deadline_ms;
    j["budget"] = std::move(b);
  }
  if (!r.annotations.is_null()) j["annotations"] = r.annotations;
  for (const auto& [k, v] : r.extra.items()) j[k] = v;
  return j;
}

std::vector<Json> parse_jsonl(std::string_view text) {
  std::vector<Json> out;
  std::size_t start = 0;
  int line = 0;
  while (start < text.size()) {
    ++line;
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view row = text.substr(start, end - start);
    if (!row.empty() && row.back() == '\r') row.remove_suffix(1);
    start = end + 1;
    if (row.find_first_not_of(" \t") == std::string_view::npos) continue;
    Json j = Json::parse(row.begin(), row.end(), nullptr, false);
    if (j.is_discarded()) throw TraceError("malformed JSON", line);
    out.push_back(std::move(j));
  }
  return out;
}

std::vector<TraceRecord> parse_trace(std::string_view text) {
  std::vector<TraceRecord> out;
  std::map<std::string, std::int64_t> last_step;
  std::size_t start = 0;
  int line = 0;
  while (start < text.size()) {
    ++line;
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view row = text.substr(start, end - start);
    if (!row.empty() && row.back() == '\r') row.remove_suffix(1);
    start = end + 1;
    if (row.find_first_not_of(" \t") == std::string_view::npos) continue;
    const Json j = Json::parse(row.begin(), row.end(), nullptr, false);
    if (j.is_discarded()) throw TraceError("malformed JSON", line);
    TraceRecord r = trace_record_from_json(j, line);
    const auto it = last_step.find(r.trace_id);
    if (it != last_step.end() && r.step_id <= it->second) {
      throw TraceError("step_id " + std::to_string(r.step_id) + " is not increasing in trace '" + r.trace_id + "'", line);
    }
    last_step[r.trace_id] = r.step_id;
    out.push_back(std::move(r));
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::vector<TraceRecord> read_trace(const std::filesystem::path& path) { return parse_trace(read_file(path)); }

std::string serialize_trace(const std::vector<TraceRecord>& records) {
  return serialize_lines(records, trace_record_to_json);
}

void write_trace(const std::vector<TraceRecord>& records, const std::filesystem::path& path) {
  write_file(path, serialize_trace(records));
}

Json decision_record_to_json(const DecisionRecord& r) {
  Json j = Json::object();
  j["trace_id"] = r.trace_id;
  j["step_id"] = r.step_id;
  j["decision"] = std::string(to_string(r.decision.outcome));
  j["policy_ids"] = r.decision.policy_ids;
  j["rationale"] = r.decision.rationale;
  j["fix_hint"] = r.decision.fix_hint;
  j["risk_score"] = r.decision.risk_score;
  Json transforms = Json::array();
  for (const auto& t : r.decision.transforms) {
    Json tj = Json::object();
    tj["kind"] = t.kind;
    tj["detail"] = t.detail;
    transforms.push_back(std::move(tj));
  }
  j["transforms_applied"] = std::move(transforms);
  j["overhead_ms"] = r.decision.overhead_ms;
  if (r.approval) {
    Json a = Json::object();
    a["mode"] = r.approval->mode;
    a["verdict"] = r.approval->approved ? "approved" : "rejected";
    a["delay_ms"] = r.approval->delay_ms;
    j["approval"] = std::move(a);
  }
  if (r.outcome) {
    const OutcomeRecord& o = *r.outcome;
    Json oj = Json::object();
    oj["status"] = o.status;
    oj["error"] = o.error;
    oj["tool_error"] = o.tool_error;
    Json effects = Json::array();
    for (const auto& e : o.side_effects) effects.push_back(side_effect_to_json(e));
    oj["side_effects"] = std::move(effects);
    oj["executions"] = o.executions;
    oj["latency_ms"] = o.latency_ms;
    oj["cost"] = o.cost;
    Json red = Json::array();
    for (const auto& e : o.redactions) {
      Json ej = Json::object();
      ej["pattern_id"] = e.pattern_id;
      ej["offset"] = e.offset;
      ej["length"] = e.length;
      red.push_back(std::move(ej));
    }
    oj["redactions"] = std::move(red);
    oj["detector_hits"] = o.detector_hits;
    j["outcome"] = std::move(oj);
  }
  return j;
}

DecisionRecord decision_record_from_json(const Json& j) {
  DecisionRecord r;
  r.trace_id = j.at("trace_id").get<std::string>();
  r.step_id = j.at("step_id").get<std::int64_t>();
  const auto outcome = parse_outcome(j.at("decision").get<std::string>());
  if (!outcome) throw std::runtime_error("unknown decision '" + j.at("decision").get<std::string>() + "'");
  r.decision.outcome = *outcome;
  r.decision.policy_ids = j.value("policy_ids", std::vector<std::string>{});
  r.decision.rationale = j.value("rationale", std::vector<std::string>{});
  r.decision.fix_hint = j.value("fix_hint", std::string());
  r.decision.risk_score = j.value("risk_score", 0.0);
  if (const auto t = j.find("transforms_applied"); t != j.end()) {
    for (const auto& tj : *t) {
      if (tj.is_string()) {
        r.decision.transforms.push_back({tj.get<std::string>(), ""});
      } else {
        r.decision.transforms.push_back({tj.value("kind", std::string()), tj.value("detail", std::string())});
      }
    }
  }
  r.decision.overhead_ms = j.value("overhead_ms", 0.0);
  if (const auto a = j.find("approval"); a != j.end()) {
    r.approval = ApprovalRecord{a->value("mode", std::string()), a->value("verdict", std::string()) == "approved",
                                a->value("delay_ms", std::int64_t{0})};
  }
  if (const auto o = j.find("outcome"); o != j.end()) {
    OutcomeRecord out;
    out.status = o->value("status", std::string());
    out.error = o->value("error", std::string());
    out.tool_error = o->value("tool_error", std::string());
    if (const auto e = o->find("side_effects"); e != o->end()) {
      for (const auto& ej : *e) {
        out.side_effects.push_back(
            {ej.value("kind", std::string()), ej.value("target", std::string()), ej.value("unsafe", std::string())});
      }
    }
    out.executions = o->value("executions", std::int64_t{0});
    out.latency_ms = o->value("latency_ms", std::int64_t{0});
    out.cost = o->value("cost", std::int64_t{0});
    if (const auto red = o->find("redactions"); red != o->end()) {
      for (const auto& ej : *red) {
        out.redactions.push_back({ej.value("pattern_id", std::string()), ej.value("offset", std::size_t{0}),
                                  ej.value("length", std::size_t{0})});
      }
    }
    out.detector_hits = o->value("detector_hits", std::int64_t{0});
    r.outcome = std::move(out);
  }
  return r;
}

std::string serialize_decision_log(const std::vector<DecisionRecord>& records) {
  return serialize_lines(records, decision_record_to_json);
}

std::vector<DecisionRecord> parse_decision_log(std::string_view text) {
  std::vector<DecisionRecord> out;
  for (const auto& j : parse_jsonl(text)) out.push_back(decision_record_from_json(j));
  return out;
}

void write_decision_log(const std::vector<DecisionRecord>& records, const std::filesystem::path& path) {
  write_file(path, serialize_decision_log(records));
}

std::vector<DecisionRecord> read_decision_log(const std::filesystem::path& path) {
  return parse_decision_log(read_file(path));
}

Json fault_event_to_json(const FaultEventRecord& r) {
  Json j = Json::object();
  j["trace_id"] = r.trace_id;
  j["step_id"] = r.step_id;
  j["fault"] = r.fault;
  j["applied"] = r.applied;
  j["parameters"] = r.parameters;
  return j;
}

FaultEventRecord fault_event_from_json(const Json& j) {
  return {j.at("trace_id").get<std::string>(), j.at("step_id").get<std::int64_t>(), j.at("fault").get<std::string>(),
          j.value("applied", true), j.value("parameters", Json::object())};
}

Json mutation_record_to_json(const MutationRecord& r) {
  Json j = Json::object();
  j["trace_id"] = r.trace_id;
  j["step_id"] = r.step_id;
  j["type"] = r.type;
  j["taxonomy_class"] = r.taxonomy_class;
  j["original_fragment"] = r.original_fragment;
  j["mutated_fragment"] = r.mutated_fragment;
  j["is_unsafe"] = r.is_unsafe;
  return j;
}

MutationRecord mutation_record_from_json(const Json& j) {
  return {j.at("trace_id").get<std::string>(),       j.at("step_id").get<std::int64_t>(),
          j.at("type").get<std::string>(),           j.value("taxonomy_class", std::string()),
          j.value("original_fragment", std::string()), j.value("mutated_fragment", std::string()),
          j.value("is_unsafe", false)};
}

std::vector<std::pair<const TraceRecord*, const DecisionRecord*>> join(const std::vector<TraceRecord>& trace,
                                                                         const std::vector<DecisionRecord>& decisions) {
  std::map<std::pair<std::string, std::int64_t>, const TraceRecord*> index;
  for (const auto& t : trace) index[{t.trace_id, t.step_id}] = &t;
  std::vector<std::pair<const TraceRecord*, const DecisionRecord*>> out;
  out.reserve(decisions.size());
  for (const auto& d : decisions) {
    const auto it = index.find({d.trace_id, d.step_id});
    if (it == index.end()) {
      throw JoinError("orphan decision: trace '" + d.trace_id + "' step " + std::to_string(d.step_id));
    }
    out.emplace_back(it->second, &d);
  }
  return out;
}

}  // namespace toolgate
