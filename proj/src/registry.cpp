#include "toolgate/registry.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <set>

namespace toolgate {

namespace {

constexpr std::string_view kCategoryNames[] = {"fs", "shell", "http", "parse", "kv"};
constexpr std::string_view kSideEffectNames[] = {"read_only", "write", "delete", "network", "exec"};
constexpr std::string_view kArgTypes[] = {"string", "integer", "number", "boolean", "enum", "object", "any"};

int line_of(const YAML::Node& node) { return node.Mark().line >= 0 ? node.Mark().line + 1 : 0; }

[[noreturn]] void fail(ManifestError::Kind kind, const std::string& message, const YAML::Node& node) {
  throw ManifestError(kind, message, line_of(node));
}

std::string scalar(const YAML::Node& node, const std::string& what) {
  if (!node || !node.IsScalar()) fail(ManifestError::Kind::Validation, what + " must be a scalar", node);
  return node.as<std::string>();
}

ArgSpec parse_arg_spec(const std::string& field, const YAML::Node& node) {
  if (!node.IsMap()) fail(ManifestError::Kind::Validation, "args_schema." + field + " must be a mapping", node);
  ArgSpec spec;
  spec.type = scalar(node["type"], "args_schema." + field + ".type");
  if (std::find(std::begin(kArgTypes), std::end(kArgTypes), spec.type) == std::end(kArgTypes)) {
    fail(ManifestError::Kind::Validation, "unknown arg type '" + spec.type + "' for " + field, node["type"]);
  }
  if (const auto values = node["values"]) {
    if (!values.IsSequence()) fail(ManifestError::Kind::Validation, field + ".values must be a list", values);
    for (const auto& v : values) spec.values.push_back(scalar(v, field + ".values[]"));
  }
  if (spec.type == "enum" && spec.values.empty()) {
    fail(ManifestError::Kind::Validation, "enum " + field + " needs values", node);
  }
  try {
    if (const auto lo = node["min"]) spec.min = lo.as<double>();
    if (const auto hi = node["max"]) spec.max = hi.as<double>();
    if (const auto req = node["required"]) spec.required = req.as<bool>();
  } catch (const YAML::BadConversion& e) {
    fail(ManifestError::Kind::Validation, "bad value in " + field + ": " + e.msg, node);
  }
  if (spec.min && spec.max && *spec.min > *spec.max) {
    fail(ManifestError::Kind::Validation, "empty range for " + field, node);
  }
  return spec;
}

// Categories that pin the side effect regardless of the individual tool.
std::optional<SideEffect> pinned_side_effect(const std::string& name, ToolCategory category) {
  if (name == "fs.delete") return SideEffect::Delete;
  switch (category) {
    case ToolCategory::Http: return SideEffect::Network;
    case ToolCategory::Shell: return SideEffect::Exec;
    case ToolCategory::Parse: return SideEffect::ReadOnly;
    default: return std::nullopt;
  }
}

}  // namespace

std::string_view to_string(ToolCategory category) { return kCategoryNames[static_cast<int>(category)]; }
std::string_view to_string(SideEffect effect) { return kSideEffectNames[static_cast<int>(effect)]; }

std::optional<ToolCategory> parse_category(std::string_view text) {
  for (int i = 0; i < 5; ++i) {
    if (kCategoryNames[i] == text) return static_cast<ToolCategory>(i);
  }
  return std::nullopt;
}

std::optional<SideEffect> parse_side_effect(std::string_view text) {
  for (int i = 0; i < 5; ++i) {
    if (kSideEffectNames[i] == text) return static_cast<SideEffect>(i);
  }
  return std::nullopt;
}

const ArgSpec* ToolManifest::arg(std::string_view field) const {
  for (const auto& [name, spec] : args_schema) {
    if (name == field) return &spec;
  }
  return nullptr;
}

std::vector<SchemaViolation> validate_args(const ToolManifest& manifest, const Json& args) {
  std::vector<SchemaViolation> out;
  if (!args.is_object()) {
    out.push_back({"args", "must be an object"});
    return out;
  }
  for (const auto& [field, spec] : manifest.args_schema) {
    const auto it = args.find(field);
    if (it == args.end()) {
      if (spec.required) out.push_back({field, "required field missing"});
      continue;
    }
    const Json& v = *it;
    const std::string& t = spec.type;
    bool type_ok = true;
    if (t == "string") type_ok = v.is_string();
    else if (t == "integer") type_ok = v.is_number_integer();
    else if (t == "number") type_ok = v.is_number();
    else if (t == "boolean") type_ok = v.is_boolean();
    else if (t == "object") type_ok = v.is_object();
    else if (t == "enum") type_ok = v.is_string();
    if (!type_ok) {
      out.push_back({field, "expected " + t + ", got " + std::string(v.type_name())});
      continue;
    }
    if (t == "enum" && std::find(spec.values.begin(), spec.values.end(), v.get<std::string>()) == spec.values.end()) {
      out.push_back({field, "value '" + v.get<std::string>() + "' not in enum"});
      continue;
    }
    if (v.is_number() && (spec.min || spec.max)) {
      const double x = v.get<double>();
      if ((spec.min && x < *spec.min) || (spec.max && x > *spec.max) || !std::isfinite(x)) {
        out.push_back({field, "value " + v.dump() + " out of range"});
      }
    }
  }
  for (const auto& [field, value] : args.items()) {
    (void)value;
    if (!manifest.arg(field)) out.push_back({field, "unknown argument"});
  }
  return out;
}

Registry::Registry(std::vector<ToolManifest> tools) : tools_(std::move(tools)) {
  std::set<std::string> seen;
  for (const auto& t : tools_) {
    if (!seen.insert(t.name).second) {
      throw ManifestError(ManifestError::Kind::Conflict, "duplicate tool name '" + t.name + "'", 0);
    }
  }
}

const ToolManifest* Registry::find(std::string_view name) const {
  for (const auto& t : tools_) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

std::vector<std::string> Registry::names() const {
  std::vector<std::string> out;
  for (const auto& t : tools_) out.push_back(t.name);
  return out;
}

std::vector<ToolManifest> load_manifests(std::string_view yaml_text) {
  YAML::Node doc;
  try {
    doc = YAML::Load(std::string(yaml_text));
  } catch (const YAML::ParserException& e) {
    throw ManifestError(ManifestError::Kind::Parse, e.msg, e.mark.line + 1);
  }
  std::vector<ToolManifest> out;
  if (!doc || doc.IsNull()) return out;
  if (!doc.IsMap() || !doc["tools"]) fail(ManifestError::Kind::Validation, "document must have a 'tools' key", doc);
  const YAML::Node tools = doc["tools"];
  if (tools.IsNull()) return out;
  if (!tools.IsSequence()) fail(ManifestError::Kind::Validation, "'tools' must be a list", tools);

  std::set<std::string> seen;
  for (const auto& node : tools) {
    if (!node.IsMap()) fail(ManifestError::Kind::Validation, "tool entry must be a mapping", node);
    ToolManifest m;
    m.name = scalar(node["name"], "name");
    if (m.name.empty()) fail(ManifestError::Kind::Validation, "tool name is empty", node);
    if (!seen.insert(m.name).second) {
      fail(ManifestError::Kind::Conflict, "duplicate tool name '" + m.name + "'", node["name"]);
    }
    const std::string category = scalar(node["category"], "category");
    const auto cat = parse_category(category);
    if (!cat) fail(ManifestError::Kind::Validation, "unknown category '" + category + "'", node["category"]);
    m.category = *cat;
    const std::string effect = scalar(node["side_effect"], "side_effect");
    const auto eff = parse_side_effect(effect);
    if (!eff) fail(ManifestError::Kind::Validation, "unknown side_effect '" + effect + "'", node["side_effect"]);
    m.side_effect = *eff;

    const auto dot = m.name.find('.');
    if (dot != std::string::npos) {
      const auto prefix_cat = parse_category(std::string_view(m.name).substr(0, dot));
      if (prefix_cat && *prefix_cat != m.category) {
        fail(ManifestError::Kind::Validation, m.name + ": category '" + category + "' contradicts name", node["category"]);
      }
    }
    if (const auto pinned = pinned_side_effect(m.name, m.category); pinned && *pinned != m.side_effect) {
      fail(ManifestError::Kind::Validation,
           m.name + ": side_effect must be " + std::string(to_string(*pinned)), node["side_effect"]);
    }

    if (const auto schema = node["args_schema"]) {
      if (!schema.IsMap()) fail(ManifestError::Kind::Validation, "args_schema must be a mapping", schema);
      for (const auto& kv : schema) {
        m.args_schema.emplace_back(kv.first.as<std::string>(), parse_arg_spec(kv.first.as<std::string>(), kv.second));
      }
    }
    const YAML::Node cost = node["cost"];
    if (!cost) fail(ManifestError::Kind::Validation, m.name + ": cost missing", node);
    try {
      m.cost = cost.as<std::int64_t>();
    } catch (const YAML::BadConversion&) {
      fail(ManifestError::Kind::Validation, m.name + ": cost must be an integer", cost);
    }
    if (m.cost < 0) fail(ManifestError::Kind::Validation, m.name + ": cost must be non-negative", cost);
    out.push_back(std::move(m));
  }
  return out;
}

const std::string& default_manifest_yaml() {
  static const std::string text = R"(tools:
  - name: "fs.read"
    category: "fs"
    side_effect: "read_only"
    args_schema:
      path: {type: "string"}
    cost: 1
  - name: "fs.write"
    category: "fs"
    side_effect: "write"
    args_schema:
      path: {type: "string"}
      contents_ref: {type: "string"}
      mode: {type: "enum", values: ["overwrite", "append", "create_only"]}
    cost: 2
  - name: "fs.delete"
    category: "fs"
    side_effect: "delete"
    args_schema:
      path: {type: "string"}
      recursive: {type: "boolean", required: false}
    cost: 2
  - name: "shell.exec"
    category: "shell"
    side_effect: "exec"
    args_schema:
      cmd: {type: "string"}
      timeout_ms: {type: "integer", min: 1, max: 600000, required: false}
    cost: 5
  - name: "http.get"
    category: "http"
    side_effect: "network"
    args_schema:
      url: {type: "string"}
      timeout_ms: {type: "integer", min: 1, max: 600000, required: false}
    cost: 3
  - name: "parse.json"
    category: "parse"
    side_effect: "read_only"
    args_schema:
      text: {type: "string", required: false}
      input_ref: {type: "string", required: false}
    cost: 1
  - name: "parse.regex"
    category: "parse"
    side_effect: "read_only"
    args_schema:
      pattern: {type: "string"}
      text: {type: "string", required: false}
      input_ref: {type: "string", required: false}
    cost: 1
  - name: "kv.get"
    category: "kv"
    side_effect: "read_only"
    args_schema:
      key: {type: "string"}
    cost: 1
  - name: "kv.put"
    category: "kv"
    side_effect: "write"
    args_schema:
      key: {type: "string"}
      value: {type: "any"}
    cost: 1
)";
  return text;
}

const Registry& default_registry() {
  static const Registry registry(load_manifests(default_manifest_yaml()));
  return registry;
}

}  // namespace toolgate
