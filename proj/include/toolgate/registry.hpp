#pragma once

#include "toolgate/json.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace toolgate {

enum class ToolCategory { Fs, Shell, Http, Parse, Kv };
enum class SideEffect { ReadOnly, Write, Delete, Network, Exec };

std::string_view to_string(ToolCategory category);
std::string_view to_string(SideEffect effect);
std::optional<ToolCategory> parse_category(std::string_view text);
std::optional<SideEffect> parse_side_effect(std::string_view text);

struct ArgSpec {
  std::string type;  // string | integer | number | boolean | enum | object | any
  std::vector<std::string> values;
  std::optional<double> min;
  std::optional<double> max;
  bool required = true;
  bool operator==(const ArgSpec&) const = default;
};

struct ToolManifest {
  std::string name;
  ToolCategory category = ToolCategory::Fs;
  SideEffect side_effect = SideEffect::ReadOnly;
  std::vector<std::pair<std::string, ArgSpec>> args_schema;
  std::int64_t cost = 0;

  const ArgSpec* arg(std::string_view field) const;
  bool operator==(const ToolManifest&) const = default;
};

class ManifestError : public std::runtime_error {
 public:
  enum class Kind { Parse, Conflict, Validation };
  ManifestError(Kind kind, const std::string& message, int line)
      : std::runtime_error(line > 0 ? message + " (line " + std::to_string(line) + ")" : message),
        kind_(kind),
        line_(line) {}
  Kind kind() const { return kind_; }
  int line() const { return line_; }

 private:
  Kind kind_;
  int line_;
};

struct SchemaViolation {
  std::string field;
  std::string reason;
  bool operator==(const SchemaViolation&) const = default;
};

std::vector<SchemaViolation> validate_args(const ToolManifest& manifest, const Json& args);

// Immutable after construction; safe to share across runs.
class Registry {
 public:
  Registry() = default;
  explicit Registry(std::vector<ToolManifest> tools);

  const ToolManifest* find(std::string_view name) const;
  const std::vector<ToolManifest>& tools() const { return tools_; }
  std::vector<std::string> names() const;
  bool empty() const { return tools_.empty(); }

 private:
  std::vector<ToolManifest> tools_;
};

// Parses a `tools:` manifest document. Throws ManifestError.
std::vector<ToolManifest> load_manifests(std::string_view yaml_text);

const std::string& default_manifest_yaml();
const Registry& default_registry();

}  // namespace toolgate
