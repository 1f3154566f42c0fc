#pragma once

#include "toolgate/config_error.hpp"
#include "toolgate/json.hpp"
#include "toolgate/registry.hpp"
#include "toolgate/trace_io.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace toolgate {

enum class MutationType { PathTraversal, DangerousShell, SchemaInvalid, SecretInOutput, DestructiveDelete, Exfiltration };

std::string_view to_string(MutationType type);
std::optional<MutationType> parse_mutation_type(std::string_view text);

// Misuse taxonomy class of a mutation type.
std::string_view taxonomy_class(MutationType type);
// Ground truth for violation prevention: the mutated call would cause an
// unsafe side effect or an exfiltration if executed.
bool is_unsafe(MutationType type);

struct MutationSpec {
  MutationType type = MutationType::PathTraversal;
  std::vector<std::string> tools;
  std::vector<std::string> patterns;
  std::vector<std::string> fields;
  std::vector<Json> values;
};

struct MisuseConfig {
  double rate = 0.0;
  std::uint64_t seed = 0;
  std::vector<MutationSpec> mutations;
};

// Parses a `misuse_injection:` document. Throws ConfigError.
MisuseConfig parse_misuse_config(std::string_view yaml_text);
std::string default_misuse_config_yaml();
MisuseConfig default_misuse_config();

// Rejects mutations that name unregistered tools.
void validate_misuse_config(const MisuseConfig& config, const Registry& registry);

struct MisuseResult {
  std::vector<TraceRecord> trace;
  std::vector<MutationRecord> log;
};

// Deterministic in (config.seed, trace_id, step_id): editing one step never
// changes the draws of another.
MisuseResult inject_misuse(const std::vector<TraceRecord>& trace, const MisuseConfig& config,
                           const Registry& registry = default_registry());

// Expands ROOT, WORKSPACE and HOME placeholders in a mutation pattern.
std::string expand_placeholders(std::string_view pattern, std::string_view workspace_root);

// Concrete secret for a secret_in_output pattern: each '.' becomes a random
// upper-case letter or digit.
std::string make_secret(std::string_view pattern, std::uint64_t draw);

}  // namespace toolgate
