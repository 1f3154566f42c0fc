#pragma once

#include "toolgate/json.hpp"
#include "toolgate/registry.hpp"
#include "toolgate/tool_call.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace toolgate {

struct HttpFixture {
  int status = 200;
  std::string body;
  bool operator==(const HttpFixture&) const = default;
};

struct SideEffectRecord {
  std::string kind;  // file_created, file_modified, file_deleted, tree_deleted, destructive, network_request, kv_write
  std::string target;
  std::string unsafe_reason;  // empty when the effect is benign
  bool unsafe() const { return !unsafe_reason.empty(); }
  bool operator==(const SideEffectRecord&) const = default;
};

enum class OutputStatus { Success, Error };

struct ToolOutput {
  OutputStatus status = OutputStatus::Success;
  std::string error;  // error code when status == Error
  Json payload;
  std::vector<SideEffectRecord> side_effects;
  std::int64_t cost_charged = 0;
  std::int64_t latency_ms = 0;

  bool ok() const { return status == OutputStatus::Success; }
  bool operator==(const ToolOutput&) const = default;
};

ToolOutput make_error(std::string code, Json payload = Json());

// Errors worth retrying: they come from the execution substrate rather than
// from the call itself.
bool is_retryable_error(std::string_view code);

Json side_effect_to_json(const SideEffectRecord& effect);
Json output_to_json(const ToolOutput& output);

// In-memory world the simulated tools act on. Files are keyed by normalized
// absolute path; directories are implicit.
class SimulatedEnvironment {
 public:
  std::map<std::string, std::string> files;
  std::map<std::string, Json> kv;
  std::map<std::string, std::string> blobs;
  std::map<std::string, HttpFixture> http;  // key: scheme://host/path
  std::vector<std::string> approved_domains;
  std::int64_t clock_ms = 0;

  bool is_dir(const std::string& normalized) const;
  bool exists(const std::string& normalized) const;
  std::vector<std::string> list_dir(const std::string& normalized) const;
  // Removes `normalized` and everything beneath it; returns the count removed.
  std::size_t remove_tree(const std::string& normalized);

  bool domain_approved(std::string_view host) const;

  // Hash of mutable world state (files and kv); excludes the clock.
  std::string state_hash() const;

  // blobs are stored out of line in suites and are omitted unless requested.
  Json to_json(bool include_blobs = false) const;
  static SimulatedEnvironment from_json(const Json& doc);

  bool operator==(const SimulatedEnvironment&) const = default;
};

struct ParsedUrl {
  std::string scheme;
  std::string host;  // lowercased
  std::string path;
  std::string query;
};

std::optional<ParsedUrl> parse_url(std::string_view url);

// Query keys that carry credentials when present in a request URL.
bool has_secret_query(std::string_view query);

// Credential-shaped values in a query string, whatever the parameter name.
bool query_carries_credential(std::string_view query);

// Paths whose recursive deletion counts as destructive.
bool is_protected_tree(const std::string& normalized, const std::string& workspace_root);

std::int64_t base_latency_ms(std::string_view tool_name);

class Executor {
 public:
  virtual ~Executor() = default;
  // `attempt` is zero-based within a step.
  virtual ToolOutput execute(const ToolCall& call, SimulatedEnvironment& env, int attempt) = 0;
};

// Deterministic simulation of the registered tools.
class BaseExecutor : public Executor {
 public:
  explicit BaseExecutor(const Registry& registry) : registry_(registry) {}
  ToolOutput execute(const ToolCall& call, SimulatedEnvironment& env, int attempt) override;

  const Registry& registry() const { return registry_; }

 private:
  const Registry& registry_;
};

// Resolves fs.write contents: "blob:<id>" reads the content store, anything
// else is taken literally.
std::optional<std::string> resolve_contents(const SimulatedEnvironment& env, const std::string& ref);

// Writes the first `fraction` of the intended contents of an fs.write call
// without recording completion. Used to model torn writes.
void apply_partial_write(const ToolCall& call, SimulatedEnvironment& env, double fraction);

}  // namespace toolgate
