#pragma once

#include "toolgate/json.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace toolgate {

struct CallContext {
  std::string workspace_root;
  std::optional<std::string> repo_state;
  std::optional<std::string> env;
  bool operator==(const CallContext&) const = default;
};

struct CallBudget {
  std::optional<std::int64_t> max_calls;
  std::optional<std::int64_t> max_cost;
  std::optional<std::int64_t> deadline_ms;
  bool operator==(const CallBudget&) const = default;
};

struct CallMetadata {
  std::string trace_id;
  std::int64_t step_id = 0;
  std::optional<std::string> ts;
  // Set by the misuse injector; the environment appends it to the output.
  std::optional<std::string> planted_secret;
  bool operator==(const CallMetadata&) const = default;
};

struct ToolCall {
  std::string tool_name;
  Json args = Json::object();
  CallContext context;
  CallBudget budget;
  CallMetadata metadata;
  bool operator==(const ToolCall&) const = default;
};

// Field lookup for predicates: returns nullptr when absent.
const Json* find_arg(const ToolCall& call, const std::string& name);

}  // namespace toolgate
