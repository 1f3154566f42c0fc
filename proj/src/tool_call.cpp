#include "toolgate/tool_call.hpp"

namespace toolgate {

const Json* find_arg(const ToolCall& call, const std::string& name) {
  if (!call.args.is_object()) return nullptr;
  const auto it = call.args.find(name);
  if (it == call.args.end()) return nullptr;
  return &*it;
}

}  // namespace toolgate
