#pragma once

#include "toolgate/policy.hpp"
#include "toolgate/registry.hpp"

#include <string>
#include <vector>

namespace toolgate {

struct Diagnostic {
  std::string code;  // unregistered_tool | undeclared_arg | shadowed_rule
  std::string policy;
  std::string message;
  bool operator==(const Diagnostic&) const = default;
};

std::vector<Diagnostic> validate_pack(const PolicyPack& pack, const Registry& registry);

}  // namespace toolgate
