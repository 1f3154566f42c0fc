#pragma once

#include "toolgate/policy.hpp"

#include <string>
#include <vector>

namespace toolgate {

// DSL source of a built-in pack; P0..P4 only.
const std::string& builtin_pack_text(PackLevel level);
PolicyPack builtin_pack(PackLevel level);

inline constexpr PackLevel kBuiltinLevels[] = {PackLevel::P0, PackLevel::P1, PackLevel::P2, PackLevel::P3,
                                               PackLevel::P4};

}  // namespace toolgate
