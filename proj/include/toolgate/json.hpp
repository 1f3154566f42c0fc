#pragma once

#include <nlohmann/json.hpp>

#include <string>

namespace toolgate {

// Insertion-ordered JSON keeps schema-declared key order on output.
using Json = nlohmann::ordered_json;

// Compact, byte-stable rendering: keys in insertion order, floats with six
// fixed decimals, integers verbatim, UTF-8 passthrough.
std::string canonical_dump(const Json& value);

std::string format_fixed6(double value);

}  // namespace toolgate
