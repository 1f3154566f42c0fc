#pragma once

// Parse tree for Pattern. Exposed for the test oracle; not part of the
// stable interface.

#include <bitset>
#include <string_view>
#include <vector>

namespace toolgate::detail {

using ByteSet = std::bitset<256>;

struct PatternNode {
  enum class Kind { Empty, Set, Concat, Alternate, Repeat, LineStart, LineEnd };
  Kind kind = Kind::Empty;
  ByteSet set;
  std::vector<PatternNode> children;
  int min = 0;
  int max = -1;  // -1: unbounded
};

inline constexpr int kMaxRepeat = 1000;

PatternNode parse_pattern(std::string_view source);

}  // namespace toolgate::detail
