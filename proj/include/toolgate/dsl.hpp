#pragma once

#include "toolgate/policy.hpp"

#include <stdexcept>
#include <string>
#include <string_view>

namespace toolgate {

class DslError : public std::runtime_error {
 public:
  DslError(const std::string& message, int line, int column)
      : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

// Parses a policy document. Blocks: pack, policy, recovery, risk.
PolicyPack parse_pack(std::string_view text);

// Canonical text form; parse_pack(print_pack(p)) == p.
std::string print_pack(const PolicyPack& pack);
std::string print_predicate(const Predicate& pred);

// Replaces the ROOT placeholder with `root_prefix`.
std::string expand_root(std::string_view pattern, std::string_view root_prefix);

}  // namespace toolgate
