#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace toolgate {

class PatternError : public std::runtime_error {
 public:
  PatternError(const std::string& message, std::size_t offset)
      : std::runtime_error(message + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

struct PatternMatch {
  std::size_t offset = 0;
  std::size_t length = 0;
  bool operator==(const PatternMatch&) const = default;
};

namespace detail {
struct Program;
}

// Byte-oriented regular expressions with leftmost-longest semantics,
// evaluated by NFA simulation in O(text * program) time.
//
// Syntax: literals, ".", classes "[a-z]" / "[^...]", escapes \d \w \s (and
// negations), anchors "^" "$", groups "(...)" "(?:...)", alternation, and the
// quantifiers * + ? {n} {n,} {n,m}. A "{" that does not open a well-formed
// quantifier is a literal, as are "}" and a stray "]".
class Pattern {
 public:
  static Pattern compile(std::string_view source);

  const std::string& source() const { return source_; }

  bool search(std::string_view text) const;
  std::optional<PatternMatch> find(std::string_view text, std::size_t from = 0) const;
  // Successive non-overlapping leftmost-longest matches.
  std::vector<PatternMatch> find_all(std::string_view text) const;
  bool full_match(std::string_view text) const;

 private:
  Pattern(std::string source, std::shared_ptr<const detail::Program> program)
      : source_(std::move(source)), program_(std::move(program)) {}

  std::string source_;
  std::shared_ptr<const detail::Program> program_;
};

}  // namespace toolgate
