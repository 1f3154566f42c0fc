#pragma once

#include "toolgate/environment.hpp"
#include "toolgate/policy.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace toolgate {

struct RedactionEvent {
  std::string pattern_id;
  std::string field;  // JSON pointer of the string leaf; empty for plain text
  std::size_t offset = 0;
  std::size_t length = 0;
  std::string replacement;
  bool operator==(const RedactionEvent&) const = default;
};

struct Detection {
  std::string pattern_id;
  std::size_t offset = 0;
  std::size_t length = 0;
  bool operator==(const Detection&) const = default;
};

// Non-overlapping matches of all patterns: candidates are ordered by offset,
// longer first, earlier pattern first, and taken greedily.
std::vector<Detection> detect(std::string_view text, const std::vector<RedactPattern>& patterns);

std::string mask_token(std::string_view pattern_id);

// Replaces every resolved match with its mask token. Re-scans until no
// pattern matches (bounded), so masks never splice new matches together.
std::string redact_text(std::string_view text, const std::vector<RedactPattern>& patterns,
                        std::vector<RedactionEvent>* events = nullptr, std::string_view field = {});

// Applies `patterns` to every string leaf of the payload.
ToolOutput redact_payload(const ToolOutput& output, const std::vector<RedactPattern>& patterns,
                          std::vector<RedactionEvent>& events);

// Patterns from the pack's on_output policies that apply to the tool.
std::vector<RedactPattern> output_patterns(const PolicyPack& pack, const std::string& tool_name);

// Redaction as configured by the pack; identity when no policy applies.
ToolOutput redact_output(const ToolOutput& output, const PolicyPack& pack, const std::string& tool_name,
                         std::vector<RedactionEvent>& events);

// Fixed harness detector used for leakage measurement in every pack.
const std::vector<RedactPattern>& harness_detector();

// All string leaves of a payload, concatenated with newlines.
std::string payload_text(const Json& payload);

}  // namespace toolgate
