#pragma once

#include "toolgate/decision.hpp"
#include "toolgate/tool_call.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace toolgate {

enum class ApproverMode { AlwaysApprove, AlwaysReject, Probabilistic, Scripted };
std::string_view to_string(ApproverMode mode);
std::optional<ApproverMode> parse_approver_mode(std::string_view text);

struct ApprovalVerdict {
  bool approved = false;
  std::int64_t delay_ms = 0;
};

// Simulated reviewer for REQUIRE_APPROVAL decisions. Probabilistic verdicts
// depend only on (seed, trace_id, step_id), so they replay exactly.
class Approver {
 public:
  static Approver always_approve(std::int64_t delay_ms = 500);
  static Approver always_reject(std::int64_t delay_ms = 500);
  static Approver probabilistic(double p, std::uint64_t seed, std::int64_t delay_ms = 500);
  // Verdicts are consumed in order; once exhausted, requests are rejected.
  static Approver scripted(std::vector<bool> verdicts, std::int64_t delay_ms = 500);

  ApprovalVerdict request(const ToolCall& call, const Decision& decision);

  ApproverMode mode() const { return mode_; }
  double probability() const { return p_; }
  std::uint64_t seed() const { return seed_; }
  std::int64_t delay_ms() const { return delay_ms_; }

 private:
  ApproverMode mode_ = ApproverMode::AlwaysApprove;
  double p_ = 1.0;
  std::uint64_t seed_ = 0;
  std::int64_t delay_ms_ = 0;
  std::vector<bool> script_;
  std::size_t next_ = 0;
};

}  // namespace toolgate
