#include "toolgate/approver.hpp"

#include "toolgate/rng.hpp"

#include <stdexcept>

namespace toolgate {

std::string_view to_string(ApproverMode mode) {
  switch (mode) {
    case ApproverMode::AlwaysApprove: return "always_approve";
    case ApproverMode::AlwaysReject: return "always_reject";
    case ApproverMode::Probabilistic: return "probabilistic";
    case ApproverMode::Scripted: return "scripted";
  }
  return "always_approve";
}

std::optional<ApproverMode> parse_approver_mode(std::string_view text) {
  for (auto m : {ApproverMode::AlwaysApprove, ApproverMode::AlwaysReject, ApproverMode::Probabilistic,
                 ApproverMode::Scripted}) {
    if (text == to_string(m)) return m;
  }
  return std::nullopt;
}

Approver Approver::always_approve(std::int64_t delay_ms) {
  Approver a;
  a.mode_ = ApproverMode::AlwaysApprove;
  a.delay_ms_ = delay_ms;
  return a;
}

Approver Approver::always_reject(std::int64_t delay_ms) {
  Approver a;
  a.mode_ = ApproverMode::AlwaysReject;
  a.p_ = 0.0;
  a.delay_ms_ = delay_ms;
  return a;
}

Approver Approver::probabilistic(double p, std::uint64_t seed, std::int64_t delay_ms) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("approval probability must be in [0, 1]");
  Approver a;
  a.mode_ = ApproverMode::Probabilistic;
  a.p_ = p;
  a.seed_ = seed;
  a.delay_ms_ = delay_ms;
  return a;
}

Approver Approver::scripted(std::vector<bool> verdicts, std::int64_t delay_ms) {
  Approver a;
  a.mode_ = ApproverMode::Scripted;
  a.script_ = std::move(verdicts);
  a.delay_ms_ = delay_ms;
  return a;
}

ApprovalVerdict Approver::request(const ToolCall& call, const Decision&) {
  switch (mode_) {
    case ApproverMode::AlwaysApprove: return {true, delay_ms_};
    case ApproverMode::AlwaysReject: return {false, delay_ms_};
    case ApproverMode::Probabilistic: {
      Rng rng = make_stream(seed_, std::string_view("approve"), std::string_view(call.metadata.trace_id),
                            call.metadata.step_id);
      return {rng.uniform() < p_, delay_ms_};
    }
    case ApproverMode::Scripted: {
      const bool ok = next_ < script_.size() && script_[next_];
      ++next_;
      return {ok, delay_ms_};
    }
  }
  return {false, delay_ms_};
}

}  // namespace toolgate
