#pragma once

#include "toolgate/config_error.hpp"
#include "toolgate/environment.hpp"
#include "toolgate/registry.hpp"
#include "toolgate/trace_io.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace toolgate {

// Listed in firing priority: one uniform draw per attempt is partitioned in
// this order.
enum class FaultKind { RateLimit, Timeout, Transient, CorruptOutput, PartialWrite, Nondeterminism };
inline constexpr std::array<FaultKind, 6> kFaultPriority{FaultKind::RateLimit,     FaultKind::Timeout,
                                                          FaultKind::Transient,     FaultKind::CorruptOutput,
                                                          FaultKind::PartialWrite,  FaultKind::Nondeterminism};

std::string_view to_string(FaultKind kind);
std::string_view probability_key(FaultKind kind);  // e.g. "timeout_p"
std::optional<FaultKind> parse_probability_key(std::string_view key);

struct FaultRates {
  std::array<double, 6> p{};  // indexed by FaultKind
  double& operator[](FaultKind k) { return p[static_cast<std::size_t>(k)]; }
  double operator[](FaultKind k) const { return p[static_cast<std::size_t>(k)]; }
  double total() const;
  bool operator==(const FaultRates&) const = default;
};

struct FaultProfile {
  std::string name = "none";
  FaultRates rates;
  std::map<std::string, std::map<FaultKind, double>> tool_overrides;
  std::uint64_t seed = 0;
  std::int64_t default_timeout_ms = 1000;
  std::int64_t rate_limit_window_ms = 300;
  std::int64_t rate_limit_latency_ms = 5;
  double timeout_effect_p = 0.5;  // write tools: chance the effect landed before the response was lost

  FaultRates rates_for(const std::string& tool) const;
  bool active() const;
  bool operator==(const FaultProfile&) const = default;
};

struct FaultConfig {
  std::uint64_t seed = 0;
  std::vector<FaultProfile> profiles;

  // "none" is always available and injects nothing.
  FaultProfile profile(std::string_view name) const;
  std::vector<std::string> names() const;
};

// Parses a `fault_injection:` document. Top-level tool_overrides apply to
// every declared profile. Throws ConfigError.
FaultConfig parse_fault_config(std::string_view yaml_text);
std::string default_fault_config_yaml();
FaultConfig default_fault_config();

// Maps a uniform draw to the fault it selects, if any. Faults that do not
// apply to the tool keep their slice but fire nothing.
std::optional<FaultKind> select_fault(const FaultRates& rates, double u, bool partial_write_applies);

// Executor decorator injecting seeded faults. Draws come from the stream
// (seed, trace_id, step_id, attempt). Rate-limit windows are per tool
// category on the virtual clock; attempts inside a window fail fast.
class FaultInjectingExecutor : public Executor {
 public:
  FaultInjectingExecutor(Executor& inner, const Registry& registry, FaultProfile profile,
                         std::vector<FaultEventRecord>& log)
      : inner_(inner), registry_(registry), profile_(std::move(profile)), log_(log) {}

  ToolOutput execute(const ToolCall& call, SimulatedEnvironment& env, int attempt) override;

  const FaultProfile& profile() const { return profile_; }

 private:
  void record(const ToolCall& call, FaultKind kind, Json parameters);

  Executor& inner_;
  const Registry& registry_;
  FaultProfile profile_;
  std::vector<FaultEventRecord>& log_;
  std::map<std::string, std::int64_t> window_until_;
};

}  // namespace toolgate
