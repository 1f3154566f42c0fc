#pragma once

#include "toolgate/environment.hpp"
#include "toolgate/policy.hpp"
#include "toolgate/registry.hpp"

#include <optional>
#include <string>
#include <vector>

namespace toolgate {

inline constexpr const char* kLedgerPrefix = "idem:";

// sha256 over the tool name, the step identity and the canonical JSON of the
// selected argument fields. Absent fields are skipped.
std::string idempotency_key(const ToolCall& call, const std::vector<std::string>& key_fields);

// Recorded output for the call, if a prior attempt committed one.
std::optional<ToolOutput> idempotency_guard(const ToolCall& call, const SimulatedEnvironment& env,
                                            const RecoveryConfig& config);

void record_commit(const ToolCall& call, SimulatedEnvironment& env, const RecoveryConfig& config,
                   const ToolOutput& output);

// Consults the ledger for write and delete tools when the category's recovery
// config enables idempotency; successful executions are recorded.
class IdempotentExecutor : public Executor {
 public:
  IdempotentExecutor(Executor& inner, const Registry& registry, const PolicyPack& pack)
      : inner_(inner), registry_(registry), pack_(pack) {}

  ToolOutput execute(const ToolCall& call, SimulatedEnvironment& env, int attempt) override;

  std::size_t replays() const { return replays_; }

 private:
  Executor& inner_;
  const Registry& registry_;
  const PolicyPack& pack_;
  std::size_t replays_ = 0;
};

ToolOutput output_from_json(const Json& j);

}  // namespace toolgate
