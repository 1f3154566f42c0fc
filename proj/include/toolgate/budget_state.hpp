#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace toolgate {

enum class CircuitPhase { Closed, Open, HalfOpen };

struct CircuitState {
  CircuitPhase phase = CircuitPhase::Closed;
  std::int64_t consecutive_failures = 0;
  std::int64_t open_until_ms = 0;
  bool operator==(const CircuitState&) const = default;
};

// Mutable per-run accounting. Counters only grow within a run.
struct BudgetState {
  std::int64_t calls_made = 0;  // executions, retries included
  std::int64_t cost_spent = 0;
  std::int64_t run_start_ms = 0;
  std::int64_t now_ms = 0;  // virtual clock at the time of evaluation
  std::map<std::string, std::int64_t> calls_by_tool;
  std::map<std::string, std::int64_t> cost_by_tool;
  // Admission times of executed steps, per tool, for rate windows.
  std::map<std::string, std::vector<std::int64_t>> admitted_at;
  std::map<std::int64_t, std::int64_t> retries_by_step;
  std::map<std::string, CircuitState> circuits;  // keyed by tool category

  bool operator==(const BudgetState&) const = default;
};

}  // namespace toolgate
