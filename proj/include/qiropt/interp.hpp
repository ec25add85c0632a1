#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "qiropt/diagnostics.hpp"
#include "qiropt/ir.hpp"

namespace qiropt {

// Hardware-qubit identity: which allocation, and which slot inside it.
struct QubitId {
  std::int32_t alloc = 0;
  std::int32_t index = 0;
  auto operator<=>(const QubitId &) const = default;
};

struct GateEvent {
  std::string gate;  // canonical suffix, e.g. "qis__x__ctl"
  std::vector<QubitId> controls;
  std::vector<QubitId> targets;
  bool operator==(const GateEvent &) const = default;
};

struct GateTrace {
  std::vector<GateEvent> events;
  DiagList diagnostics;  // use-after-release, out-of-bounds
};

struct InterpPolicy {
  // Fixed measurement outcomes, consumed cyclically; all-zero by default so
  // control flow stays deterministic.
  std::vector<int> measurement_outcomes{0};
  std::uint64_t max_steps = 10'000'000;
  // Trap on unknown __quantum__rt__ callees instead of treating them as
  // inert no-ops with a warning.
  bool trap_unknown_rt = false;
};

class InterpError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class StepBudgetExceeded : public InterpError {
 public:
  StepBudgetExceeded() : InterpError("step budget exceeded") {}
};
class UnknownRuntimeFunction : public InterpError {
 public:
  explicit UnknownRuntimeFunction(const std::string &name)
      : InterpError("unknown runtime function @" + name), name(name) {}
  std::string name;
};

// Executes `entry` (a parameterless function) operationally: allocations
// hand out sequential qubit identities, slices materialize element lists,
// loads and stores move handles through array cells, and every quantum
// instruction call appends a GateEvent. Runtime errors the program itself
// causes (use-after-release, out-of-bounds) land in the trace's diagnostics.
GateTrace interpret(const Module &m, const std::string &entry = "main",
                    const InterpPolicy &policy = {});

// Equivalence: no diagnostics on either side, same event count, pairwise
// equal gate names and ordered targets, controls compared as sets.
bool trace_equal(const GateTrace &a, const GateTrace &b);

// One event per line: gate(controls{...}, targets[...]).
std::string trace_to_string(const GateTrace &t);

// Index of the first differing event, if both traces are diagnostics-free.
std::optional<std::size_t> first_divergence(const GateTrace &a,
                                            const GateTrace &b);

}  // namespace qiropt
