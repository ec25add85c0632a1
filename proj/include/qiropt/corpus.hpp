#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "qiropt/ir.hpp"

namespace qiropt {

enum class GateKind { H, X, T, Tdg, CNOT, CCX, SWAP };

// kLoopVar as a qubit index means "the enclosing loop's induction variable".
inline constexpr int kLoopVar = -1;

struct GateSpec {
  GateKind kind = GateKind::H;
  std::vector<int> qubits;
  bool operator==(const GateSpec &) const = default;
};

// A repeat block: `count` iterations of `body`, where body gates may index
// qubits by kLoopVar. Counts equal to nQubits can be lowered as loops bounded
// by the array's runtime size.
struct RepeatSpec {
  int count = 0;
  std::vector<GateSpec> body;
  bool operator==(const RepeatSpec &) const = default;
};

using CircuitItem = std::variant<GateSpec, RepeatSpec>;

struct CircuitSpec {
  std::string name;
  int n_qubits = 0;
  std::vector<CircuitItem> items;
  bool operator==(const CircuitSpec &) const = default;
};

struct EmitterStyle {
  bool redundant_loads = true;
  bool redundant_creates = true;
  bool wrap_controlled_gates = true;  // emit Intrinsic__*__body wrappers
  enum class LoopForm { UnrolledSource, RuntimeSizeLoop };
  LoopForm loop_form = LoopForm::UnrolledSource;
  // Emit one operation dispatched through a callable table (create + invoke).
  bool callable_demo = false;
};

struct NamedCircuit {
  CircuitSpec spec;
  EmitterStyle style;
};

class InvalidSpec : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Validates arities and index bounds; throws InvalidSpec.
void check_spec(const CircuitSpec &spec);

// CCX lowered to the H/T/T†/CNOT sequence of the standard decomposition,
// SWAP to three CNOTs. Only runtime 1- and 2-qubit gates remain.
std::vector<GateSpec> expand_gate(const GateSpec &g);

// Number of runtime gates the spec produces after expansion.
std::size_t expanded_gate_count(const CircuitSpec &spec);

// Emits Q#-compiler-style QIR: one entry function, one qubit-array
// allocation, a fresh load idiom per gate operand (redundant_loads) and a
// fresh control-array construction per controlled gate (redundant_creates).
std::unique_ptr<Module> emit_qir(const CircuitSpec &spec,
                                 const EmitterStyle &style);

// toffoli_decomposition, grover_like, and the seeded scaling family.
std::vector<NamedCircuit> builtin_corpus(std::uint64_t seed = 1);
// nullptr-safe lookup by name.
const NamedCircuit *find_builtin(const std::vector<NamedCircuit> &corpus,
                                 const std::string &name);

// Seeded random circuit over the fixed gate-kind mix (40% one-qubit,
// 45% CNOT, 10% SWAP, 5% CCX), sized by expanded gate count.
CircuitSpec random_circuit(std::string name, int n_qubits,
                           std::size_t target_gates, std::uint64_t seed);

class SchemaError : public std::runtime_error {
 public:
  explicit SchemaError(const std::string &field)
      : std::runtime_error("circuit schema error: " + field), field(field) {}
  std::string field;
};

// Circuit document IO (JSON; deterministic field order on save).
CircuitSpec load_circuit_file(const std::string &path);
void save_circuit_file(const CircuitSpec &spec, const std::string &path);
CircuitSpec circuit_from_json_text(const std::string &text);
std::string circuit_to_json_text(const CircuitSpec &spec);

std::string_view gate_kind_name(GateKind k);

}  // namespace qiropt
