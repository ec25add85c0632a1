#include <doctest.h>

#include <filesystem>

#include "qiropt/corpus.hpp"
#include "qiropt/interp.hpp"
#include "qiropt/parser.hpp"
#include "qiropt/printer.hpp"
#include "qiropt/qdfo.hpp"
#include "qiropt/runtime_names.hpp"
#include "qiropt/validate.hpp"

using namespace qiropt;

TEST_CASE("toffoli redundancy counts match the circuit arithmetic") {
  auto corpus = builtin_corpus();
  const NamedCircuit *toffoli = find_builtin(corpus, "toffoli_decomposition");
  REQUIRE(toffoli != nullptr);
  CHECK(toffoli->spec.n_qubits == 3);
  CHECK(expanded_gate_count(toffoli->spec) == 15);

  auto m = emit_qir(toffoli->spec, toffoli->style);
  IdiomCounts counts = count_idioms(*m);
  // 9 one-qubit gates + 6 controlled, so 9 + 2*6 loads and 6 control arrays
  CHECK(counts.load_ops == 21);
  CHECK(counts.create_ops == 6);
}

TEST_CASE("single-gate spec with redundancy on") {
  CircuitSpec spec;
  spec.name = "one_h";
  spec.n_qubits = 1;
  spec.items = {GateSpec{GateKind::H, {0}}};
  EmitterStyle style;
  style.wrap_controlled_gates = false;
  auto m = emit_qir(spec, style);
  IdiomCounts counts = count_idioms(*m);
  CHECK(counts.load_ops == 1);
  CHECK(counts.create_ops == 0);
}

TEST_CASE("ground-truth counters for random specs") {
  for (std::uint64_t seed : {7ULL, 21ULL, 99ULL}) {
    CircuitSpec spec = random_circuit("r", 6, 64, seed);
    EmitterStyle style;
    style.wrap_controlled_gates = false;
    auto m = emit_qir(spec, style);
    REQUIRE(validate(*m).empty());

    std::size_t loads = 0, creates = 0;
    for (const CircuitItem &item : spec.items)
      for (const GateSpec &g : expand_gate(std::get<GateSpec>(item))) {
        loads += g.qubits.size();
        creates += g.kind == GateKind::CNOT ? 1 : 0;
      }
    IdiomCounts counts = count_idioms(*m);
    CHECK(counts.load_ops == loads);
    CHECK(counts.create_ops == creates);
  }
}

TEST_CASE("emission is deterministic under a fixed seed") {
  CircuitSpec a = random_circuit("x", 8, 50, 1234);
  CircuitSpec b = random_circuit("x", 8, 50, 1234);
  CHECK(a == b);
  EmitterStyle style;
  auto ma = emit_qir(a, style);
  auto mb = emit_qir(b, style);
  CHECK(print_module(*ma) == print_module(*mb));

  CircuitSpec c = random_circuit("x", 8, 50, 4321);
  CHECK(!(a == c));
}

TEST_CASE("builtin corpus programs validate and interpret cleanly") {
  for (const NamedCircuit &c : builtin_corpus()) {
    CAPTURE(c.spec.name);
    if (c.spec.name == "scaling_6723") continue;  // covered by acceptance
    auto m = emit_qir(c.spec, c.style);
    CHECK(validate(*m).empty());
    GateTrace t = interpret(*m);
    CHECK(t.diagnostics.empty());
    CHECK(t.events.size() == expanded_gate_count(c.spec) +
                                 (c.style.callable_demo ? 1 : 0));
  }
}

TEST_CASE("scaling family hits its nominal gate counts") {
  auto corpus = builtin_corpus();
  for (std::size_t gates : {18u, 100u, 500u, 2000u}) {
    const NamedCircuit *c =
        find_builtin(corpus, "scaling_" + std::to_string(gates));
    REQUIRE(c != nullptr);
    CHECK(expanded_gate_count(c->spec) == gates);
  }
}

TEST_CASE("grover_like exposes the preprocessing workload") {
  auto corpus = builtin_corpus();
  const NamedCircuit *grover = find_builtin(corpus, "grover_like");
  REQUIRE(grover != nullptr);
  auto m = emit_qir(grover->spec, grover->style);
  REQUIRE(validate(*m).empty());

  std::size_t size_calls = 0, invokes = 0, wrapped_cnots = 0;
  m->find_function("main")->for_each_instruction([&](Instruction *in) {
    if (in->opcode() != Opcode::Call) return true;
    switch (classify_runtime_callee(in->callee_name())) {
      case RuntimeFn::ArrayGetSize1d: ++size_calls; break;
      case RuntimeFn::CallableInvoke: ++invokes; break;
      default: break;
    }
    if (in->callee_name() == "Intrinsic__CNOT__body") ++wrapped_cnots;
    return true;
  });
  CHECK(size_calls == 9);  // one per layer loop
  CHECK(invokes == 1);
  CHECK(wrapped_cnots == 6);
}

TEST_CASE("circuit files round-trip through save and load") {
  namespace fs = std::filesystem;
  fs::path tmp = fs::temp_directory_path() / "qiropt-circuit-test.json";
  for (const NamedCircuit &c : builtin_corpus()) {
    save_circuit_file(c.spec, tmp.string());
    CircuitSpec loaded = load_circuit_file(tmp.string());
    CHECK(loaded == c.spec);
  }
  fs::remove(tmp);
}

TEST_CASE("toffoli circuit document equals the builtin input") {
  const char *doc = R"({
  "nQubits": 3,
  "gates": [ {"gate": "ccx", "qubits": [0, 1, 2]} ]
})";
  CircuitSpec spec = circuit_from_json_text(doc);
  auto corpus = builtin_corpus();
  const NamedCircuit *toffoli = find_builtin(corpus, "toffoli_decomposition");
  CHECK(spec.n_qubits == toffoli->spec.n_qubits);
  CHECK(spec.items == toffoli->spec.items);
}

TEST_CASE("schema violations are rejected") {
  CHECK_THROWS_AS(
      circuit_from_json_text(R"({"nQubits": 3, "gates": [{"gate": "h", "qubits": [5]}]})"),
      SchemaError);
  CHECK_THROWS_AS(circuit_from_json_text(R"({"gates": []})"), SchemaError);
  CHECK_THROWS_AS(circuit_from_json_text("not json"), SchemaError);
  CHECK_THROWS_AS(
      circuit_from_json_text(R"({"nQubits": 2, "gates": [{"gate": "cnot", "qubits": [0]}]})"),
      SchemaError);
  CHECK_THROWS_AS(load_circuit_file("/nonexistent/x.json"), SchemaError);
}

TEST_CASE("corpus emissions print and re-parse to a fixpoint") {
  for (const NamedCircuit &c : builtin_corpus()) {
    if (c.spec.name == "scaling_6723" || c.spec.name == "scaling_2000")
      continue;  // big ones covered by acceptance
    auto m = emit_qir(c.spec, c.style);
    std::string p1 = print_module(*m);
    auto m2 = parse_module(p1);
    CHECK(print_module(*m2) == p1);
  }
}
