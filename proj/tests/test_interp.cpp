#include <doctest.h>

#include "qiropt/builder.hpp"
#include "qiropt/corpus.hpp"
#include "qiropt/interp.hpp"
#include "qiropt/parser.hpp"
#include "qiropt/validate.hpp"

using namespace qiropt;

namespace {

// The decomposed-Toffoli gate sequence, enumerated column by column from the
// circuit (controls c1=q0, c2=q1, target t=q2). This is the reference the
// generator and interpreter must both reproduce.
struct Expect {
  const char *gate;
  std::vector<int> controls;
  std::vector<int> targets;
};
const std::vector<Expect> kToffoliTrace = {
    {"qis__h__body", {}, {2}},    {"qis__x__ctl", {1}, {2}},
    {"qis__t__adj", {}, {2}},     {"qis__x__ctl", {0}, {2}},
    {"qis__t__body", {}, {2}},    {"qis__x__ctl", {1}, {2}},
    {"qis__t__adj", {}, {2}},     {"qis__x__ctl", {0}, {2}},
    {"qis__t__body", {}, {1}},    {"qis__t__body", {}, {2}},
    {"qis__x__ctl", {0}, {1}},    {"qis__h__body", {}, {2}},
    {"qis__t__body", {}, {0}},    {"qis__t__adj", {}, {1}},
    {"qis__x__ctl", {0}, {1}},
};

}  // namespace

TEST_CASE("toffoli corpus trace matches the enumerated circuit") {
  auto corpus = builtin_corpus();
  const NamedCircuit *toffoli = find_builtin(corpus, "toffoli_decomposition");
  REQUIRE(toffoli != nullptr);
  auto m = emit_qir(toffoli->spec, toffoli->style);
  REQUIRE(validate(*m).empty());

  GateTrace t = interpret(*m);
  CHECK(t.diagnostics.empty());
  REQUIRE(t.events.size() == kToffoliTrace.size());
  for (std::size_t i = 0; i < t.events.size(); ++i) {
    const GateEvent &ev = t.events[i];
    const Expect &ex = kToffoliTrace[i];
    CHECK(ev.gate == ex.gate);
    REQUIRE(ev.targets.size() == ex.targets.size());
    for (std::size_t j = 0; j < ex.targets.size(); ++j) {
      CHECK(ev.targets[j].alloc == 0);
      CHECK(ev.targets[j].index == ex.targets[j]);
    }
    REQUIRE(ev.controls.size() == ex.controls.size());
    for (std::size_t j = 0; j < ex.controls.size(); ++j)
      CHECK(ev.controls[j].index == ex.controls[j]);
  }
}

TEST_CASE("allocate-and-release program yields an empty clean trace") {
  const char *text = R"(
define void @main() {
entry:
  %qs = call %Array* @__quantum__rt__qubit_allocate_array(i64 4)
  call void @__quantum__rt__qubit_release_array(%Array* %qs)
  ret void
}
)";
  auto m = parse_module(text);
  GateTrace t = interpret(*m);
  CHECK(t.events.empty());
  CHECK(t.diagnostics.empty());
}

TEST_CASE("trace_equal compares controls as sets") {
  GateTrace a, b;
  a.events.push_back({"qis__x__ctl", {{0, 1}, {0, 2}}, {{0, 0}}});
  b.events.push_back({"qis__x__ctl", {{0, 2}, {0, 1}}, {{0, 0}}});
  CHECK(trace_equal(a, a));
  CHECK(trace_equal(a, b));

  GateTrace c = a;
  c.events[0].gate = "qis__h__body";
  CHECK(!trace_equal(a, c));
  CHECK(first_divergence(a, c) == 0);

  GateTrace d = a;
  d.events[0].targets = {{0, 3}};
  CHECK(!trace_equal(a, d));

  // diagnostics poison equality, even reflexively
  GateTrace e = a;
  e.diagnostics.push_back({"UseAfterRelease", "", ""});
  CHECK(!trace_equal(e, e));
}

TEST_CASE("premature release is caught as a use-after-release diagnostic") {
  // the broken shape: the control array's reference count hits zero between
  // its two gate uses
  const char *text = R"(
define void @main() {
entry:
  %qs = call %Array* @__quantum__rt__qubit_allocate_array(i64 2)
  %0 = call i8* @__quantum__rt__array_get_element_ptr_1d(%Array* %qs, i64 0)
  %1 = bitcast i8* %0 to %Qubit**
  %q0 = load %Qubit*, %Qubit** %1, align 8
  %2 = call i8* @__quantum__rt__array_get_element_ptr_1d(%Array* %qs, i64 1)
  %3 = bitcast i8* %2 to %Qubit**
  %q1 = load %Qubit*, %Qubit** %3, align 8
  %ctl = call %Array* @__quantum__rt__array_create_1d(i64 1)
  %4 = call i8* @__quantum__rt__array_get_element_ptr_1d(%Array* %ctl, i64 0)
  %5 = bitcast i8* %4 to %Qubit**
  store %Qubit* %q0, %Qubit** %5, align 8
  call void @__quantum__rt__array_update_alias_count(%Array* %ctl, i64 1)
  tail call void @__quantum__qis__x__ctl(%Array* %ctl, %Qubit* %q1)
  call void @__quantum__rt__array_update_alias_count(%Array* %ctl, i64 -1)
  call void @__quantum__rt__array_update_reference_count(%Array* %ctl, i64 -1)
  tail call void @__quantum__qis__x__ctl(%Array* %ctl, %Qubit* %q1)
  call void @__quantum__rt__qubit_release_array(%Array* %qs)
  ret void
}
)";
  auto m = parse_module(text);
  GateTrace t = interpret(*m);
  bool found = false;
  for (const Diagnostic &d : t.diagnostics)
    if (d.code == "UseAfterRelease") found = true;
  CHECK(found);
}

TEST_CASE("slice handles resolve to the originating allocation's qubits") {
  const char *text = R"(
define void @main() {
entry:
  %qs = call %Array* @__quantum__rt__qubit_allocate_array(i64 5)
  %s1 = call %Array* @__quantum__rt__array_slice_1d(%Array* %qs, {i64 3, i64 -1, i64 0}, i1 true)
  %s2 = call %Array* @__quantum__rt__array_slice_1d(%Array* %s1, {i64 3, i64 -2, i64 0}, i1 true)
  %0 = call i8* @__quantum__rt__array_get_element_ptr_1d(%Array* %s2, i64 0)
  %1 = bitcast i8* %0 to %Qubit**
  %q = load %Qubit*, %Qubit** %1, align 8
  tail call void @__quantum__qis__h__body(%Qubit* %q)
  %2 = call i8* @__quantum__rt__array_get_element_ptr_1d(%Array* %s2, i64 1)
  %3 = bitcast i8* %2 to %Qubit**
  %q1 = load %Qubit*, %Qubit** %3, align 8
  tail call void @__quantum__qis__h__body(%Qubit* %q1)
  call void @__quantum__rt__qubit_release_array(%Array* %qs)
  ret void
}
)";
  auto m = parse_module(text);
  GateTrace t = interpret(*m);
  REQUIRE(t.diagnostics.empty());
  REQUIRE(t.events.size() == 2);
  // s1 = qs[3,2,1,0]; s2 = s1[3], s1[1] = qs[0], qs[2]
  CHECK(t.events[0].targets[0].index == 0);
  CHECK(t.events[1].targets[0].index == 2);
}

TEST_CASE("measurement outcomes follow the policy vector") {
  const char *text = R"(
define void @main() {
entry:
  %qs = call %Array* @__quantum__rt__qubit_allocate_array(i64 1)
  %0 = call i8* @__quantum__rt__array_get_element_ptr_1d(%Array* %qs, i64 0)
  %1 = bitcast i8* %0 to %Qubit**
  %q = load %Qubit*, %Qubit** %1, align 8
  %r = call %Result* @__quantum__qis__m__body(%Qubit* %q)
  %one = call %Result* @__quantum__rt__result_get_one()
  %is1 = call i1 @__quantum__rt__result_equal(%Result* %r, %Result* %one)
  br i1 %is1, label %then, label %done
then:
  tail call void @__quantum__qis__x__body(%Qubit* %q)
  br label %done
done:
  call void @__quantum__rt__qubit_release_array(%Array* %qs)
  ret void
}
)";
  auto m = parse_module(text);

  GateTrace zero = interpret(*m);  // default all-zero policy
  REQUIRE(zero.diagnostics.empty());
  CHECK(zero.events.size() == 1);  // just the measurement

  InterpPolicy ones;
  ones.measurement_outcomes = {1};
  GateTrace one = interpret(*m, "main", ones);
  REQUIRE(one.diagnostics.empty());
  CHECK(one.events.size() == 2);  // measurement + conditional x
  CHECK(one.events[1].gate == "qis__x__body");
}

TEST_CASE("step budget is enforced") {
  const char *text = R"(
define void @main() {
entry:
  br label %spin
spin:
  br label %spin
}
)";
  auto m = parse_module(text);
  InterpPolicy tight;
  tight.max_steps = 1000;
  CHECK_THROWS_AS(interpret(*m, "main", tight), StepBudgetExceeded);
}

TEST_CASE("unknown runtime calls warn by default and trap on request") {
  const char *text = R"(
define void @main() {
entry:
  call void @__quantum__rt__message_record_output(i64 0)
  ret void
}
)";
  auto m = parse_module(text);
  GateTrace t = interpret(*m);
  REQUIRE(t.diagnostics.size() == 1);
  CHECK(t.diagnostics[0].code == "UnknownRuntimeFunctionWarning");

  InterpPolicy strict;
  strict.trap_unknown_rt = true;
  CHECK_THROWS_AS(interpret(*m, "main", strict), UnknownRuntimeFunction);
}

TEST_CASE("unknown quantum instructions become opaque events") {
  const char *text = R"(
define void @main() {
entry:
  %qs = call %Array* @__quantum__rt__qubit_allocate_array(i64 1)
  %0 = call i8* @__quantum__rt__array_get_element_ptr_1d(%Array* %qs, i64 0)
  %1 = bitcast i8* %0 to %Qubit**
  %q = load %Qubit*, %Qubit** %1, align 8
  tail call void @__quantum__qis__rz__body(%Qubit* %q)
  call void @__quantum__rt__qubit_release_array(%Array* %qs)
  ret void
}
)";
  auto m = parse_module(text);
  GateTrace t = interpret(*m);
  REQUIRE(t.events.size() == 1);
  CHECK(t.events[0].gate == "qis__rz__body");
  CHECK(t.diagnostics.empty());
}
