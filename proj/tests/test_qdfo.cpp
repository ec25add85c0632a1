#include <doctest.h>

#include <set>

#include "qiropt/builder.hpp"
#include "qiropt/cleanup.hpp"
#include "qiropt/corpus.hpp"
#include "qiropt/interp.hpp"
#include "qiropt/parser.hpp"
#include "qiropt/printer.hpp"
#include "qiropt/qdfo.hpp"
#include "qiropt/runtime_names.hpp"
#include "qiropt/validate.hpp"

using namespace qiropt;

TEST_CASE("range arithmetic") {
  CHECK(range_to_indices({3, -1, 0}) == std::vector<std::int64_t>{3, 2, 1, 0});
  CHECK(range_to_indices({3, -2, 0}) == std::vector<std::int64_t>{3, 1});
  CHECK(range_to_indices({0, 1, 0}) == std::vector<std::int64_t>{0});
  CHECK(range_to_indices({0, -1, 4}).empty());
  CHECK_THROWS_AS(range_to_indices({0, 0, 4}), ZeroStep);
}

TEST_CASE("slice provenance composes through nested slices") {
  auto m = parse_module(R"(
define void @main() {
entry:
  %qs = call %Array* @__quantum__rt__qubit_allocate_array(i64 5)
  %slice_1 = call %Array* @__quantum__rt__array_slice_1d(%Array* %qs, {i64 3, i64 -1, i64 0}, i1 true)
  %slice_2 = call %Array* @__quantum__rt__array_slice_1d(%Array* %slice_1, {i64 3, i64 -2, i64 0}, i1 true)
  %n = add i64 1, 1
  call void @__quantum__rt__qubit_release_array(%Array* %qs)
  ret void
}
)");
  Function *f = m->find_function("main");
  SliceInfoList slices = compute_slices(*f);
  REQUIRE(slices.size() == 2);

  CHECK(slices[0].tag == SliceInfo::Tag::Array);
  CHECK(slices[0].q_ref == std::vector<std::int64_t>{3, 2, 1, 0});

  CHECK(slices[1].tag == SliceInfo::Tag::Slice);
  CHECK(slices[1].q_ref == std::vector<std::int64_t>{0, 2});
  // both trace back to the one allocation
  CHECK(slices[0].slice_from_instr == slices[1].slice_from_instr);

  // non-slice instructions leave the accumulator unchanged
  SliceInfoList acc;
  Instruction *add = nullptr;
  f->for_each_instruction([&](Instruction *in) {
    if (in->opcode() == Opcode::BinOp) add = in;
    return true;
  });
  slice_calculating(add, acc);
  CHECK(acc.empty());
}

TEST_CASE("out-of-range slice positions are skipped with a diagnostic") {
  auto m = parse_module(R"(
define void @main() {
entry:
  %qs = call %Array* @__quantum__rt__qubit_allocate_array(i64 2)
  %s = call %Array* @__quantum__rt__array_slice_1d(%Array* %qs, {i64 5, i64 -1, i64 0}, i1 true)
  ret void
}
)");
  DiagList diags;
  SliceInfoList slices = compute_slices(*m->find_function("main"), &diags);
  CHECK(slices.empty());
  REQUIRE(!diags.empty());
  CHECK(diags[0].code == "IndexOutOfBounds");
}

TEST_CASE("toffoli corpus yields 21 load idioms and 6 create groups") {
  auto corpus = builtin_corpus();
  const NamedCircuit *toffoli = find_builtin(corpus, "toffoli_decomposition");
  auto m = emit_qir(toffoli->spec, toffoli->style);
  Function *f = m->find_function("main");

  SliceInfoList slices = compute_slices(*f);
  auto loads = collect_load_ops(*f, slices);
  CHECK(loads.size() == 21);
  for (const LoadOpDesc &d : loads) {
    CHECK(d.allocation != nullptr);
    CHECK(d.resolved_qubit == d.index);  // no slices involved
  }
  auto groups = collect_create_ops(*f);
  CHECK(groups.size() == 6);
  for (const CreateOpGroup &g : groups) {
    CHECK(g.length == 1);
    CHECK(g.gate_uses.size() == 1);
  }
}

TEST_CASE("loads resolved through slices agree with the interpreter") {
  auto m = parse_module(R"(
define void @main() {
entry:
  %qs = call %Array* @__quantum__rt__qubit_allocate_array(i64 5)
  %slice_1 = call %Array* @__quantum__rt__array_slice_1d(%Array* %qs, {i64 3, i64 -1, i64 0}, i1 true)
  %slice_2 = call %Array* @__quantum__rt__array_slice_1d(%Array* %slice_1, {i64 3, i64 -2, i64 0}, i1 true)
  %0 = call i8* @__quantum__rt__array_get_element_ptr_1d(%Array* %slice_2, i64 1)
  %1 = bitcast i8* %0 to %Qubit**
  %q = load %Qubit*, %Qubit** %1, align 8
  tail call void @__quantum__qis__h__body(%Qubit* %q)
  call void @__quantum__rt__qubit_release_array(%Array* %qs)
  ret void
}
)");
  Function *f = m->find_function("main");
  SliceInfoList slices = compute_slices(*f);
  auto loads = collect_load_ops(*f, slices);
  REQUIRE(loads.size() == 1);
  CHECK(loads[0].resolved_qubit == 2);  // slice_2.qRef[1]

  GateTrace t = interpret(*m);
  REQUIRE(t.events.size() == 1);
  CHECK(t.events[0].targets[0].index == loads[0].resolved_qubit);
}

TEST_CASE("functions without arrays have no load idioms") {
  auto m = parse_module(R"(
define void @main() {
entry:
  ret void
}
)");
  Function *f = m->find_function("main");
  SliceInfoList slices = compute_slices(*f);
  CHECK(collect_load_ops(*f, slices).empty());
}

TEST_CASE("qdfo_load merges the toffoli duplicates down to three") {
  auto corpus = builtin_corpus();
  const NamedCircuit *toffoli = find_builtin(corpus, "toffoli_decomposition");
  auto m = emit_qir(toffoli->spec, toffoli->style);
  Function *f = m->find_function("main");
  GateTrace before = interpret(*m);

  SliceInfoList slices = compute_slices(*f);
  auto loads = collect_load_ops(*f, slices);
  std::size_t merges = qdfo_load(*f, loads, slices);
  CHECK(merges == 18);
  REQUIRE(validate(*m).empty());
  CHECK(trace_equal(before, interpret(*m)));

  // after sweeping the dead idioms, three loads remain
  dce_pure(*m);
  qir_dce(*f);
  SliceInfoList slices2 = compute_slices(*f);
  CHECK(collect_load_ops(*f, slices2).size() == 3);
  CHECK(trace_equal(before, interpret(*m)));
}

TEST_CASE("single-load functions merge nothing") {
  auto m = parse_module(R"(
define void @main() {
entry:
  %qs = call %Array* @__quantum__rt__qubit_allocate_array(i64 1)
  %0 = call i8* @__quantum__rt__array_get_element_ptr_1d(%Array* %qs, i64 0)
  %1 = bitcast i8* %0 to %Qubit**
  %q = load %Qubit*, %Qubit** %1, align 8
  tail call void @__quantum__qis__h__body(%Qubit* %q)
  call void @__quantum__rt__qubit_release_array(%Array* %qs)
  ret void
}
)");
  Function *f = m->find_function("main");
  SliceInfoList slices = compute_slices(*f);
  auto loads = collect_load_ops(*f, slices);
  CHECK(qdfo_load(*f, loads, slices) == 0);
}

TEST_CASE("duplicate loads in sibling branches stay put") {
  auto m = parse_module(R"(
define void @main(i1 %c) {
entry:
  %qs = call %Array* @__quantum__rt__qubit_allocate_array(i64 1)
  br i1 %c, label %then, label %else
then:
  %0 = call i8* @__quantum__rt__array_get_element_ptr_1d(%Array* %qs, i64 0)
  %1 = bitcast i8* %0 to %Qubit**
  %qa = load %Qubit*, %Qubit** %1, align 8
  tail call void @__quantum__qis__h__body(%Qubit* %qa)
  br label %done
else:
  %2 = call i8* @__quantum__rt__array_get_element_ptr_1d(%Array* %qs, i64 0)
  %3 = bitcast i8* %2 to %Qubit**
  %qb = load %Qubit*, %Qubit** %3, align 8
  tail call void @__quantum__qis__x__body(%Qubit* %qb)
  br label %done
done:
  call void @__quantum__rt__qubit_release_array(%Array* %qs)
  ret void
}
)");
  Function *f = m->find_function("main");
  SliceInfoList slices = compute_slices(*f);
  auto loads = collect_load_ops(*f, slices);
  REQUIRE(loads.size() == 2);
  DiagList diags;
  CHECK(qdfo_load(*f, loads, slices, &diags) == 0);
  REQUIRE(!diags.empty());
  CHECK(diags[0].code == "UnorderedLoads");
}

TEST_CASE("mutation barriers block merging across them") {
  auto m = parse_module(R"(
define void @main() {
entry:
  %qs = call %Array* @__quantum__rt__qubit_allocate_array(i64 1)
  %0 = call i8* @__quantum__rt__array_get_element_ptr_1d(%Array* %qs, i64 0)
  %1 = bitcast i8* %0 to %Qubit**
  %qa = load %Qubit*, %Qubit** %1, align 8
  tail call void @__quantum__qis__h__body(%Qubit* %qa)
  %shuffled = call %Array* @__quantum__rt__array_concatenate(%Array* %qs, %Array* %qs)
  %2 = call i8* @__quantum__rt__array_get_element_ptr_1d(%Array* %qs, i64 0)
  %3 = bitcast i8* %2 to %Qubit**
  %qb = load %Qubit*, %Qubit** %3, align 8
  tail call void @__quantum__qis__x__body(%Qubit* %qb)
  ret void
}
)");
  Function *f = m->find_function("main");
  SliceInfoList slices = compute_slices(*f);
  auto loads = collect_load_ops(*f, slices);
  REQUIRE(loads.size() == 2);
  DiagList diags;
  CHECK(qdfo_load(*f, loads, slices, &diags) == 0);
  REQUIRE(!diags.empty());
  CHECK(diags[0].code == "BarrierBlocksMerge");
}

TEST_CASE("qir_dce removes the dangling element-pointer call") {
  // the state after load merging: %5's chain is dead but %5 is a call
  auto m = parse_module(R"(
define void @main() {
entry:
  %qs = call %Array* @__quantum__rt__qubit_allocate_array(i64 1)
  %0 = call i8* @__quantum__rt__array_get_element_ptr_1d(%Array* %qs, i64 0)
  %1 = bitcast i8* %0 to %Qubit**
  %qubit = load %Qubit*, %Qubit** %1, align 8
  tail call void @__quantum__qis__h__body(%Qubit* %qubit)
  %5 = call i8* @__quantum__rt__array_get_element_ptr_1d(%Array* %qs, i64 0)
  tail call void @__quantum__qis__x__body(%Qubit* %qubit)
  call void @__quantum__rt__qubit_release_array(%Array* %qs)
  ret void
}
)");
  Function *f = m->find_function("main");
  std::size_t n = qir_dce(*f);
  CHECK(n == 1);
  std::string text = print_module(*m);
  CHECK(text.find("%5") == std::string::npos);
  REQUIRE(validate(*m).empty());
}

TEST_CASE("qir_dce keeps calls whose results reach gates") {
  auto m = parse_module(R"(
define void @main() {
entry:
  %qs = call %Array* @__quantum__rt__qubit_allocate_array(i64 1)
  %0 = call i8* @__quantum__rt__array_get_element_ptr_1d(%Array* %qs, i64 0)
  %1 = bitcast i8* %0 to %Qubit**
  %q = load %Qubit*, %Qubit** %1, align 8
  tail call void @__quantum__qis__h__body(%Qubit* %q)
  ret void
}
)");
  Function *f = m->find_function("main");
  CHECK(qir_dce(*f) == 0);
}

TEST_CASE("qir_dce removes dead slices together with their bookkeeping") {
  auto m = parse_module(R"(
define void @main() {
entry:
  %qs = call %Array* @__quantum__rt__qubit_allocate_array(i64 4)
  %s = call %Array* @__quantum__rt__array_slice_1d(%Array* %qs, {i64 0, i64 1, i64 3}, i1 true)
  call void @__quantum__rt__array_update_alias_count(%Array* %s, i64 1)
  call void @__quantum__rt__array_update_alias_count(%Array* %s, i64 -1)
  call void @__quantum__rt__array_update_reference_count(%Array* %s, i64 -1)
  call void @__quantum__rt__qubit_release_array(%Array* %qs)
  ret void
}
)");
  Function *f = m->find_function("main");
  CHECK(qir_dce(*f) == 4);  // the slice and its three bookkeeping calls
  REQUIRE(validate(*m).empty());
}

TEST_CASE("result-storing arrays are not control-qubit groups") {
  auto m = parse_module(R"(
define void @main() {
entry:
  %r = call %Result* @__quantum__rt__result_get_zero()
  %arr = call %Array* @__quantum__rt__array_create_1d(i64 1)
  %0 = call i8* @__quantum__rt__array_get_element_ptr_1d(%Array* %arr, i64 0)
  %1 = bitcast i8* %0 to %Result**
  store %Result* %r, %Result** %1, align 8
  ret void
}
)");
  DiagList diags;
  auto groups = collect_create_ops(*m->find_function("main"), {}, &diags);
  CHECK(groups.empty());
}

TEST_CASE("qdfo_create collapses the three single-control groups") {
  // the last-three-CNOTs shape: three arrays, all storing %q
  auto m = parse_module(R"(
define void @main() {
entry:
  %qs = call %Array* @__quantum__rt__qubit_allocate_array(i64 2)
  %0 = call i8* @__quantum__rt__array_get_element_ptr_1d(%Array* %qs, i64 0)
  %1 = bitcast i8* %0 to %Qubit**
  %q = load %Qubit*, %Qubit** %1, align 8
  %2 = call i8* @__quantum__rt__array_get_element_ptr_1d(%Array* %qs, i64 1)
  %3 = bitcast i8* %2 to %Qubit**
  %t = load %Qubit*, %Qubit** %3, align 8
  %ctl = call %Array* @__quantum__rt__array_create_1d(i64 1)
  %4 = call i8* @__quantum__rt__array_get_element_ptr_1d(%Array* %ctl, i64 0)
  %5 = bitcast i8* %4 to %Qubit**
  store %Qubit* %q, %Qubit** %5, align 8
  call void @__quantum__rt__array_update_alias_count(%Array* %ctl, i64 1)
  tail call void @__quantum__qis__x__ctl(%Array* %ctl, %Qubit* %t)
  call void @__quantum__rt__array_update_alias_count(%Array* %ctl, i64 -1)
  call void @__quantum__rt__array_update_reference_count(%Array* %ctl, i64 -1)
  %ctl.1 = call %Array* @__quantum__rt__array_create_1d(i64 1)
  %6 = call i8* @__quantum__rt__array_get_element_ptr_1d(%Array* %ctl.1, i64 0)
  %7 = bitcast i8* %6 to %Qubit**
  store %Qubit* %q, %Qubit** %7, align 8
  call void @__quantum__rt__array_update_alias_count(%Array* %ctl.1, i64 1)
  tail call void @__quantum__qis__x__ctl(%Array* %ctl.1, %Qubit* %t)
  call void @__quantum__rt__array_update_alias_count(%Array* %ctl.1, i64 -1)
  call void @__quantum__rt__array_update_reference_count(%Array* %ctl.1, i64 -1)
  %ctl.2 = call %Array* @__quantum__rt__array_create_1d(i64 1)
  %8 = call i8* @__quantum__rt__array_get_element_ptr_1d(%Array* %ctl.2, i64 0)
  %9 = bitcast i8* %8 to %Qubit**
  store %Qubit* %q, %Qubit** %9, align 8
  call void @__quantum__rt__array_update_alias_count(%Array* %ctl.2, i64 1)
  tail call void @__quantum__qis__x__ctl(%Array* %ctl.2, %Qubit* %t)
  call void @__quantum__rt__array_update_alias_count(%Array* %ctl.2, i64 -1)
  call void @__quantum__rt__array_update_reference_count(%Array* %ctl.2, i64 -1)
  call void @__quantum__rt__qubit_release_array(%Array* %qs)
  ret void
}
)");
  Function *f = m->find_function("main");
  GateTrace before = interpret(*m);
  REQUIRE(before.diagnostics.empty());

  auto groups = collect_create_ops(*f);
  REQUIRE(groups.size() == 3);
  std::size_t pruned = 0;
  std::size_t merges = qdfo_create(*f, std::move(groups), nullptr, &pruned);
  CHECK(merges == 2);
  CHECK(pruned > 0);
  REQUIRE(validate(*m).empty());

  // all three gates now take the first array
  std::string text = print_module(*m);
  CHECK(text.find("%ctl.1") == std::string::npos);
  CHECK(text.find("%ctl.2") == std::string::npos);
  std::size_t gates = 0;
  f->for_each_instruction([&](Instruction *in) {
    if (in->callee_name().find("x__ctl") != std::string::npos) {
      ++gates;
      CHECK(operand_str(in->operand(0)) == "%ctl");
    }
    return true;
  });
  CHECK(gates == 3);
  CHECK(trace_equal(before, interpret(*m)));
}

TEST_CASE("groups with disjoint qubits never merge") {
  auto m = parse_module(R"(
define void @main() {
entry:
  %qs = call %Array* @__quantum__rt__qubit_allocate_array(i64 3)
  %0 = call i8* @__quantum__rt__array_get_element_ptr_1d(%Array* %qs, i64 0)
  %1 = bitcast i8* %0 to %Qubit**
  %a = load %Qubit*, %Qubit** %1, align 8
  %2 = call i8* @__quantum__rt__array_get_element_ptr_1d(%Array* %qs, i64 1)
  %3 = bitcast i8* %2 to %Qubit**
  %b = load %Qubit*, %Qubit** %3, align 8
  %4 = call i8* @__quantum__rt__array_get_element_ptr_1d(%Array* %qs, i64 2)
  %5 = bitcast i8* %4 to %Qubit**
  %t = load %Qubit*, %Qubit** %5, align 8
  %ctl = call %Array* @__quantum__rt__array_create_1d(i64 1)
  %6 = call i8* @__quantum__rt__array_get_element_ptr_1d(%Array* %ctl, i64 0)
  %7 = bitcast i8* %6 to %Qubit**
  store %Qubit* %a, %Qubit** %7, align 8
  tail call void @__quantum__qis__x__ctl(%Array* %ctl, %Qubit* %t)
  call void @__quantum__rt__array_update_reference_count(%Array* %ctl, i64 -1)
  %ctl.1 = call %Array* @__quantum__rt__array_create_1d(i64 1)
  %8 = call i8* @__quantum__rt__array_get_element_ptr_1d(%Array* %ctl.1, i64 0)
  %9 = bitcast i8* %8 to %Qubit**
  store %Qubit* %b, %Qubit** %9, align 8
  tail call void @__quantum__qis__x__ctl(%Array* %ctl.1, %Qubit* %t)
  call void @__quantum__rt__array_update_reference_count(%Array* %ctl.1, i64 -1)
  call void @__quantum__rt__qubit_release_array(%Array* %qs)
  ret void
}
)");
  Function *f = m->find_function("main");
  auto groups = collect_create_ops(*f);
  REQUIRE(groups.size() == 2);
  CHECK(qdfo_create(*f, std::move(groups)) == 0);
}

TEST_CASE("bookkeeping between the first and last gate use is pruned") {
  // the post-merge shape: one array, two gates, with the premature release
  // and re-increment sitting between them
  auto m = parse_module(R"(
define void @main() {
entry:
  %qs = call %Array* @__quantum__rt__qubit_allocate_array(i64 2)
  %0 = call i8* @__quantum__rt__array_get_element_ptr_1d(%Array* %qs, i64 0)
  %1 = bitcast i8* %0 to %Qubit**
  %q = load %Qubit*, %Qubit** %1, align 8
  %2 = call i8* @__quantum__rt__array_get_element_ptr_1d(%Array* %qs, i64 1)
  %3 = bitcast i8* %2 to %Qubit**
  %t = load %Qubit*, %Qubit** %3, align 8
  %ctl = call %Array* @__quantum__rt__array_create_1d(i64 1)
  %4 = call i8* @__quantum__rt__array_get_element_ptr_1d(%Array* %ctl, i64 0)
  %5 = bitcast i8* %4 to %Qubit**
  store %Qubit* %q, %Qubit** %5, align 8
  call void @__quantum__rt__array_update_alias_count(%Array* %ctl, i64 1)
  tail call void @__quantum__qis__x__ctl(%Array* %ctl, %Qubit* %t)
  call void @__quantum__rt__array_update_alias_count(%Array* %ctl, i64 -1)
  call void @__quantum__rt__array_update_reference_count(%Array* %ctl, i64 -1)
  call void @__quantum__rt__array_update_alias_count(%Array* %ctl, i64 1)
  tail call void @__quantum__qis__x__ctl(%Array* %ctl, %Qubit* %t)
  call void @__quantum__rt__array_update_alias_count(%Array* %ctl, i64 -1)
  call void @__quantum__rt__array_update_reference_count(%Array* %ctl, i64 -1)
  call void @__quantum__rt__qubit_release_array(%Array* %qs)
  ret void
}
)");
  Function *f = m->find_function("main");
  // the input really is broken: the array is released between its gate uses
  GateTrace broken = interpret(*m);
  CHECK(!broken.diagnostics.empty());

  auto groups = collect_create_ops(*f);
  REQUIRE(groups.size() == 1);
  std::size_t removed = mmo(*f, groups[0]);
  CHECK(removed == 3);  // alias(-1), reference(-1), alias(+1)
  REQUIRE(validate(*m).empty());

  // the leading increment and the trailing decrement/release pair survive
  std::vector<std::string> mgmt_order;
  f->for_each_instruction([&](Instruction *in) {
    RuntimeFn k = classify_runtime_callee(in->callee_name());
    if (k == RuntimeFn::ArrayUpdateAliasCount)
      mgmt_order.push_back("alias" +
                           std::to_string(in->operand(1)->int_value()));
    if (k == RuntimeFn::ArrayUpdateReferenceCount)
      mgmt_order.push_back("ref" +
                           std::to_string(in->operand(1)->int_value()));
    return true;
  });
  CHECK(mgmt_order == std::vector<std::string>{"alias1", "alias-1", "ref-1"});

  GateTrace fixed = interpret(*m);
  CHECK(fixed.diagnostics.empty());
  CHECK(fixed.events.size() == 2);

  // a second pass removes nothing
  auto groups2 = collect_create_ops(*f);
  REQUIRE(groups2.size() == 1);
  CHECK(mmo(*f, groups2[0]) == 0);
}

TEST_CASE("single-gate groups have nothing strictly between") {
  auto corpus = builtin_corpus();
  const NamedCircuit *toffoli = find_builtin(corpus, "toffoli_decomposition");
  auto m = emit_qir(toffoli->spec, toffoli->style);
  Function *f = m->find_function("main");
  auto groups = collect_create_ops(*f);
  REQUIRE(!groups.empty());
  CHECK(mmo(*f, groups[0]) == 0);
}

TEST_CASE("arrays escaping to unknown calls are left untouched") {
  auto m = parse_module(R"(
define void @main() {
entry:
  %qs = call %Array* @__quantum__rt__qubit_allocate_array(i64 2)
  %0 = call i8* @__quantum__rt__array_get_element_ptr_1d(%Array* %qs, i64 0)
  %1 = bitcast i8* %0 to %Qubit**
  %q = load %Qubit*, %Qubit** %1, align 8
  %2 = call i8* @__quantum__rt__array_get_element_ptr_1d(%Array* %qs, i64 1)
  %3 = bitcast i8* %2 to %Qubit**
  %t = load %Qubit*, %Qubit** %3, align 8
  %ctl = call %Array* @__quantum__rt__array_create_1d(i64 1)
  %4 = call i8* @__quantum__rt__array_get_element_ptr_1d(%Array* %ctl, i64 0)
  %5 = bitcast i8* %4 to %Qubit**
  store %Qubit* %q, %Qubit** %5, align 8
  tail call void @__quantum__qis__x__ctl(%Array* %ctl, %Qubit* %t)
  call void @__quantum__rt__array_update_alias_count(%Array* %ctl, i64 -1)
  tail call void @__quantum__qis__x__ctl(%Array* %ctl, %Qubit* %t)
  call void @somewhere__else(%Array* %ctl)
  call void @__quantum__rt__qubit_release_array(%Array* %qs)
  ret void
}
)");
  Function *f = m->find_function("main");
  DiagList diags;
  auto groups = collect_create_ops(*f, {}, &diags);
  // the escape keeps it out of the tracked groups entirely
  CHECK(groups.empty());
  REQUIRE(!diags.empty());
}

TEST_CASE("toffoli end-to-end: 21/6 collapse to 3/2 within two rounds") {
  auto corpus = builtin_corpus();
  const NamedCircuit *toffoli = find_builtin(corpus, "toffoli_decomposition");
  auto m = emit_qir(toffoli->spec, toffoli->style);
  GateTrace before = interpret(*m);

  OptimizationReport report = run_workflow(m);
  REQUIRE(validate(*m).empty());

  CHECK(report.before.load_ops == 21);
  CHECK(report.before.create_ops == 6);
  CHECK(report.after.load_ops == 3);
  CHECK(report.after.create_ops == 2);
  CHECK(report.iterations <= 2);
  CHECK(report.fixpoint_reached);
  CHECK(report.counters.load_merges == 18);
  CHECK(report.counters.create_merges == 4);
  // four sets of bookkeeping calls disappear with the merged groups
  CHECK(report.counters.mmo_removed == 12);

  CHECK(trace_equal(before, interpret(*m)));

  // a further application changes nothing
  OptimizationReport again = run_workflow(m);
  CHECK(again.counters.total() == 0);
  CHECK(again.before.instructions == again.after.instructions);
}

TEST_CASE("empty module produces an all-zero report") {
  auto m = parse_module("");
  OptimizationReport report = run_workflow(m);
  CHECK(report.before.instructions == 0);
  CHECK(report.after.instructions == 0);
  CHECK(report.counters.total() == 0);
}
