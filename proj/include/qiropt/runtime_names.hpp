#pragma once

#include <string>
#include <string_view>

namespace qiropt {

// Canonical identities of the QIR runtime functions the passes understand.
// Callees are matched by suffix so both the full spec prefixes
// ("__quantum__rt__array_create_1d") and abbreviated listing forms
// ("array_create_1d") resolve to the same identity.
enum class RuntimeFn {
  Unknown,
  QubitAllocate,
  QubitRelease,
  QubitAllocateArray,
  QubitReleaseArray,
  ArrayCreate1d,
  ArrayGetElementPtr1d,
  ArrayGetSize1d,
  ArraySlice1d,
  ArrayUpdateAliasCount,
  ArrayUpdateReferenceCount,
  TupleCreate,
  TupleUpdateAliasCount,
  TupleUpdateReferenceCount,
  CaptureUpdateAliasCount,
  CaptureUpdateReferenceCount,
  CallableCreate,
  CallableInvoke,
  CallableMakeAdjoint,
  CallableMakeControlled,
  CallableUpdateAliasCount,
  CallableUpdateReferenceCount,
  ResultGetZero,
  ResultGetOne,
  ResultEqual,
  ResultUpdateReferenceCount,
};

RuntimeFn classify_runtime_callee(std::string_view name);

// True for any quantum-instruction-set callee (gates, measurements).
bool is_qis_callee(std::string_view name);
// True for any runtime-library callee (reference counting, arrays, ...).
bool is_rt_callee(std::string_view name);

// Canonical gate suffix: "__quantum__qis__x__ctl" -> "qis__x__ctl".
std::string qis_gate_suffix(std::string_view name);

// Alias/reference-count bookkeeping calls (no observable effect of their own).
bool is_memory_management(RuntimeFn fn);

// Runtime calls that only read the array they are given; anything else
// taking an %Array* is a mutation barrier for load merging.
bool is_array_readonly(RuntimeFn fn);

}  // namespace qiropt
