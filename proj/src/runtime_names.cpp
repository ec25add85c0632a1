#include "qiropt/runtime_names.hpp"

#include <array>
#include <utility>

namespace qiropt {

namespace {

constexpr std::pair<std::string_view, RuntimeFn> kSuffixTable[] = {
    {"qubit_allocate_array", RuntimeFn::QubitAllocateArray},
    {"qubit_release_array", RuntimeFn::QubitReleaseArray},
    {"qubit_allocate", RuntimeFn::QubitAllocate},
    {"qubit_release", RuntimeFn::QubitRelease},
    {"array_create_1d", RuntimeFn::ArrayCreate1d},
    {"array_get_element_ptr_1d", RuntimeFn::ArrayGetElementPtr1d},
    {"array_get_size_1d", RuntimeFn::ArrayGetSize1d},
    {"array_slice_1d", RuntimeFn::ArraySlice1d},
    {"array_update_alias_count", RuntimeFn::ArrayUpdateAliasCount},
    {"array_update_reference_count", RuntimeFn::ArrayUpdateReferenceCount},
    {"tuple_create", RuntimeFn::TupleCreate},
    {"tuple_update_alias_count", RuntimeFn::TupleUpdateAliasCount},
    {"tuple_update_reference_count", RuntimeFn::TupleUpdateReferenceCount},
    {"capture_update_alias_count", RuntimeFn::CaptureUpdateAliasCount},
    {"capture_update_reference_count", RuntimeFn::CaptureUpdateReferenceCount},
    {"callable_create", RuntimeFn::CallableCreate},
    {"callable_invoke", RuntimeFn::CallableInvoke},
    {"callable_make_adjoint", RuntimeFn::CallableMakeAdjoint},
    {"callable_make_controlled", RuntimeFn::CallableMakeControlled},
    {"callable_update_alias_count", RuntimeFn::CallableUpdateAliasCount},
    {"callable_update_reference_count",
     RuntimeFn::CallableUpdateReferenceCount},
    {"result_get_zero", RuntimeFn::ResultGetZero},
    {"result_get_one", RuntimeFn::ResultGetOne},
    {"result_equal", RuntimeFn::ResultEqual},
    {"result_update_reference_count", RuntimeFn::ResultUpdateReferenceCount},
};

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() &&
         s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace

RuntimeFn classify_runtime_callee(std::string_view name) {
  for (const auto &[suffix, fn] : kSuffixTable)
    if (ends_with(name, suffix)) return fn;
  return RuntimeFn::Unknown;
}

bool is_qis_callee(std::string_view name) {
  return name.find("qis__") != std::string_view::npos;
}

bool is_rt_callee(std::string_view name) {
  if (is_qis_callee(name)) return false;
  return name.find("__quantum__rt__") != std::string_view::npos ||
         name.find("rt__") != std::string_view::npos ||
         classify_runtime_callee(name) != RuntimeFn::Unknown;
}

std::string qis_gate_suffix(std::string_view name) {
  auto pos = name.find("qis__");
  if (pos == std::string_view::npos) return std::string(name);
  return std::string(name.substr(pos));
}

bool is_memory_management(RuntimeFn fn) {
  switch (fn) {
    case RuntimeFn::ArrayUpdateAliasCount:
    case RuntimeFn::ArrayUpdateReferenceCount:
    case RuntimeFn::TupleUpdateAliasCount:
    case RuntimeFn::TupleUpdateReferenceCount:
    case RuntimeFn::CaptureUpdateAliasCount:
    case RuntimeFn::CaptureUpdateReferenceCount:
    case RuntimeFn::CallableUpdateAliasCount:
    case RuntimeFn::CallableUpdateReferenceCount:
    case RuntimeFn::ResultUpdateReferenceCount:
      return true;
    default:
      return false;
  }
}

bool is_array_readonly(RuntimeFn fn) {
  switch (fn) {
    case RuntimeFn::ArrayGetElementPtr1d:
    case RuntimeFn::ArrayGetSize1d:
    case RuntimeFn::ArraySlice1d:
    case RuntimeFn::ArrayUpdateAliasCount:
    case RuntimeFn::ArrayUpdateReferenceCount:
      return true;
    default:
      return false;
  }
}

}  // namespace qiropt
