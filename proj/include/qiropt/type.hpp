#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace qiropt {

class Type;
using TypeRef = const Type *;

// Immutable, interned IR types. Pointer equality is type equality.
//
// The dialect is deliberately small: void, i1/i8/i64, the opaque runtime
// types (%Qubit, %Array, ...), %Range, pointers up to depth two, function
// signatures, and constant arrays of function pointers (callable tables).
// i8 exists only behind a pointer: @array_get_element_ptr_1d returns i8*.
class Type {
 public:
  enum class Kind { Void, Int, Opaque, Ref, Range, FuncSig, ConstArray };

  Kind kind() const { return kind_; }
  bool is_void() const { return kind_ == Kind::Void; }
  bool is_int(unsigned width = 0) const {
    return kind_ == Kind::Int && (width == 0 || int_width_ == width);
  }
  bool is_opaque(std::string_view name = {}) const {
    return kind_ == Kind::Opaque && (name.empty() || opaque_name_ == name);
  }
  bool is_ref() const { return kind_ == Kind::Ref; }
  bool is_range() const { return kind_ == Kind::Range; }
  bool is_func_sig() const { return kind_ == Kind::FuncSig; }
  bool is_const_array() const { return kind_ == Kind::ConstArray; }

  unsigned int_width() const { return int_width_; }
  const std::string &opaque_name() const { return opaque_name_; }
  TypeRef pointee() const { return pointee_; }
  TypeRef return_type() const { return return_type_; }
  const std::vector<TypeRef> &param_types() const { return params_; }
  TypeRef element_type() const { return pointee_; }
  std::size_t array_len() const { return array_len_; }

  // Number of pointer levels, e.g. %Qubit** has ref_depth 2.
  int ref_depth() const {
    int d = 0;
    for (TypeRef t = this; t->is_ref(); t = t->pointee()) ++d;
    return d;
  }

  // Canonical textual spelling, e.g. "%Qubit*" or
  // "[4 x void (%Tuple*, %Tuple*, %Tuple*)*]".
  const std::string &str() const { return spelling_; }

  // Convenience predicates for the common dialect types.
  bool is_ref_to_opaque(std::string_view name) const {
    return is_ref() && pointee()->is_opaque(name);
  }

  static TypeRef void_ty();
  static TypeRef int_ty(unsigned width);
  static TypeRef bool_ty() { return int_ty(1); }
  static TypeRef i64_ty() { return int_ty(64); }
  static TypeRef opaque_ty(std::string_view name);
  static TypeRef ref_ty(TypeRef pointee);
  static TypeRef range_ty();
  static TypeRef func_sig_ty(TypeRef ret, std::vector<TypeRef> params);
  static TypeRef const_array_ty(TypeRef elem, std::size_t len);

  // %Qubit*, %Array*, ... shorthands.
  static TypeRef qubit_ptr() { return ref_ty(opaque_ty("Qubit")); }
  static TypeRef qubit_ptr_ptr() { return ref_ty(qubit_ptr()); }
  static TypeRef array_ptr() { return ref_ty(opaque_ty("Array")); }
  static TypeRef callable_ptr() { return ref_ty(opaque_ty("Callable")); }
  static TypeRef result_ptr() { return ref_ty(opaque_ty("Result")); }
  static TypeRef string_ptr() { return ref_ty(opaque_ty("String")); }
  static TypeRef tuple_ptr() { return ref_ty(opaque_ty("Tuple")); }
  static TypeRef byte_ptr() { return ref_ty(int_ty(8)); }

  // The uniform type of callable function tables:
  // [4 x void (%Tuple*, %Tuple*, %Tuple*)*].
  static TypeRef callable_table();

  Type(const Type &) = delete;
  Type &operator=(const Type &) = delete;

 private:
  Type() = default;
  Type(Type &&) = default;
  static TypeRef intern(Type &&proto);

  Kind kind_ = Kind::Void;
  unsigned int_width_ = 0;
  std::string opaque_name_;
  TypeRef pointee_ = nullptr;
  TypeRef return_type_ = nullptr;
  std::vector<TypeRef> params_;
  std::size_t array_len_ = 0;
  std::string spelling_;
};

}  // namespace qiropt
