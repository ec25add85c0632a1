#include "qiropt/builder.hpp"

namespace qiropt {

namespace {
constexpr const char *kRt = "__quantum__rt__";
constexpr const char *kQis = "__quantum__qis__";
}  // namespace

Function *IrBuilder::rt_qubit_allocate_array() {
  return mod_.get_or_declare(std::string(kRt) + "qubit_allocate_array",
                             Type::array_ptr(), {Type::i64_ty()});
}
Function *IrBuilder::rt_qubit_release_array() {
  return mod_.get_or_declare(std::string(kRt) + "qubit_release_array",
                             Type::void_ty(), {Type::array_ptr()});
}
Function *IrBuilder::rt_array_create_1d() {
  return mod_.get_or_declare(std::string(kRt) + "array_create_1d",
                             Type::array_ptr(), {Type::i64_ty()});
}
Function *IrBuilder::rt_array_get_element_ptr_1d() {
  return mod_.get_or_declare(std::string(kRt) + "array_get_element_ptr_1d",
                             Type::byte_ptr(),
                             {Type::array_ptr(), Type::i64_ty()});
}
Function *IrBuilder::rt_array_get_size_1d() {
  return mod_.get_or_declare(std::string(kRt) + "array_get_size_1d",
                             Type::i64_ty(), {Type::array_ptr()});
}
Function *IrBuilder::rt_array_slice_1d() {
  return mod_.get_or_declare(
      std::string(kRt) + "array_slice_1d", Type::array_ptr(),
      {Type::array_ptr(), Type::range_ty(), Type::bool_ty()});
}
Function *IrBuilder::rt_array_update_alias_count() {
  return mod_.get_or_declare(std::string(kRt) + "array_update_alias_count",
                             Type::void_ty(),
                             {Type::array_ptr(), Type::i64_ty()});
}
Function *IrBuilder::rt_array_update_reference_count() {
  return mod_.get_or_declare(std::string(kRt) + "array_update_reference_count",
                             Type::void_ty(),
                             {Type::array_ptr(), Type::i64_ty()});
}
Function *IrBuilder::rt_tuple_create() {
  return mod_.get_or_declare(std::string(kRt) + "tuple_create",
                             Type::tuple_ptr(), {Type::i64_ty()});
}
Function *IrBuilder::rt_tuple_update_reference_count() {
  return mod_.get_or_declare(std::string(kRt) + "tuple_update_reference_count",
                             Type::void_ty(),
                             {Type::tuple_ptr(), Type::i64_ty()});
}
Function *IrBuilder::rt_callable_create() {
  return mod_.get_or_declare(
      std::string(kRt) + "callable_create", Type::callable_ptr(),
      {Type::ref_ty(Type::callable_table()), Type::tuple_ptr()});
}
Function *IrBuilder::rt_callable_invoke() {
  return mod_.get_or_declare(
      std::string(kRt) + "callable_invoke", Type::void_ty(),
      {Type::callable_ptr(), Type::tuple_ptr(), Type::tuple_ptr()});
}
Function *IrBuilder::rt_callable_update_reference_count() {
  return mod_.get_or_declare(
      std::string(kRt) + "callable_update_reference_count", Type::void_ty(),
      {Type::callable_ptr(), Type::i64_ty()});
}

Function *IrBuilder::qis_single(const std::string &suffix) {
  return mod_.get_or_declare(std::string(kQis) + suffix, Type::void_ty(),
                             {Type::qubit_ptr()});
}

Function *IrBuilder::qis_controlled(const std::string &suffix) {
  return mod_.get_or_declare(std::string(kQis) + suffix, Type::void_ty(),
                             {Type::array_ptr(), Type::qubit_ptr()});
}

Value *IrBuilder::call(Function *callee, std::vector<Value *> args,
                       std::string hint, bool tail) {
  auto in = mod_.make_call(callee, std::move(args), "", tail);
  if (in->result())
    in->result()->set_name(block_->parent()->unique_name(hint));
  Instruction *raw = block_->append(std::move(in));
  return raw->result();
}

void IrBuilder::vcall(Function *callee, std::vector<Value *> args, bool tail) {
  block_->append(mod_.make_call(callee, std::move(args), "", tail));
}

Value *IrBuilder::load(TypeRef ty, Value *ptr, std::string hint) {
  auto in = mod_.make_load(ty, ptr, block_->parent()->unique_name(hint));
  return block_->append(std::move(in))->result();
}

void IrBuilder::store(Value *val, Value *ptr) {
  block_->append(mod_.make_store(val, ptr));
}

Value *IrBuilder::bitcast(Value *v, TypeRef to, std::string hint) {
  auto in = mod_.make_bitcast(v, to, block_->parent()->unique_name(hint));
  return block_->append(std::move(in))->result();
}

void IrBuilder::br(BasicBlock *target) {
  block_->append(mod_.make_br(target));
}

void IrBuilder::cond_br(Value *cond, BasicBlock *t, BasicBlock *f) {
  block_->append(mod_.make_cond_br(cond, t, f));
}

Value *IrBuilder::icmp(ICmpPred pred, Value *a, Value *b, std::string hint) {
  auto in = mod_.make_icmp(pred, a, b, block_->parent()->unique_name(hint));
  return block_->append(std::move(in))->result();
}

Value *IrBuilder::binop(BinOpKind k, Value *a, Value *b, std::string hint) {
  auto in = mod_.make_binop(k, a, b, block_->parent()->unique_name(hint));
  return block_->append(std::move(in))->result();
}

Value *IrBuilder::phi(TypeRef ty, std::vector<Value *> vals,
                      std::vector<BasicBlock *> blocks, std::string hint) {
  auto in = mod_.make_phi(ty, std::move(vals), std::move(blocks),
                          block_->parent()->unique_name(hint));
  return block_->append(std::move(in))->result();
}

void IrBuilder::ret(Value *v) { block_->append(mod_.make_ret(v)); }

Value *IrBuilder::load_qubit(Value *array, Value *index,
                             const std::string &hint) {
  Value *p = call(rt_array_get_element_ptr_1d(), {array, index}, "elem");
  Value *pp = bitcast(p, Type::qubit_ptr_ptr(), "cast");
  return load(Type::qubit_ptr(), pp, hint);
}

}  // namespace qiropt
