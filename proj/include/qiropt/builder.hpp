#pragma once

#include <memory>
#include <string>

#include "qiropt/ir.hpp"

namespace qiropt {

// Appends instructions to one block at a time and hands out the runtime
// declarations with their dialect signatures.
class IrBuilder {
 public:
  explicit IrBuilder(Module &m) : mod_(m) {}

  Module &module() { return mod_; }

  void set_insert_block(BasicBlock *bb) { block_ = bb; }
  BasicBlock *insert_block() const { return block_; }

  // --- runtime declarations (created on first use) ---
  Function *rt_qubit_allocate_array();
  Function *rt_qubit_release_array();
  Function *rt_array_create_1d();
  Function *rt_array_get_element_ptr_1d();
  Function *rt_array_get_size_1d();
  Function *rt_array_slice_1d();
  Function *rt_array_update_alias_count();
  Function *rt_array_update_reference_count();
  Function *rt_tuple_create();
  Function *rt_tuple_update_reference_count();
  Function *rt_callable_create();
  Function *rt_callable_invoke();
  Function *rt_callable_update_reference_count();
  // gate functions, e.g. qis_gate("h__body", 1 qubit) or x__ctl
  Function *qis_single(const std::string &suffix);      // void(%Qubit*)
  Function *qis_controlled(const std::string &suffix);  // void(%Array*, %Qubit*)

  // --- appenders ---
  Value *call(Function *callee, std::vector<Value *> args,
              std::string hint = "tmp", bool tail = false);
  void vcall(Function *callee, std::vector<Value *> args, bool tail = false);
  Value *load(TypeRef ty, Value *ptr, std::string hint = "tmp");
  void store(Value *val, Value *ptr);
  Value *bitcast(Value *v, TypeRef to, std::string hint = "tmp");
  void br(BasicBlock *target);
  void cond_br(Value *cond, BasicBlock *t, BasicBlock *f);
  Value *icmp(ICmpPred pred, Value *a, Value *b, std::string hint = "tmp");
  Value *binop(BinOpKind k, Value *a, Value *b, std::string hint = "tmp");
  Value *phi(TypeRef ty, std::vector<Value *> vals,
             std::vector<BasicBlock *> blocks, std::string hint = "tmp");
  void ret(Value *v = nullptr);

  // The three-instruction qubit fetch: element-pointer call, bitcast to
  // %Qubit**, load %Qubit*.
  Value *load_qubit(Value *array, Value *index, const std::string &hint = "q");

  Module &mod_;
  BasicBlock *block_ = nullptr;
};

}  // namespace qiropt
