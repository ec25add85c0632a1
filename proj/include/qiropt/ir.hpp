#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "qiropt/type.hpp"

namespace qiropt {

class Instruction;
class BasicBlock;
class Function;
class Module;
struct GlobalTable;

struct RangeTriple {
  std::int64_t start = 0;
  std::int64_t step = 0;
  std::int64_t end = 0;
  bool operator==(const RangeTriple &) const = default;
};

enum class ValueKind {
  InstrResult,
  FunctionArg,
  GlobalRef,  // @symbol used as an operand (function table or function)
  IntConst,
  RangeConst,
  NullConst,
};

// SSA value. Owned by the Module arena; identity is pointer identity.
class Value {
 public:
  ValueKind kind() const { return kind_; }
  TypeRef type() const { return type_; }
  const std::string &name() const { return name_; }
  void set_name(std::string n) { name_ = std::move(n); }

  bool is_constant() const {
    return kind_ == ValueKind::IntConst || kind_ == ValueKind::RangeConst ||
           kind_ == ValueKind::NullConst || kind_ == ValueKind::GlobalRef;
  }

  Instruction *def_instr() const { return def_; }
  Function *arg_parent() const { return arg_parent_; }
  int arg_index() const { return arg_index_; }
  std::int64_t int_value() const { return int_val_; }
  const RangeTriple &range_value() const { return range_val_; }
  GlobalTable *referenced_table() const { return table_; }
  Function *referenced_function() const { return fn_; }

  // Constant i64 payload if this is an integer constant.
  std::optional<std::int64_t> as_int_const() const {
    if (kind_ == ValueKind::IntConst) return int_val_;
    return std::nullopt;
  }

 private:
  friend class Module;
  friend class Instruction;
  Value() = default;

  ValueKind kind_ = ValueKind::IntConst;
  TypeRef type_ = nullptr;
  std::string name_;
  Instruction *def_ = nullptr;
  Function *arg_parent_ = nullptr;
  int arg_index_ = -1;
  std::int64_t int_val_ = 0;
  RangeTriple range_val_;
  GlobalTable *table_ = nullptr;
  Function *fn_ = nullptr;
};

enum class Opcode {
  Call,
  Load,
  Store,  // operands: [value, pointer]
  Bitcast,
  Br,  // cond: operands [i1], two targets; uncond: no operands, one target
  ICmp,
  BinOp,
  Phi,
  Ret,       // operands: [] or [value]
  GepConst,  // constant global-table addressing: operands [globalref, idx...]
};

enum class ICmpPred { EQ, NE, SLT, SLE, SGT, SGE };
enum class BinOpKind { Add, Sub, Mul };

class Instruction {
 public:
  Opcode opcode() const { return op_; }
  Value *result() const { return result_; }
  const std::vector<Value *> &operands() const { return operands_; }
  Value *operand(std::size_t i) const { return operands_[i]; }
  std::size_t num_operands() const { return operands_.size(); }
  void set_operand(std::size_t i, Value *v) { operands_[i] = v; }

  BasicBlock *parent() const { return parent_; }
  Function *parent_function() const;
  int ordinal() const { return ordinal_; }
  bool erased() const { return erased_; }

  // Call
  Function *callee() const { return callee_; }
  void set_callee(Function *f) { callee_ = f; }
  bool is_tail() const { return is_tail_; }
  void set_tail(bool t) { is_tail_ = t; }

  // Br
  bool is_conditional() const { return op_ == Opcode::Br && !operands_.empty(); }
  BasicBlock *target_true() const { return target_true_; }
  BasicBlock *target_false() const { return target_false_; }
  void set_targets(BasicBlock *t, BasicBlock *f = nullptr) {
    target_true_ = t;
    target_false_ = f;
  }

  ICmpPred icmp_pred() const { return pred_; }
  BinOpKind binop_kind() const { return binop_; }

  // Phi
  const std::vector<BasicBlock *> &incoming_blocks() const {
    return incoming_blocks_;
  }
  std::vector<BasicBlock *> &incoming_blocks() { return incoming_blocks_; }
  void add_phi_incoming(Value *v, BasicBlock *from) {
    operands_.push_back(v);
    incoming_blocks_.push_back(from);
  }
  void remove_phi_incoming(std::size_t i) {
    operands_.erase(operands_.begin() + static_cast<std::ptrdiff_t>(i));
    incoming_blocks_.erase(incoming_blocks_.begin() +
                           static_cast<std::ptrdiff_t>(i));
  }

  bool is_terminator() const {
    return op_ == Opcode::Br || op_ == Opcode::Ret;
  }

  // Callee name, empty for non-calls.
  const std::string &callee_name() const;

  // Rebinds the result to `v` (parser forward-reference adoption and
  // inliner cloning). `v` must be an InstrResult value.
  void replace_result(Value *v);

 private:
  friend class BasicBlock;
  friend class Function;
  friend class Module;
  friend void erase_instructions(Function &,
                                 const std::unordered_set<Instruction *> &);
  Instruction() = default;

  Opcode op_ = Opcode::Ret;
  Value *result_ = nullptr;
  std::vector<Value *> operands_;
  Function *callee_ = nullptr;
  bool is_tail_ = false;
  BasicBlock *target_true_ = nullptr;
  BasicBlock *target_false_ = nullptr;
  ICmpPred pred_ = ICmpPred::EQ;
  BinOpKind binop_ = BinOpKind::Add;
  std::vector<BasicBlock *> incoming_blocks_;
  BasicBlock *parent_ = nullptr;
  int ordinal_ = -1;
  bool erased_ = false;
};

class BasicBlock {
 public:
  const std::string &name() const { return name_; }
  Function *parent() const { return parent_; }

  const std::vector<std::unique_ptr<Instruction>> &instructions() const {
    return insts_;
  }
  std::size_t size() const { return insts_.size(); }
  bool empty() const { return insts_.empty(); }
  Instruction *front() const { return insts_.empty() ? nullptr : insts_.front().get(); }
  Instruction *terminator() const {
    return insts_.empty() ? nullptr : insts_.back().get();
  }

  // Takes ownership; appends and renumbers.
  Instruction *append(std::unique_ptr<Instruction> in);
  // Inserts before `pos` (which must belong to this block).
  Instruction *insert_before(Instruction *pos, std::unique_ptr<Instruction> in);
  // Unlinks and destroys `in`; the instruction must have no remaining uses of
  // its result. Marks the result value's definition dangling.
  void erase(Instruction *in);
  // Detaches `in` without destroying it (used when splicing between blocks).
  std::unique_ptr<Instruction> detach(Instruction *in);

  // Successor blocks of the terminator (0, 1, or 2).
  std::vector<BasicBlock *> successors() const;

  void renumber();

 private:
  friend class Function;
  friend class Module;
  friend void erase_instructions(Function &,
                                 const std::unordered_set<Instruction *> &);
  BasicBlock() = default;

  std::string name_;
  Function *parent_ = nullptr;
  std::vector<std::unique_ptr<Instruction>> insts_;
};

class Function {
 public:
  const std::string &name() const { return name_; }
  TypeRef return_type() const { return return_type_; }
  const std::vector<Value *> &params() const { return params_; }
  bool is_declaration() const { return is_declaration_; }
  bool always_inline() const { return always_inline_; }
  void set_always_inline(bool v) { always_inline_ = v; }
  bool is_internal() const { return internal_; }
  void set_internal(bool v) { internal_ = v; }
  Module *parent() const { return parent_; }

  const std::vector<std::unique_ptr<BasicBlock>> &blocks() const {
    return blocks_;
  }
  BasicBlock *entry() const {
    return blocks_.empty() ? nullptr : blocks_.front().get();
  }

  BasicBlock *add_block(std::string_view name_hint);
  // Inserts a new block immediately after `after`.
  BasicBlock *add_block_after(BasicBlock *after, std::string_view name_hint);
  void remove_block(BasicBlock *bb);

  // Returns a function-unique local name derived from `hint`.
  std::string unique_name(std::string_view hint);
  bool name_in_use(const std::string &n) const {
    return used_names_.count(n) != 0;
  }
  void register_name(const std::string &n) { used_names_.insert(n); }

  std::size_t instruction_count() const;

  // Iterate all instructions in block order; `fn` returning false stops.
  template <typename Fn>
  void for_each_instruction(Fn &&fn) const {
    for (const auto &bb : blocks_)
      for (const auto &in : bb->instructions())
        if (!fn(in.get())) return;
  }

 private:
  friend class Module;
  Function() = default;

  std::string name_;
  TypeRef return_type_ = nullptr;
  std::vector<Value *> params_;
  bool is_declaration_ = true;
  bool always_inline_ = false;
  bool internal_ = false;
  bool auto_declared_ = false;
  Module *parent_ = nullptr;
  std::vector<std::unique_ptr<BasicBlock>> blocks_;
  std::unordered_set<std::string> used_names_;
  std::unordered_map<std::string, int> name_counters_;

 public:
  bool auto_declared() const { return auto_declared_; }
  void set_signature(TypeRef ret, const std::vector<TypeRef> &param_types);
  void set_param_name(std::size_t i, std::string name);
  void promote_to_definition() {
    is_declaration_ = false;
    auto_declared_ = false;
  }
  // Reorders blocks_ to the given permutation (parser restores source order
  // after forward references).
  void reorder_blocks(const std::vector<BasicBlock *> &order);
};

// A 4-slot constant table of wrapper functions (body/adj/ctl/ctladj).
struct GlobalTable {
  std::string name;
  TypeRef element_type = nullptr;  // the wrapper function-pointer type
  std::vector<Function *> slots;   // nullptr for null slots
  Module *parent = nullptr;
};

class Module {
 public:
  Module() = default;
  Module(const Module &) = delete;
  Module &operator=(const Module &) = delete;

  const std::vector<std::unique_ptr<Function>> &functions() const {
    return functions_;
  }
  const std::vector<std::unique_ptr<GlobalTable>> &globals() const {
    return globals_;
  }

  Function *find_function(std::string_view name) const;
  GlobalTable *find_global(std::string_view name) const;

  // Creates a definition shell (no blocks yet; call set_signature + blocks).
  Function *create_function(std::string_view name, TypeRef ret,
                            const std::vector<TypeRef> &param_types,
                            bool is_declaration);
  // Returns the function named `name`, creating an auto-declaration with the
  // given signature if absent.
  Function *get_or_declare(std::string_view name, TypeRef ret,
                           const std::vector<TypeRef> &param_types);
  void remove_function(Function *f);

  GlobalTable *create_table(std::string_view name,
                            std::vector<Function *> slots);
  void remove_global(GlobalTable *g);

  // Reorders the function list; `order` must name every function once.
  void reorder_functions(const std::vector<Function *> &order);

  // --- value factories (arena-owned) ---
  Value *int_const(TypeRef ty, std::int64_t v);
  Value *i64_const(std::int64_t v) { return int_const(Type::i64_ty(), v); }
  Value *bool_const(bool v) { return int_const(Type::bool_ty(), v); }
  Value *null_const(TypeRef ty);
  Value *range_const(const RangeTriple &r);
  Value *global_ref(GlobalTable *table);
  Value *make_arg(Function *f, int index, TypeRef ty, std::string name);
  Value *make_result(TypeRef ty, std::string name);

  // --- instruction factories; returned instruction is not yet in a block ---
  std::unique_ptr<Instruction> make_call(Function *callee,
                                         std::vector<Value *> args,
                                         std::string result_hint = {},
                                         bool tail = false);
  std::unique_ptr<Instruction> make_load(TypeRef loaded_ty, Value *ptr,
                                         std::string result_hint);
  std::unique_ptr<Instruction> make_store(Value *val, Value *ptr);
  std::unique_ptr<Instruction> make_bitcast(Value *v, TypeRef to,
                                            std::string result_hint);
  std::unique_ptr<Instruction> make_br(BasicBlock *target);
  std::unique_ptr<Instruction> make_cond_br(Value *cond, BasicBlock *t,
                                            BasicBlock *f);
  std::unique_ptr<Instruction> make_icmp(ICmpPred pred, Value *a, Value *b,
                                         std::string result_hint);
  std::unique_ptr<Instruction> make_binop(BinOpKind k, Value *a, Value *b,
                                          std::string result_hint);
  std::unique_ptr<Instruction> make_phi(TypeRef ty,
                                        std::vector<Value *> values,
                                        std::vector<BasicBlock *> blocks,
                                        std::string result_hint);
  std::unique_ptr<Instruction> make_ret(Value *v = nullptr);
  std::unique_ptr<Instruction> make_gep_const(Value *global,
                                              std::vector<Value *> indices,
                                              TypeRef result_ty,
                                              std::string result_hint);

  // Module-wide instruction count over defined functions.
  std::size_t instruction_count() const;

  bool global_name_in_use(const std::string &n) const {
    return global_names_.count(n) != 0;
  }

 private:
  friend class Function;
  Value *new_value();

  std::vector<std::unique_ptr<Function>> functions_;
  std::vector<std::unique_ptr<GlobalTable>> globals_;
  std::vector<std::unique_ptr<Value>> values_;
  std::unordered_map<std::string, Value *> int_pool_;
  std::unordered_map<std::string, Value *> null_pool_;
  std::unordered_map<std::string, Value *> range_pool_;
  std::unordered_map<GlobalTable *, Value *> global_ref_pool_;
  std::unordered_set<std::string> global_names_;
};

// Batch removal: drops every instruction in `victims` with one compaction
// per block. Much cheaper than erasing one at a time from large blocks.
void erase_instructions(Function &f,
                        const std::unordered_set<Instruction *> &victims);

// Spells an operand the way the printer does ("%x", "@t", "3", "true",
// "null", "%Range {i64 3, i64 -1, i64 0}").
std::string operand_str(const Value *v);

// Human-readable opcode / predicate names.
std::string_view opcode_name(Opcode op);
std::string_view icmp_pred_name(ICmpPred p);
std::string_view binop_name(BinOpKind k);

}  // namespace qiropt
