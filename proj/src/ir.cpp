#include "qiropt/ir.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>

namespace qiropt {

// ---------------------------------------------------------------------------
// Instruction

Function *Instruction::parent_function() const {
  return parent_ ? parent_->parent() : nullptr;
}

const std::string &Instruction::callee_name() const {
  static const std::string empty;
  return callee_ ? callee_->name() : empty;
}

void Instruction::replace_result(Value *v) {
  assert(v->kind() == ValueKind::InstrResult);
  result_ = v;
  v->def_ = this;
}

// ---------------------------------------------------------------------------
// BasicBlock

Instruction *BasicBlock::append(std::unique_ptr<Instruction> in) {
  in->parent_ = this;
  insts_.push_back(std::move(in));
  insts_.back()->ordinal_ = static_cast<int>(insts_.size()) - 1;
  return insts_.back().get();
}

Instruction *BasicBlock::insert_before(Instruction *pos,
                                       std::unique_ptr<Instruction> in) {
  auto it = std::find_if(insts_.begin(), insts_.end(),
                         [&](const auto &p) { return p.get() == pos; });
  assert(it != insts_.end() && "insert_before: position not in block");
  in->parent_ = this;
  Instruction *raw = in.get();
  insts_.insert(it, std::move(in));
  renumber();
  return raw;
}

void BasicBlock::erase(Instruction *in) {
  auto it = std::find_if(insts_.begin(), insts_.end(),
                         [&](const auto &p) { return p.get() == in; });
  assert(it != insts_.end() && "erase: instruction not in block");
  in->erased_ = true;
  in->parent_ = nullptr;
  insts_.erase(it);
  renumber();
}

std::unique_ptr<Instruction> BasicBlock::detach(Instruction *in) {
  auto it = std::find_if(insts_.begin(), insts_.end(),
                         [&](const auto &p) { return p.get() == in; });
  assert(it != insts_.end() && "detach: instruction not in block");
  std::unique_ptr<Instruction> owned = std::move(*it);
  insts_.erase(it);
  owned->parent_ = nullptr;
  renumber();
  return owned;
}

std::vector<BasicBlock *> BasicBlock::successors() const {
  std::vector<BasicBlock *> out;
  Instruction *t = terminator();
  if (t && t->opcode() == Opcode::Br) {
    out.push_back(t->target_true());
    if (t->is_conditional()) out.push_back(t->target_false());
  }
  return out;
}

void BasicBlock::renumber() {
  for (std::size_t i = 0; i < insts_.size(); ++i)
    insts_[i]->ordinal_ = static_cast<int>(i);
}

// ---------------------------------------------------------------------------
// Function

BasicBlock *Function::add_block(std::string_view name_hint) {
  auto bb = std::unique_ptr<BasicBlock>(new BasicBlock());
  bb->name_ = unique_name(name_hint);
  bb->parent_ = this;
  blocks_.push_back(std::move(bb));
  return blocks_.back().get();
}

BasicBlock *Function::add_block_after(BasicBlock *after,
                                      std::string_view name_hint) {
  auto bb = std::unique_ptr<BasicBlock>(new BasicBlock());
  bb->name_ = unique_name(name_hint);
  bb->parent_ = this;
  auto it = std::find_if(blocks_.begin(), blocks_.end(),
                         [&](const auto &p) { return p.get() == after; });
  assert(it != blocks_.end());
  BasicBlock *raw = bb.get();
  blocks_.insert(std::next(it), std::move(bb));
  return raw;
}

void Function::remove_block(BasicBlock *bb) {
  for (const auto &in : bb->instructions()) in->erased_ = true;
  auto it = std::find_if(blocks_.begin(), blocks_.end(),
                         [&](const auto &p) { return p.get() == bb; });
  assert(it != blocks_.end());
  blocks_.erase(it);
}

std::string Function::unique_name(std::string_view hint) {
  std::string base = hint.empty() ? std::string("v") : std::string(hint);
  std::string candidate = base;
  int &n = name_counters_[base];
  while (used_names_.count(candidate)) candidate = base + "." + std::to_string(++n);
  used_names_.insert(candidate);
  return candidate;
}

std::size_t Function::instruction_count() const {
  std::size_t n = 0;
  for (const auto &bb : blocks_) n += bb->size();
  return n;
}

void Function::set_signature(TypeRef ret,
                             const std::vector<TypeRef> &param_types) {
  assert(blocks_.empty() && "cannot reset signature after body exists");
  return_type_ = ret;
  params_.clear();
  used_names_.clear();
  for (std::size_t i = 0; i < param_types.size(); ++i) {
    Value *v = parent_->make_arg(this, static_cast<int>(i), param_types[i],
                                 std::to_string(i));
    params_.push_back(v);
  }
}

void Function::reorder_blocks(const std::vector<BasicBlock *> &order) {
  assert(order.size() == blocks_.size());
  std::vector<std::unique_ptr<BasicBlock>> next;
  next.reserve(order.size());
  for (BasicBlock *bb : order) {
    auto it = std::find_if(blocks_.begin(), blocks_.end(),
                           [&](const auto &p) { return p.get() == bb; });
    assert(it != blocks_.end());
    next.push_back(std::move(*it));
    blocks_.erase(it);
  }
  blocks_ = std::move(next);
}

void Function::set_param_name(std::size_t i, std::string name) {
  used_names_.erase(params_[i]->name());
  params_[i]->set_name(std::move(name));
  used_names_.insert(params_[i]->name());
}

// ---------------------------------------------------------------------------
// Module

Value *Module::new_value() {
  values_.push_back(std::unique_ptr<Value>(new Value()));
  return values_.back().get();
}

Function *Module::find_function(std::string_view name) const {
  for (const auto &f : functions_)
    if (f->name() == name) return f.get();
  return nullptr;
}

GlobalTable *Module::find_global(std::string_view name) const {
  for (const auto &g : globals_)
    if (g->name == name) return g.get();
  return nullptr;
}

Function *Module::create_function(std::string_view name, TypeRef ret,
                                  const std::vector<TypeRef> &param_types,
                                  bool is_declaration) {
  auto f = std::unique_ptr<Function>(new Function());
  f->name_ = std::string(name);
  f->parent_ = this;
  f->is_declaration_ = is_declaration;
  functions_.push_back(std::move(f));
  Function *raw = functions_.back().get();
  raw->set_signature(ret, param_types);
  global_names_.insert(raw->name_);
  return raw;
}

Function *Module::get_or_declare(std::string_view name, TypeRef ret,
                                 const std::vector<TypeRef> &param_types) {
  if (Function *f = find_function(name)) return f;
  Function *f = create_function(name, ret, param_types, /*is_declaration=*/true);
  f->auto_declared_ = true;
  return f;
}

void Module::remove_function(Function *f) {
  global_names_.erase(f->name());
  auto it = std::find_if(functions_.begin(), functions_.end(),
                         [&](const auto &p) { return p.get() == f; });
  assert(it != functions_.end());
  functions_.erase(it);
}

GlobalTable *Module::create_table(std::string_view name,
                                  std::vector<Function *> slots) {
  auto g = std::make_unique<GlobalTable>();
  g->name = std::string(name);
  g->element_type = Type::callable_table()->element_type();
  g->slots = std::move(slots);
  g->slots.resize(4, nullptr);
  g->parent = this;
  globals_.push_back(std::move(g));
  global_names_.insert(globals_.back()->name);
  return globals_.back().get();
}

void Module::reorder_functions(const std::vector<Function *> &order) {
  assert(order.size() == functions_.size());
  std::vector<std::unique_ptr<Function>> next;
  next.reserve(order.size());
  for (Function *f : order) {
    auto it = std::find_if(functions_.begin(), functions_.end(),
                           [&](const auto &p) { return p.get() == f; });
    assert(it != functions_.end());
    next.push_back(std::move(*it));
    functions_.erase(it);
  }
  functions_ = std::move(next);
}

void Module::remove_global(GlobalTable *g) {
  global_names_.erase(g->name);
  global_ref_pool_.erase(g);
  auto it = std::find_if(globals_.begin(), globals_.end(),
                         [&](const auto &p) { return p.get() == g; });
  assert(it != globals_.end());
  globals_.erase(it);
}

Value *Module::int_const(TypeRef ty, std::int64_t v) {
  std::string key = ty->str() + ":" + std::to_string(v);
  auto it = int_pool_.find(key);
  if (it != int_pool_.end()) return it->second;
  Value *val = new_value();
  val->kind_ = ValueKind::IntConst;
  val->type_ = ty;
  val->int_val_ = v;
  int_pool_.emplace(std::move(key), val);
  return val;
}

Value *Module::null_const(TypeRef ty) {
  auto it = null_pool_.find(ty->str());
  if (it != null_pool_.end()) return it->second;
  Value *val = new_value();
  val->kind_ = ValueKind::NullConst;
  val->type_ = ty;
  null_pool_.emplace(ty->str(), val);
  return val;
}

Value *Module::range_const(const RangeTriple &r) {
  std::string key = std::to_string(r.start) + "," + std::to_string(r.step) +
                    "," + std::to_string(r.end);
  auto it = range_pool_.find(key);
  if (it != range_pool_.end()) return it->second;
  Value *val = new_value();
  val->kind_ = ValueKind::RangeConst;
  val->type_ = Type::range_ty();
  val->range_val_ = r;
  range_pool_.emplace(std::move(key), val);
  return val;
}

Value *Module::global_ref(GlobalTable *table) {
  auto it = global_ref_pool_.find(table);
  if (it != global_ref_pool_.end()) return it->second;
  Value *val = new_value();
  val->kind_ = ValueKind::GlobalRef;
  val->type_ = Type::ref_ty(Type::const_array_ty(table->element_type, 4));
  val->name_ = table->name;
  val->table_ = table;
  global_ref_pool_.emplace(table, val);
  return val;
}

Value *Module::make_arg(Function *f, int index, TypeRef ty, std::string name) {
  Value *val = new_value();
  val->kind_ = ValueKind::FunctionArg;
  val->type_ = ty;
  val->name_ = f->unique_name(name);
  val->arg_parent_ = f;
  val->arg_index_ = index;
  return val;
}

Value *Module::make_result(TypeRef ty, std::string name) {
  Value *val = new_value();
  val->kind_ = ValueKind::InstrResult;
  val->type_ = ty;
  val->name_ = std::move(name);
  return val;
}

std::unique_ptr<Instruction> Module::make_call(Function *callee,
                                               std::vector<Value *> args,
                                               std::string result_hint,
                                               bool tail) {
  auto in = std::unique_ptr<Instruction>(new Instruction());
  in->op_ = Opcode::Call;
  in->callee_ = callee;
  in->is_tail_ = tail;
  in->operands_ = std::move(args);
  if (!callee->return_type()->is_void()) {
    Value *r = make_result(callee->return_type(), std::move(result_hint));
    r->def_ = in.get();
    in->result_ = r;
  }
  return in;
}

std::unique_ptr<Instruction> Module::make_load(TypeRef loaded_ty, Value *ptr,
                                               std::string result_hint) {
  auto in = std::unique_ptr<Instruction>(new Instruction());
  in->op_ = Opcode::Load;
  in->operands_ = {ptr};
  Value *r = make_result(loaded_ty, std::move(result_hint));
  r->def_ = in.get();
  in->result_ = r;
  return in;
}

std::unique_ptr<Instruction> Module::make_store(Value *val, Value *ptr) {
  auto in = std::unique_ptr<Instruction>(new Instruction());
  in->op_ = Opcode::Store;
  in->operands_ = {val, ptr};
  return in;
}

std::unique_ptr<Instruction> Module::make_bitcast(Value *v, TypeRef to,
                                                  std::string result_hint) {
  auto in = std::unique_ptr<Instruction>(new Instruction());
  in->op_ = Opcode::Bitcast;
  in->operands_ = {v};
  Value *r = make_result(to, std::move(result_hint));
  r->def_ = in.get();
  in->result_ = r;
  return in;
}

std::unique_ptr<Instruction> Module::make_br(BasicBlock *target) {
  auto in = std::unique_ptr<Instruction>(new Instruction());
  in->op_ = Opcode::Br;
  in->target_true_ = target;
  return in;
}

std::unique_ptr<Instruction> Module::make_cond_br(Value *cond, BasicBlock *t,
                                                  BasicBlock *f) {
  auto in = std::unique_ptr<Instruction>(new Instruction());
  in->op_ = Opcode::Br;
  in->operands_ = {cond};
  in->target_true_ = t;
  in->target_false_ = f;
  return in;
}

std::unique_ptr<Instruction> Module::make_icmp(ICmpPred pred, Value *a,
                                               Value *b,
                                               std::string result_hint) {
  auto in = std::unique_ptr<Instruction>(new Instruction());
  in->op_ = Opcode::ICmp;
  in->pred_ = pred;
  in->operands_ = {a, b};
  Value *r = make_result(Type::bool_ty(), std::move(result_hint));
  r->def_ = in.get();
  in->result_ = r;
  return in;
}

std::unique_ptr<Instruction> Module::make_binop(BinOpKind k, Value *a,
                                                Value *b,
                                                std::string result_hint) {
  auto in = std::unique_ptr<Instruction>(new Instruction());
  in->op_ = Opcode::BinOp;
  in->binop_ = k;
  in->operands_ = {a, b};
  Value *r = make_result(a->type(), std::move(result_hint));
  r->def_ = in.get();
  in->result_ = r;
  return in;
}

std::unique_ptr<Instruction> Module::make_phi(TypeRef ty,
                                              std::vector<Value *> values,
                                              std::vector<BasicBlock *> blocks,
                                              std::string result_hint) {
  assert(values.size() == blocks.size());
  auto in = std::unique_ptr<Instruction>(new Instruction());
  in->op_ = Opcode::Phi;
  in->operands_ = std::move(values);
  in->incoming_blocks_ = std::move(blocks);
  Value *r = make_result(ty, std::move(result_hint));
  r->def_ = in.get();
  in->result_ = r;
  return in;
}

std::unique_ptr<Instruction> Module::make_ret(Value *v) {
  auto in = std::unique_ptr<Instruction>(new Instruction());
  in->op_ = Opcode::Ret;
  if (v) in->operands_ = {v};
  return in;
}

std::unique_ptr<Instruction> Module::make_gep_const(Value *global,
                                                    std::vector<Value *> indices,
                                                    TypeRef result_ty,
                                                    std::string result_hint) {
  auto in = std::unique_ptr<Instruction>(new Instruction());
  in->op_ = Opcode::GepConst;
  in->operands_ = {global};
  for (Value *i : indices) in->operands_.push_back(i);
  Value *r = make_result(result_ty, std::move(result_hint));
  r->def_ = in.get();
  in->result_ = r;
  return in;
}

std::size_t Module::instruction_count() const {
  std::size_t n = 0;
  for (const auto &f : functions_)
    if (!f->is_declaration()) n += f->instruction_count();
  return n;
}

void erase_instructions(Function &f,
                        const std::unordered_set<Instruction *> &victims) {
  if (victims.empty()) return;
  for (const auto &bb : f.blocks()) {
    bool hit = false;
    for (const auto &in : bb->instructions())
      if (victims.count(in.get())) {
        in->erased_ = true;
        in->parent_ = nullptr;
        hit = true;
      }
    if (!hit) continue;
    auto &insts = bb->insts_;
    insts.erase(std::remove_if(insts.begin(), insts.end(),
                               [&](const std::unique_ptr<Instruction> &p) {
                                 return p->erased_;
                               }),
                insts.end());
    bb->renumber();
  }
}

// ---------------------------------------------------------------------------
// Spelling helpers

std::string operand_str(const Value *v) {
  switch (v->kind()) {
    case ValueKind::InstrResult:
    case ValueKind::FunctionArg:
      return "%" + v->name();
    case ValueKind::GlobalRef:
      return "@" + v->name();
    case ValueKind::IntConst:
      if (v->type()->is_int(1)) return v->int_value() ? "true" : "false";
      return std::to_string(v->int_value());
    case ValueKind::RangeConst: {
      const RangeTriple &r = v->range_value();
      return "%Range {i64 " + std::to_string(r.start) + ", i64 " +
             std::to_string(r.step) + ", i64 " + std::to_string(r.end) + "}";
    }
    case ValueKind::NullConst:
      return "null";
  }
  return "<bad>";
}

std::string_view opcode_name(Opcode op) {
  switch (op) {
    case Opcode::Call: return "call";
    case Opcode::Load: return "load";
    case Opcode::Store: return "store";
    case Opcode::Bitcast: return "bitcast";
    case Opcode::Br: return "br";
    case Opcode::ICmp: return "icmp";
    case Opcode::BinOp: return "binop";
    case Opcode::Phi: return "phi";
    case Opcode::Ret: return "ret";
    case Opcode::GepConst: return "getelementptr";
  }
  return "?";
}

std::string_view icmp_pred_name(ICmpPred p) {
  switch (p) {
    case ICmpPred::EQ: return "eq";
    case ICmpPred::NE: return "ne";
    case ICmpPred::SLT: return "slt";
    case ICmpPred::SLE: return "sle";
    case ICmpPred::SGT: return "sgt";
    case ICmpPred::SGE: return "sge";
  }
  return "?";
}

std::string_view binop_name(BinOpKind k) {
  switch (k) {
    case BinOpKind::Add: return "add";
    case BinOpKind::Sub: return "sub";
    case BinOpKind::Mul: return "mul";
  }
  return "?";
}

}  // namespace qiropt
