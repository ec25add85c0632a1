#include "qiropt/validate.hpp"

#include <unordered_map>
#include <unordered_set>

#include "qiropt/dataflow.hpp"
#include "qiropt/printer.hpp"

namespace qiropt {

namespace {

std::string loc(const Function *f, const BasicBlock *bb = nullptr,
                const Instruction *in = nullptr) {
  std::string s = "@" + f->name();
  if (bb) s += ":" + bb->name();
  if (in) s += ":" + std::to_string(in->ordinal());
  return s;
}

bool type_ok(TypeRef t) {
  switch (t->kind()) {
    case Type::Kind::Void:
    case Type::Kind::Opaque:
    case Type::Kind::Range:
      return true;
    case Type::Kind::Int:
      // bare i8 is not a value type in this dialect
      return t->int_width() == 1 || t->int_width() == 64;
    case Type::Kind::Ref: {
      if (t->ref_depth() > 2) return false;
      TypeRef p = t->pointee();
      if (p->is_int(8)) return true;  // i8* (element pointers)
      if (p->is_ref() && p->pointee()->is_int(8)) return false;
      if (p->is_ref()) return type_ok(p);
      if (p->is_func_sig() || p->is_const_array()) return true;
      return type_ok(p);
    }
    case Type::Kind::FuncSig:
    case Type::Kind::ConstArray:
      return true;
  }
  return false;
}

void check_function(const Function &f, DiagList &out) {
  if (f.is_declaration()) {
    if (!f.blocks().empty())
      note(&out, "DeclarationWithBody", "declaration has blocks", loc(&f));
    return;
  }
  if (f.blocks().empty()) {
    note(&out, "EmptyFunction", "definition has no blocks", loc(&f));
    return;
  }

  // name uniqueness across args, results, and labels
  std::unordered_set<std::string> names;
  std::unordered_set<const Value *> defined;
  for (const Value *p : f.params()) {
    if (!names.insert(p->name()).second)
      note(&out, "DuplicateSSAName", "duplicate argument %" + p->name(),
           loc(&f));
    defined.insert(p);
  }
  for (const auto &bb : f.blocks()) {
    if (!names.insert(bb->name()).second)
      note(&out, "DuplicateSSAName", "duplicate label " + bb->name(),
           loc(&f, bb.get()));
    for (const auto &in : bb->instructions()) {
      if (const Value *r = in->result()) {
        if (!names.insert(r->name()).second)
          note(&out, "DuplicateSSAName", "duplicate value %" + r->name(),
               loc(&f, bb.get(), in.get()));
        if (r->def_instr() != in.get())
          note(&out, "BadDefLink", "%" + r->name() + " not linked to its def",
               loc(&f, bb.get(), in.get()));
        defined.insert(r);
      }
    }
  }

  // per-instruction shape
  std::unordered_set<const BasicBlock *> branch_targets;
  for (const auto &bb : f.blocks()) {
    if (bb->empty()) {
      note(&out, "EmptyBlock", "block has no terminator", loc(&f, bb.get()));
      continue;
    }
    int expected = 0;
    for (const auto &in : bb->instructions()) {
      if (in->ordinal() != expected++)
        note(&out, "BadOrdinal", "ordinal out of sequence",
             loc(&f, bb.get(), in.get()));
      bool is_last = in.get() == bb->terminator();
      if (in->is_terminator() != is_last)
        note(&out, "MisplacedTerminator",
             in->is_terminator() ? "terminator before end of block"
                                 : "block does not end in a terminator",
             loc(&f, bb.get(), in.get()));
      switch (in->opcode()) {
        case Opcode::Store:
        case Opcode::Br:
        case Opcode::Ret:
          if (in->result())
            note(&out, "UnexpectedResult",
                 "instruction must not produce a result",
                 loc(&f, bb.get(), in.get()));
          break;
        case Opcode::Phi:
          if (in->num_operands() != in->incoming_blocks().size() ||
              in->num_operands() == 0)
            note(&out, "MalformedPhi", "phi arity mismatch",
                 loc(&f, bb.get(), in.get()));
          break;
        default:
          break;
      }
      if (in->result() && !type_ok(in->result()->type()))
        note(&out, "BadType",
             "result type " + in->result()->type()->str() + " outside dialect",
             loc(&f, bb.get(), in.get()));
      for (const Value *v : in->operands())
        if (!type_ok(v->type()) && !v->type()->is_range())
          note(&out, "BadType",
               "operand type " + v->type()->str() + " outside dialect",
               loc(&f, bb.get(), in.get()));
      if (in->opcode() == Opcode::Br) {
        branch_targets.insert(in->target_true());
        if (in->is_conditional()) branch_targets.insert(in->target_false());
      }
      if (in->opcode() == Opcode::Call && in->callee() == nullptr)
        note(&out, "MissingCallee", "call without callee",
             loc(&f, bb.get(), in.get()));
    }
  }

  // entry first, every other block is some branch's target
  for (std::size_t i = 1; i < f.blocks().size(); ++i)
    if (!branch_targets.count(f.blocks()[i].get()))
      note(&out, "UnreachableBlock",
           "block " + f.blocks()[i]->name() + " is not a branch target",
           loc(&f, f.blocks()[i].get()));

  // operand resolution and dominance
  DominatorInfo dom(f);
  for (const auto &bb : f.blocks()) {
    for (const auto &in : bb->instructions()) {
      for (std::size_t i = 0; i < in->num_operands(); ++i) {
        const Value *v = in->operand(i);
        if (v->is_constant()) continue;
        if (v->kind() == ValueKind::FunctionArg) {
          if (v->arg_parent() != &f)
            note(&out, "ForeignValue", "argument of another function used",
                 loc(&f, bb.get(), in.get()));
          continue;
        }
        const Instruction *def = v->def_instr();
        if (def == nullptr || def->erased() || !defined.count(v)) {
          note(&out, "DanglingOperand", "%" + v->name() + " has no definition",
               loc(&f, bb.get(), in.get()));
          continue;
        }
        const Instruction *point = in.get();
        if (in->opcode() == Opcode::Phi)
          point = in->incoming_blocks()[i]->terminator();
        if (point == nullptr) continue;  // malformed block, reported above
        if (def == point || !dom.inst_dominates(def, point))
          note(&out, "DominanceViolation",
               "%" + v->name() + " used before its definition",
               loc(&f, bb.get(), in.get()));
      }
      if (in->opcode() == Opcode::Phi) {
        for (const BasicBlock *ib : in->incoming_blocks()) {
          bool found = false;
          for (const auto &cand : f.blocks())
            if (cand.get() == ib) found = true;
          if (!found)
            note(&out, "MalformedPhi", "phi incoming block not in function",
                 loc(&f, bb.get(), in.get()));
        }
      }
    }
  }
}

}  // namespace

DiagList validate(const Module &m) {
  DiagList out;

  std::unordered_set<std::string> global_names;
  for (const auto &g : m.globals()) {
    if (!global_names.insert(g->name).second)
      note(&out, "DuplicateSSAName", "duplicate global @" + g->name);
    if (g->slots.size() != 4)
      note(&out, "MalformedFunctionTable",
           "@" + g->name + " has " + std::to_string(g->slots.size()) +
               " slots, expected 4");
  }
  for (const auto &f : m.functions())
    if (!global_names.insert(f->name()).second)
      note(&out, "DuplicateSSAName", "duplicate symbol @" + f->name());

  for (const auto &f : m.functions()) check_function(*f, out);
  return out;
}

}  // namespace qiropt
