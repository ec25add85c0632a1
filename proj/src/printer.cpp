#include "qiropt/printer.hpp"

#include <set>
#include <sstream>

namespace qiropt {

namespace {

void collect_opaques(TypeRef t, std::set<std::string> &names, bool &range) {
  switch (t->kind()) {
    case Type::Kind::Opaque:
      names.insert(t->opaque_name());
      break;
    case Type::Kind::Ref:
    case Type::Kind::ConstArray:
      collect_opaques(t->element_type(), names, range);
      break;
    case Type::Kind::Range:
      range = true;
      break;
    case Type::Kind::FuncSig:
      collect_opaques(t->return_type(), names, range);
      for (TypeRef p : t->param_types()) collect_opaques(p, names, range);
      break;
    default:
      break;
  }
}

std::string typed_operand(const Value *v) {
  if (v->kind() == ValueKind::RangeConst) return operand_str(v);
  return v->type()->str() + " " + operand_str(v);
}

void print_instr(std::ostringstream &os, const Instruction &in) {
  if (in.result()) os << "%" << in.result()->name() << " = ";
  switch (in.opcode()) {
    case Opcode::Call: {
      if (in.is_tail()) os << "tail ";
      os << "call " << in.callee()->return_type()->str() << " @"
         << in.callee()->name() << "(";
      for (std::size_t i = 0; i < in.num_operands(); ++i) {
        if (i) os << ", ";
        os << typed_operand(in.operand(i));
      }
      os << ")";
      break;
    }
    case Opcode::Load:
      os << "load " << in.result()->type()->str() << ", "
         << typed_operand(in.operand(0)) << ", align 8";
      break;
    case Opcode::Store:
      os << "store " << typed_operand(in.operand(0)) << ", "
         << typed_operand(in.operand(1)) << ", align 8";
      break;
    case Opcode::Bitcast:
      os << "bitcast " << typed_operand(in.operand(0)) << " to "
         << in.result()->type()->str();
      break;
    case Opcode::Br:
      if (in.is_conditional())
        os << "br " << typed_operand(in.operand(0)) << ", label %"
           << in.target_true()->name() << ", label %"
           << in.target_false()->name();
      else
        os << "br label %" << in.target_true()->name();
      break;
    case Opcode::ICmp:
      os << "icmp " << icmp_pred_name(in.icmp_pred()) << " "
         << in.operand(0)->type()->str() << " " << operand_str(in.operand(0))
         << ", " << operand_str(in.operand(1));
      break;
    case Opcode::BinOp:
      os << binop_name(in.binop_kind()) << " " << in.operand(0)->type()->str()
         << " " << operand_str(in.operand(0)) << ", "
         << operand_str(in.operand(1));
      break;
    case Opcode::Phi: {
      os << "phi " << in.result()->type()->str() << " ";
      for (std::size_t i = 0; i < in.num_operands(); ++i) {
        if (i) os << ", ";
        os << "[ " << operand_str(in.operand(i)) << ", %"
           << in.incoming_blocks()[i]->name() << " ]";
      }
      break;
    }
    case Opcode::Ret:
      if (in.num_operands() == 0)
        os << "ret void";
      else
        os << "ret " << typed_operand(in.operand(0));
      break;
    case Opcode::GepConst: {
      TypeRef table = in.operand(0)->type()->pointee();
      os << "getelementptr inbounds " << table->str() << ", "
         << typed_operand(in.operand(0));
      for (std::size_t i = 1; i < in.num_operands(); ++i)
        os << ", " << typed_operand(in.operand(i));
      break;
    }
  }
}

}  // namespace

std::string print_instruction(const Instruction &in) {
  std::ostringstream os;
  print_instr(os, in);
  return os.str();
}

std::string print_module(const Module &m) {
  std::ostringstream os;

  // Named-type header for everything the module mentions.
  std::set<std::string> opaques;
  bool uses_range = false;
  auto visit_value = [&](const Value *v) {
    if (v) collect_opaques(v->type(), opaques, uses_range);
  };
  for (const auto &g : m.globals())
    collect_opaques(g->element_type, opaques, uses_range);
  for (const auto &f : m.functions()) {
    collect_opaques(f->return_type(), opaques, uses_range);
    for (const Value *p : f->params()) visit_value(p);
    for (const auto &bb : f->blocks())
      for (const auto &in : bb->instructions()) {
        visit_value(in->result());
        for (const Value *v : in->operands()) visit_value(v);
      }
  }
  bool header = false;
  for (const std::string &name : opaques) {
    os << "%" << name << " = type opaque\n";
    header = true;
  }
  if (uses_range) {
    os << "%Range = type { i64, i64, i64 }\n";
    header = true;
  }
  if (header) os << "\n";

  for (const auto &g : m.globals()) {
    os << "@" << g->name << " = internal constant [4 x "
       << g->element_type->str() << "] [";
    for (std::size_t i = 0; i < 4; ++i) {
      if (i) os << ", ";
      os << g->element_type->str() << " ";
      if (g->slots[i])
        os << "@" << g->slots[i]->name();
      else
        os << "null";
    }
    os << "]\n";
  }
  if (!m.globals().empty()) os << "\n";

  bool first_fn = true;
  for (const auto &f : m.functions()) {
    if (f->is_declaration()) continue;
    if (!first_fn) os << "\n";
    first_fn = false;
    os << "define " << (f->is_internal() ? "internal " : "")
       << f->return_type()->str() << " @" << f->name() << "(";
    for (std::size_t i = 0; i < f->params().size(); ++i) {
      if (i) os << ", ";
      os << f->params()[i]->type()->str() << " %" << f->params()[i]->name();
    }
    os << ")";
    if (f->always_inline()) os << " alwaysinline";
    os << " {\n";
    for (const auto &bb : f->blocks()) {
      os << bb->name() << ":\n";
      for (const auto &in : bb->instructions()) {
        os << "  ";
        print_instr(os, *in);
        os << "\n";
      }
    }
    os << "}\n";
  }

  bool first_decl = true;
  for (const auto &f : m.functions()) {
    if (!f->is_declaration()) continue;
    if (first_decl && !first_fn) os << "\n";
    first_decl = false;
    os << "declare " << f->return_type()->str() << " @" << f->name() << "(";
    for (std::size_t i = 0; i < f->params().size(); ++i) {
      if (i) os << ", ";
      os << f->params()[i]->type()->str();
    }
    os << ")\n";
  }

  std::string out = os.str();
  if (out.empty()) out = "\n";
  return out;
}

}  // namespace qiropt
