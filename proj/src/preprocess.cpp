#include "qiropt/preprocess.hpp"

#include <algorithm>
#include <cctype>

#include "qiropt/dataflow.hpp"
#include "qiropt/runtime_names.hpp"

namespace qiropt {

namespace {

bool contains_ci(const std::string &haystack, const std::string &needle) {
  auto it = std::search(haystack.begin(), haystack.end(), needle.begin(),
                        needle.end(), [](char a, char b) {
                          return std::tolower(static_cast<unsigned char>(a)) ==
                                 std::tolower(static_cast<unsigned char>(b));
                        });
  return it != haystack.end();
}

RuntimeFn callee_kind(const Instruction *in) {
  if (in->opcode() != Opcode::Call || in->callee() == nullptr)
    return RuntimeFn::Unknown;
  return classify_runtime_callee(in->callee()->name());
}

}  // namespace

std::size_t qir_inline(Module &m, DiagList *diags) {
  std::size_t rewrites = 0;
  for (const auto &f : m.functions()) {
    if (f->is_declaration()) continue;
    std::vector<Instruction *> invokes;
    f->for_each_instruction([&](Instruction *in) {
      if (callee_kind(in) == RuntimeFn::CallableInvoke) invokes.push_back(in);
      return true;
    });
    for (Instruction *invoke : invokes) {
      if (invoke->num_operands() < 3) {
        note(diags, "QirInlineSkipped", "callable_invoke with missing operands",
             "@" + f->name());
        continue;
      }
      Value *callable = invoke->operand(0);
      Definition def;
      try {
        def = def_of(callable);
      } catch (const DanglingValue &) {
        continue;
      }
      if (def.kind != DefKind::Instruction ||
          callee_kind(def.instr) != RuntimeFn::CallableCreate) {
        note(diags, "QirInlineSkipped",
             "callable does not trace to a local callable_create",
             "@" + f->name());
        continue;
      }
      Instruction *create = def.instr;
      if (create->num_operands() < 2 ||
          create->operand(0)->kind() != ValueKind::GlobalRef ||
          create->operand(0)->referenced_table() == nullptr) {
        note(diags, "QirInlineSkipped",
             "callable_create is not over a constant function table",
             "@" + f->name());
        continue;
      }
      if (create->operand(1)->kind() != ValueKind::NullConst) {
        note(diags, "QirInlineSkipped", "capture tuple present",
             "@" + f->name());
        continue;
      }
      // the callable must reach the invoke unconverted: only invokes and
      // bookkeeping may use it
      bool blocked = false;
      for (const UseSite &site : uses_of(callable, *f)) {
        RuntimeFn k = callee_kind(site.user);
        if (k == RuntimeFn::CallableMakeAdjoint ||
            k == RuntimeFn::CallableMakeControlled) {
          note(diags, "QirInlineSkipped",
               "adjoint/controlled conversion applied to the callable",
               "@" + f->name());
          blocked = true;
          break;
        }
        if (k != RuntimeFn::CallableInvoke && !is_memory_management(k)) {
          note(diags, "QirInlineSkipped",
               "callable escapes to @" + site.user->callee_name(),
               "@" + f->name());
          blocked = true;
          break;
        }
      }
      if (blocked) continue;

      GlobalTable *table = create->operand(0)->referenced_table();
      Function *body = table->slots[0];
      if (body == nullptr || body->is_declaration()) {
        note(diags, "QirInlineSkipped",
             "@" + table->name + " has no defined body wrapper",
             "@" + f->name());
        continue;
      }
      // direct call: (capture = null, arg tuple, result tuple)
      Value *null_tuple = m.null_const(Type::tuple_ptr());
      auto direct = m.make_call(
          body, {null_tuple, invoke->operand(1), invoke->operand(2)});
      BasicBlock *bb = invoke->parent();
      bb->insert_before(invoke, std::move(direct));
      bb->erase(invoke);
      ++rewrites;
    }
  }
  return rewrites;
}

std::size_t qir_loop_unroll_prep(Module &m, DiagList *diags) {
  std::size_t substituted = 0;
  for (const auto &f : m.functions()) {
    if (f->is_declaration()) continue;
    std::vector<Instruction *> sites;
    f->for_each_instruction([&](Instruction *in) {
      if (callee_kind(in) == RuntimeFn::ArrayGetSize1d) sites.push_back(in);
      return true;
    });
    for (Instruction *size_call : sites) {
      Definition def;
      try {
        def = def_of(size_call->operand(0));
      } catch (const DanglingValue &) {
        continue;
      }
      if (def.kind != DefKind::Instruction) {
        note(diags, "SizeNotStatic",
             "array size queried on a non-local array", "@" + f->name());
        continue;
      }
      RuntimeFn k = callee_kind(def.instr);
      if (k != RuntimeFn::QubitAllocateArray && k != RuntimeFn::ArrayCreate1d) {
        note(diags, "SizeNotStatic",
             "array does not come from a sized allocation", "@" + f->name());
        continue;
      }
      auto len = def.instr->operand(0)->as_int_const();
      if (!len) {
        note(diags, "SizeNotStatic", "allocation length is dynamic",
             "@" + f->name());
        continue;
      }
      Value *constant = m.i64_const(*len);
      std::size_t rewritten = 0;
      for (const auto &bb : f->blocks())
        for (const auto &in : bb->instructions())
          for (std::size_t i = 0; i < in->num_operands(); ++i)
            if (in->operand(i) == size_call->result()) {
              in->set_operand(i, constant);
              ++rewritten;
            }
      if (rewritten > 0) ++substituted;  // the size call itself is left for DCE
    }
  }
  return substituted;
}

std::size_t qir_ctl_inline(Module &m,
                           const std::vector<std::string> &extra_patterns,
                           DiagList *diags) {
  (void)diags;
  const std::vector<std::string> defaults = {"__ctl", "__ctladj", "swap"};
  const std::vector<std::string> &patterns =
      extra_patterns.empty() ? defaults : extra_patterns;

  std::size_t tagged = 0;
  for (const auto &f : m.functions()) {
    if (f->is_declaration() || f->always_inline()) continue;
    bool match = false;
    for (const std::string &p : patterns)
      if (contains_ci(f->name(), p)) match = true;
    if (!match && f->name().rfind("Intrinsic__", 0) == 0 &&
        f->name().size() > 6 &&
        f->name().compare(f->name().size() - 6, 6, "__body") == 0) {
      // wrapper around a single controlled-gate call
      std::size_t ctl_calls = 0;
      f->for_each_instruction([&](Instruction *in) {
        if (in->opcode() == Opcode::Call &&
            is_qis_callee(in->callee_name()) &&
            in->callee_name().find("__ctl") != std::string::npos)
          ++ctl_calls;
        return true;
      });
      match = ctl_calls == 1;
    }
    if (match) {
      f->set_always_inline(true);
      ++tagged;
    }
  }
  return tagged;
}

}  // namespace qiropt
