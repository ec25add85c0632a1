#include "qiropt/interp.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_map>
#include <variant>

#include "qiropt/range_calc.hpp"
#include "qiropt/runtime_names.hpp"

namespace qiropt {

std::vector<std::int64_t> range_to_indices(const RangeTriple &r) {
  if (r.step == 0) throw ZeroStep();
  std::vector<std::int64_t> out;
  if (r.step > 0)
    for (std::int64_t i = r.start; i <= r.end; i += r.step) out.push_back(i);
  else
    for (std::int64_t i = r.start; i >= r.end; i += r.step) out.push_back(i);
  return out;
}

namespace {

struct QubitV {
  QubitId id;
};
struct ArrayV {
  std::int32_t id;
};
struct TupleV {
  std::int32_t id;
};
struct CallableV {
  std::int32_t id;
};
struct ResultV {
  int outcome;
};
struct ElemPtrV {
  std::int32_t array;
  std::int64_t index;
};
struct TableV {
  const GlobalTable *table;
};

using RV = std::variant<std::monostate, std::int64_t, QubitV, ArrayV, TupleV,
                        CallableV, ResultV, ElemPtrV, RangeTriple, TableV>;

struct ArrayObj {
  std::vector<RV> cells;
  std::int64_t alias_count = 0;
  std::int64_t reference_count = 1;
  bool released = false;
  bool is_qubit_register = false;  // from qubit_allocate_array
};

struct TupleObj {
  std::int64_t size = 0;
  std::int64_t reference_count = 1;
};

struct CallableObj {
  const GlobalTable *table = nullptr;
  bool adjoint = false;
  int controlled = 0;
};

class Machine {
 public:
  Machine(const Module &m, const InterpPolicy &policy)
      : mod_(m), policy_(policy) {}

  GateTrace run(const std::string &entry) {
    const Function *f = mod_.find_function(entry);
    if (!f || f->is_declaration())
      throw InterpError("entry function @" + entry + " not defined");
    if (!f->params().empty())
      throw InterpError("entry function must take no parameters");
    exec_function(f, {});
    return std::move(trace_);
  }

 private:
  void diag(const std::string &code, const std::string &msg) {
    trace_.diagnostics.push_back({code, msg, {}});
  }

  void step() {
    if (++steps_ > policy_.max_steps) throw StepBudgetExceeded();
  }

  ArrayObj *array_of(const RV &v, const char *what) {
    if (!std::holds_alternative<ArrayV>(v)) {
      diag("TypeConfusion", std::string(what) + ": operand is not an array");
      return nullptr;
    }
    return &arrays_[std::get<ArrayV>(v).id];
  }

  ArrayObj *live_array_of(const RV &v, const char *what) {
    ArrayObj *a = array_of(v, what);
    if (a && a->released) {
      diag("UseAfterRelease", std::string(what) + " on a released array");
      return nullptr;
    }
    return a;
  }

  RV eval(const Value *v, std::unordered_map<const Value *, RV> &env) {
    switch (v->kind()) {
      case ValueKind::IntConst:
        return v->int_value();
      case ValueKind::NullConst:
        return std::monostate{};
      case ValueKind::RangeConst:
        return v->range_value();
      case ValueKind::GlobalRef:
        return TableV{v->referenced_table()};
      case ValueKind::InstrResult:
      case ValueKind::FunctionArg: {
        auto it = env.find(v);
        if (it == env.end())
          throw InterpError("evaluating undefined value %" + v->name());
        return it->second;
      }
    }
    return std::monostate{};
  }

  std::optional<RV> exec_function(const Function *f, std::vector<RV> args) {
    if (++depth_ > 128) throw InterpError("call depth exceeded");
    std::unordered_map<const Value *, RV> env;
    for (std::size_t i = 0; i < args.size() && i < f->params().size(); ++i)
      env[f->params()[i]] = args[i];

    const BasicBlock *cur = f->entry();
    const BasicBlock *prev = nullptr;
    std::optional<RV> ret;
    while (cur) {
      // phis read their incoming values atomically
      std::vector<std::pair<const Value *, RV>> phi_values;
      for (const auto &in : cur->instructions()) {
        if (in->opcode() != Opcode::Phi) break;
        const auto &blocks = in->incoming_blocks();
        bool found = false;
        for (std::size_t i = 0; i < blocks.size(); ++i)
          if (blocks[i] == prev) {
            phi_values.emplace_back(in->result(), eval(in->operand(i), env));
            found = true;
            break;
          }
        if (!found)
          throw InterpError("phi in " + cur->name() +
                            " has no incoming for predecessor");
      }
      for (auto &[val, rv] : phi_values) env[val] = rv;

      const BasicBlock *next = nullptr;
      for (const auto &in : cur->instructions()) {
        if (in->opcode() == Opcode::Phi) continue;
        step();
        switch (in->opcode()) {
          case Opcode::Phi:
            break;
          case Opcode::Call: {
            std::vector<RV> cargs;
            cargs.reserve(in->num_operands());
            for (const Value *op : in->operands()) cargs.push_back(eval(op, env));
            std::optional<RV> r = dispatch_call(in.get(), std::move(cargs));
            if (in->result()) env[in->result()] = r ? *r : RV{};
            break;
          }
          case Opcode::Load: {
            RV p = eval(in->operand(0), env);
            env[in->result()] = load_cell(p);
            break;
          }
          case Opcode::Store: {
            RV val = eval(in->operand(0), env);
            RV p = eval(in->operand(1), env);
            store_cell(p, val);
            break;
          }
          case Opcode::Bitcast:
            env[in->result()] = eval(in->operand(0), env);
            break;
          case Opcode::ICmp: {
            std::int64_t a = as_int(eval(in->operand(0), env));
            std::int64_t b = as_int(eval(in->operand(1), env));
            bool r = false;
            switch (in->icmp_pred()) {
              case ICmpPred::EQ: r = a == b; break;
              case ICmpPred::NE: r = a != b; break;
              case ICmpPred::SLT: r = a < b; break;
              case ICmpPred::SLE: r = a <= b; break;
              case ICmpPred::SGT: r = a > b; break;
              case ICmpPred::SGE: r = a >= b; break;
            }
            env[in->result()] = static_cast<std::int64_t>(r);
            break;
          }
          case Opcode::BinOp: {
            std::int64_t a = as_int(eval(in->operand(0), env));
            std::int64_t b = as_int(eval(in->operand(1), env));
            std::int64_t r = 0;
            switch (in->binop_kind()) {
              case BinOpKind::Add: r = a + b; break;
              case BinOpKind::Sub: r = a - b; break;
              case BinOpKind::Mul: r = a * b; break;
            }
            env[in->result()] = r;
            break;
          }
          case Opcode::Br:
            if (in->is_conditional())
              next = as_int(eval(in->operand(0), env)) ? in->target_true()
                                                       : in->target_false();
            else
              next = in->target_true();
            break;
          case Opcode::Ret:
            if (in->num_operands() == 1) ret = eval(in->operand(0), env);
            else ret = RV{};
            --depth_;
            return ret;
          case Opcode::GepConst:
            // global-table addressing is inert at run time in this dialect
            env[in->result()] = RV{};
            break;
        }
      }
      prev = cur;
      cur = next;
    }
    --depth_;
    return ret;
  }

  static std::int64_t as_int(const RV &v) {
    if (std::holds_alternative<std::int64_t>(v))
      return std::get<std::int64_t>(v);
    throw InterpError("expected integer value");
  }

  RV load_cell(const RV &p) {
    if (!std::holds_alternative<ElemPtrV>(p)) {
      diag("TypeConfusion", "load through a non-element pointer");
      return {};
    }
    ElemPtrV ep = std::get<ElemPtrV>(p);
    ArrayObj &a = arrays_[ep.array];
    if (a.released) {
      diag("UseAfterRelease", "load from a released array");
      return {};
    }
    if (ep.index < 0 || ep.index >= static_cast<std::int64_t>(a.cells.size())) {
      diag("IndexOutOfBounds", "load at index " + std::to_string(ep.index));
      return {};
    }
    return a.cells[ep.index];
  }

  void store_cell(const RV &p, const RV &val) {
    if (!std::holds_alternative<ElemPtrV>(p)) {
      diag("TypeConfusion", "store through a non-element pointer");
      return;
    }
    ElemPtrV ep = std::get<ElemPtrV>(p);
    ArrayObj &a = arrays_[ep.array];
    if (a.released) {
      diag("UseAfterRelease", "store into a released array");
      return;
    }
    if (ep.index < 0 || ep.index >= static_cast<std::int64_t>(a.cells.size())) {
      diag("IndexOutOfBounds", "store at index " + std::to_string(ep.index));
      return;
    }
    a.cells[ep.index] = val;
  }

  std::optional<RV> dispatch_call(const Instruction *in, std::vector<RV> args) {
    const Function *callee = in->callee();
    if (!callee->is_declaration())
      return exec_function(callee, std::move(args));

    const std::string &name = callee->name();
    if (is_qis_callee(name)) return quantum_instruction(name, args);

    switch (classify_runtime_callee(name)) {
      case RuntimeFn::QubitAllocateArray: {
        std::int64_t n = as_int(args.at(0));
        ArrayObj a;
        a.is_qubit_register = true;
        std::int32_t alloc = next_alloc_++;
        for (std::int64_t i = 0; i < n; ++i)
          a.cells.push_back(QubitV{{alloc, static_cast<std::int32_t>(i)}});
        arrays_.push_back(std::move(a));
        return RV{ArrayV{static_cast<std::int32_t>(arrays_.size()) - 1}};
      }
      case RuntimeFn::QubitAllocate: {
        std::int32_t alloc = next_alloc_++;
        return RV{QubitV{{alloc, 0}}};
      }
      case RuntimeFn::QubitRelease:
        return RV{};
      case RuntimeFn::QubitReleaseArray: {
        if (ArrayObj *a = live_array_of(args.at(0), "qubit_release_array"))
          a->released = true;
        return RV{};
      }
      case RuntimeFn::ArrayCreate1d: {
        std::int64_t n = as_int(args.at(0));
        ArrayObj a;
        a.cells.resize(n);
        arrays_.push_back(std::move(a));
        return RV{ArrayV{static_cast<std::int32_t>(arrays_.size()) - 1}};
      }
      case RuntimeFn::ArrayGetElementPtr1d: {
        if (!std::holds_alternative<ArrayV>(args.at(0))) {
          diag("TypeConfusion", "element pointer into a non-array");
          return RV{};
        }
        ArrayV av = std::get<ArrayV>(args.at(0));
        if (arrays_[av.id].released)
          diag("UseAfterRelease", "element pointer into a released array");
        return RV{ElemPtrV{av.id, as_int(args.at(1))}};
      }
      case RuntimeFn::ArrayGetSize1d: {
        ArrayObj *a = live_array_of(args.at(0), "array_get_size_1d");
        return RV{a ? static_cast<std::int64_t>(a->cells.size()) : 0};
      }
      case RuntimeFn::ArraySlice1d: {
        ArrayObj *a = live_array_of(args.at(0), "array_slice_1d");
        if (!a) return RV{};
        if (!std::holds_alternative<RangeTriple>(args.at(1))) {
          diag("TypeConfusion", "slice range is not a %Range");
          return RV{};
        }
        ArrayObj out;
        for (std::int64_t i : range_to_indices(std::get<RangeTriple>(args.at(1)))) {
          if (i < 0 || i >= static_cast<std::int64_t>(a->cells.size())) {
            diag("IndexOutOfBounds", "slice index " + std::to_string(i));
            continue;
          }
          out.cells.push_back(a->cells[i]);
        }
        out.is_qubit_register = a->is_qubit_register;
        arrays_.push_back(std::move(out));
        return RV{ArrayV{static_cast<std::int32_t>(arrays_.size()) - 1}};
      }
      case RuntimeFn::ArrayUpdateAliasCount: {
        if (ArrayObj *a = live_array_of(args.at(0), "array_update_alias_count"))
          a->alias_count += as_int(args.at(1));
        return RV{};
      }
      case RuntimeFn::ArrayUpdateReferenceCount: {
        if (ArrayObj *a =
                live_array_of(args.at(0), "array_update_reference_count")) {
          a->reference_count += as_int(args.at(1));
          if (a->reference_count < 0)
            diag("UseAfterRelease", "reference count dropped below zero");
          if (a->reference_count <= 0 && !a->is_qubit_register)
            a->released = true;
        }
        return RV{};
      }
      case RuntimeFn::TupleCreate: {
        tuples_.push_back({as_int(args.at(0)), 1});
        return RV{TupleV{static_cast<std::int32_t>(tuples_.size()) - 1}};
      }
      case RuntimeFn::TupleUpdateAliasCount:
      case RuntimeFn::TupleUpdateReferenceCount:
      case RuntimeFn::CaptureUpdateAliasCount:
      case RuntimeFn::CaptureUpdateReferenceCount:
      case RuntimeFn::CallableUpdateAliasCount:
      case RuntimeFn::CallableUpdateReferenceCount:
      case RuntimeFn::ResultUpdateReferenceCount:
        return RV{};
      case RuntimeFn::CallableCreate: {
        if (!std::holds_alternative<TableV>(args.at(0))) {
          diag("TypeConfusion", "callable_create without a function table");
          return RV{};
        }
        callables_.push_back({std::get<TableV>(args.at(0)).table, false, 0});
        return RV{CallableV{static_cast<std::int32_t>(callables_.size()) - 1}};
      }
      case RuntimeFn::CallableMakeAdjoint: {
        if (std::holds_alternative<CallableV>(args.at(0)))
          callables_[std::get<CallableV>(args.at(0)).id].adjoint ^= true;
        return RV{};
      }
      case RuntimeFn::CallableMakeControlled: {
        if (std::holds_alternative<CallableV>(args.at(0)))
          ++callables_[std::get<CallableV>(args.at(0)).id].controlled;
        return RV{};
      }
      case RuntimeFn::CallableInvoke: {
        if (!std::holds_alternative<CallableV>(args.at(0))) {
          diag("TypeConfusion", "callable_invoke on a non-callable");
          return RV{};
        }
        const CallableObj &c = callables_[std::get<CallableV>(args.at(0)).id];
        int slot = (c.adjoint ? 1 : 0) + (c.controlled > 0 ? 2 : 0);
        const Function *wrapper =
            c.table && slot < 4 ? c.table->slots[slot] : nullptr;
        if (!wrapper || wrapper->is_declaration()) {
          diag("MissingWrapper", "callable table slot " +
                                     std::to_string(slot) + " is empty");
          return RV{};
        }
        // (capture, args, result) per wrapper convention
        exec_function(wrapper, {RV{}, args.at(1), args.at(2)});
        return RV{};
      }
      case RuntimeFn::ResultGetZero:
        return RV{ResultV{0}};
      case RuntimeFn::ResultGetOne:
        return RV{ResultV{1}};
      case RuntimeFn::ResultEqual: {
        int a = std::holds_alternative<ResultV>(args.at(0))
                    ? std::get<ResultV>(args.at(0)).outcome
                    : 0;
        int b = std::holds_alternative<ResultV>(args.at(1))
                    ? std::get<ResultV>(args.at(1)).outcome
                    : 0;
        return RV{static_cast<std::int64_t>(a == b)};
      }
      case RuntimeFn::Unknown:
        break;
    }

    if (policy_.trap_unknown_rt) throw UnknownRuntimeFunction(name);
    diag_warn_once(name);
    return RV{};
  }

  // Gate and measurement calls. Controls come from %Array*-typed operands
  // (their qubit contents at call time), targets from %Qubit* operands in
  // order. Measurements return the policy's fixed outcome.
  std::optional<RV> quantum_instruction(const std::string &name,
                                        const std::vector<RV> &args) {
    GateEvent ev;
    ev.gate = qis_gate_suffix(name);
    for (const RV &a : args) {
      if (std::holds_alternative<QubitV>(a)) {
        ev.targets.push_back(std::get<QubitV>(a).id);
      } else if (std::holds_alternative<ArrayV>(a)) {
        ArrayObj *arr = live_array_of(a, ev.gate.c_str());
        if (!arr) continue;
        for (const RV &c : arr->cells) {
          if (std::holds_alternative<QubitV>(c))
            ev.controls.push_back(std::get<QubitV>(c).id);
          else
            diag("TypeConfusion", ev.gate + ": control array holds a non-qubit");
        }
      }
    }
    for (const QubitId &c : ev.controls)
      if (std::find(ev.targets.begin(), ev.targets.end(), c) !=
          ev.targets.end())
        diag("ControlTargetOverlap", ev.gate + ": control is also a target");
    trace_.events.push_back(std::move(ev));
    bool is_measurement = name.find("__m__") != std::string::npos ||
                          name.find("__mz__") != std::string::npos;
    if (is_measurement) {
      const auto &o = policy_.measurement_outcomes;
      int outcome = o.empty() ? 0 : o[measure_count_++ % o.size()];
      return RV{ResultV{outcome}};
    }
    return RV{};
  }

  void diag_warn_once(const std::string &name) {
    if (warned_.insert(name).second)
      trace_.diagnostics.push_back(
          {"UnknownRuntimeFunctionWarning",
           "@" + name + " treated as an inert no-op", {}});
  }

  const Module &mod_;
  const InterpPolicy &policy_;
  GateTrace trace_;
  std::vector<ArrayObj> arrays_;
  std::vector<TupleObj> tuples_;
  std::vector<CallableObj> callables_;
  std::int32_t next_alloc_ = 0;
  std::uint64_t steps_ = 0;
  int depth_ = 0;
  std::size_t measure_count_ = 0;
  std::unordered_set<std::string> warned_;
};

}  // namespace

GateTrace interpret(const Module &m, const std::string &entry,
                    const InterpPolicy &policy) {
  Machine machine(m, policy);
  return machine.run(entry);
}

bool trace_equal(const GateTrace &a, const GateTrace &b) {
  if (!a.diagnostics.empty() || !b.diagnostics.empty()) return false;
  if (a.events.size() != b.events.size()) return false;
  for (std::size_t i = 0; i < a.events.size(); ++i) {
    const GateEvent &x = a.events[i];
    const GateEvent &y = b.events[i];
    if (x.gate != y.gate || x.targets != y.targets) return false;
    std::vector<QubitId> cx = x.controls, cy = y.controls;
    std::sort(cx.begin(), cx.end());
    std::sort(cy.begin(), cy.end());
    if (cx != cy) return false;
  }
  return true;
}

std::optional<std::size_t> first_divergence(const GateTrace &a,
                                            const GateTrace &b) {
  std::size_t n = std::min(a.events.size(), b.events.size());
  for (std::size_t i = 0; i < n; ++i) {
    const GateEvent &x = a.events[i];
    const GateEvent &y = b.events[i];
    std::vector<QubitId> cx = x.controls, cy = y.controls;
    std::sort(cx.begin(), cx.end());
    std::sort(cy.begin(), cy.end());
    if (x.gate != y.gate || x.targets != y.targets || cx != cy) return i;
  }
  if (a.events.size() != b.events.size()) return n;
  return std::nullopt;
}

std::string trace_to_string(const GateTrace &t) {
  std::ostringstream os;
  for (const GateEvent &e : t.events) {
    os << e.gate << "(controls{";
    std::vector<QubitId> cs = e.controls;
    std::sort(cs.begin(), cs.end());
    for (std::size_t i = 0; i < cs.size(); ++i) {
      if (i) os << ", ";
      os << cs[i].alloc << "." << cs[i].index;
    }
    os << "}, targets[";
    for (std::size_t i = 0; i < e.targets.size(); ++i) {
      if (i) os << ", ";
      os << e.targets[i].alloc << "." << e.targets[i].index;
    }
    os << "])\n";
  }
  for (const Diagnostic &d : t.diagnostics)
    os << "! " << d.code << ": " << d.message << "\n";
  return os.str();
}

}  // namespace qiropt
