#include "qiropt/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "qiropt/builder.hpp"

namespace qiropt {

namespace {

// splitmix64: deterministic across platforms, unlike <random> distributions.
struct Rng {
  std::uint64_t state;
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  std::uint64_t below(std::uint64_t n) { return next() % n; }
};

int gate_arity(GateKind k) {
  switch (k) {
    case GateKind::H:
    case GateKind::X:
    case GateKind::T:
    case GateKind::Tdg:
      return 1;
    case GateKind::CNOT:
    case GateKind::SWAP:
      return 2;
    case GateKind::CCX:
      return 3;
  }
  return 0;
}

void check_gate(const GateSpec &g, int n_qubits, bool in_loop,
                const char *where) {
  if (static_cast<int>(g.qubits.size()) != gate_arity(g.kind))
    throw InvalidSpec(std::string(where) + ": wrong arity for " +
                      std::string(gate_kind_name(g.kind)));
  std::set<int> seen;
  for (int q : g.qubits) {
    if (q == kLoopVar) {
      if (!in_loop)
        throw InvalidSpec(std::string(where) +
                          ": loop-variable index outside a repeat block");
    } else if (q < 0 || q >= n_qubits) {
      throw InvalidSpec(std::string(where) + ": qubit index " +
                        std::to_string(q) + " out of range");
    }
    if (!seen.insert(q).second)
      throw InvalidSpec(std::string(where) + ": repeated qubit in one gate");
  }
}

}  // namespace

std::string_view gate_kind_name(GateKind k) {
  switch (k) {
    case GateKind::H: return "h";
    case GateKind::X: return "x";
    case GateKind::T: return "t";
    case GateKind::Tdg: return "tdg";
    case GateKind::CNOT: return "cnot";
    case GateKind::CCX: return "ccx";
    case GateKind::SWAP: return "swap";
  }
  return "?";
}

void check_spec(const CircuitSpec &spec) {
  if (spec.n_qubits <= 0) throw InvalidSpec("nQubits must be positive");
  for (const CircuitItem &item : spec.items) {
    if (const auto *g = std::get_if<GateSpec>(&item)) {
      check_gate(*g, spec.n_qubits, false, spec.name.c_str());
    } else {
      const auto &rep = std::get<RepeatSpec>(item);
      if (rep.count < 0) throw InvalidSpec("repeat count must be nonnegative");
      bool uses_var = false;
      for (const GateSpec &g : rep.body) {
        check_gate(g, spec.n_qubits, true, spec.name.c_str());
        for (int q : g.qubits) uses_var |= q == kLoopVar;
      }
      if (uses_var && rep.count > spec.n_qubits)
        throw InvalidSpec("loop-variable repeat count exceeds nQubits");
    }
  }
}

std::vector<GateSpec> expand_gate(const GateSpec &g) {
  switch (g.kind) {
    case GateKind::H:
    case GateKind::X:
    case GateKind::T:
    case GateKind::Tdg:
    case GateKind::CNOT:
      return {g};
    case GateKind::SWAP: {
      int a = g.qubits[0], b = g.qubits[1];
      return {{GateKind::CNOT, {a, b}},
              {GateKind::CNOT, {b, a}},
              {GateKind::CNOT, {a, b}}};
    }
    case GateKind::CCX: {
      int c1 = g.qubits[0], c2 = g.qubits[1], t = g.qubits[2];
      return {{GateKind::H, {t}},     {GateKind::CNOT, {c2, t}},
              {GateKind::Tdg, {t}},   {GateKind::CNOT, {c1, t}},
              {GateKind::T, {t}},     {GateKind::CNOT, {c2, t}},
              {GateKind::Tdg, {t}},   {GateKind::CNOT, {c1, t}},
              {GateKind::T, {c2}},    {GateKind::T, {t}},
              {GateKind::CNOT, {c1, c2}}, {GateKind::H, {t}},
              {GateKind::T, {c1}},    {GateKind::Tdg, {c2}},
              {GateKind::CNOT, {c1, c2}}};
    }
  }
  return {};
}

std::size_t expanded_gate_count(const CircuitSpec &spec) {
  std::size_t n = 0;
  for (const CircuitItem &item : spec.items) {
    if (const auto *g = std::get_if<GateSpec>(&item)) {
      n += expand_gate(*g).size();
    } else {
      const auto &rep = std::get<RepeatSpec>(item);
      std::size_t body = 0;
      for (const GateSpec &g : rep.body) body += expand_gate(g).size();
      n += body * static_cast<std::size_t>(rep.count);
    }
  }
  return n;
}

namespace {

class Emitter {
 public:
  Emitter(const CircuitSpec &spec, const EmitterStyle &style)
      : spec_(spec), style_(style), mod_(std::make_unique<Module>()),
        b_(*mod_) {}

  std::unique_ptr<Module> emit() {
    main_ = mod_->create_function("main", Type::void_ty(), {}, false);
    BasicBlock *entry = main_->add_block("entry");
    b_.set_insert_block(entry);
    qs_ = b_.call(b_.rt_qubit_allocate_array(),
                  {mod_->i64_const(spec_.n_qubits)}, "qs");

    if (style_.callable_demo) emit_callable_demo();

    for (const CircuitItem &item : spec_.items) {
      if (const auto *g = std::get_if<GateSpec>(&item))
        emit_expanded(*g);
      else
        emit_repeat(std::get<RepeatSpec>(item));
    }

    finalize_create_cache();
    b_.vcall(b_.rt_qubit_release_array(), {qs_});
    b_.ret();
    return std::move(mod_);
  }

 private:
  Value *load_qubit_at(int index) {
    if (!style_.redundant_loads) {
      auto it = load_cache_.find(index);
      if (it != load_cache_.end()) return it->second;
    }
    Value *q = b_.load_qubit(qs_, mod_->i64_const(index), "qubit");
    if (!style_.redundant_loads) load_cache_[index] = q;
    return q;
  }

  // One fully expanded runtime gate with fixed indices.
  void emit_fixed_gate(const GateSpec &g) {
    switch (g.kind) {
      case GateKind::H:
        b_.vcall(b_.qis_single("h__body"), {load_qubit_at(g.qubits[0])}, true);
        break;
      case GateKind::X:
        b_.vcall(b_.qis_single("x__body"), {load_qubit_at(g.qubits[0])}, true);
        break;
      case GateKind::T:
        b_.vcall(b_.qis_single("t__body"), {load_qubit_at(g.qubits[0])}, true);
        break;
      case GateKind::Tdg:
        b_.vcall(b_.qis_single("t__adj"), {load_qubit_at(g.qubits[0])}, true);
        break;
      case GateKind::CNOT: {
        Value *ctl = load_qubit_at(g.qubits[0]);
        Value *tgt = load_qubit_at(g.qubits[1]);
        emit_controlled_x(ctl, tgt);
        break;
      }
      default:
        break;  // expand_gate already removed CCX/SWAP
    }
  }

  void emit_expanded(const GateSpec &g) {
    for (const GateSpec &e : expand_gate(g)) emit_fixed_gate(e);
  }

  void emit_controlled_x(Value *ctl, Value *tgt) {
    if (style_.wrap_controlled_gates) {
      b_.vcall(cnot_wrapper(), {ctl, tgt});
      return;
    }
    if (!style_.redundant_creates) {
      auto it = create_cache_.find(ctl);
      if (it != create_cache_.end()) {
        b_.vcall(b_.qis_controlled("x__ctl"), {it->second, tgt}, true);
        return;
      }
    }
    Value *arr = b_.call(b_.rt_array_create_1d(), {mod_->i64_const(1)},
                         "__controlQubits__");
    Value *p = b_.call(b_.rt_array_get_element_ptr_1d(),
                       {arr, mod_->i64_const(0)}, "elem");
    Value *pp = b_.bitcast(p, Type::qubit_ptr_ptr(), "cast");
    b_.store(ctl, pp);
    b_.vcall(b_.rt_array_update_alias_count(), {arr, mod_->i64_const(1)}, true);
    b_.vcall(b_.qis_controlled("x__ctl"), {arr, tgt}, true);
    if (style_.redundant_creates) {
      b_.vcall(b_.rt_array_update_alias_count(), {arr, mod_->i64_const(-1)},
               true);
      b_.vcall(b_.rt_array_update_reference_count(), {arr, mod_->i64_const(-1)},
               true);
    } else {
      create_cache_[ctl] = arr;
    }
  }

  void finalize_create_cache() {
    for (auto &[ctl, arr] : create_cache_) {
      b_.vcall(b_.rt_array_update_alias_count(), {arr, mod_->i64_const(-1)},
               true);
      b_.vcall(b_.rt_array_update_reference_count(), {arr, mod_->i64_const(-1)},
               true);
    }
    create_cache_.clear();
  }

  Function *cnot_wrapper() {
    if (cnot_wrapper_) return cnot_wrapper_;
    Function *f = mod_->create_function(
        "Intrinsic__CNOT__body", Type::void_ty(),
        {Type::qubit_ptr(), Type::qubit_ptr()}, false);
    f->set_internal(true);
    f->set_param_name(0, "control");
    f->set_param_name(1, "target");
    BasicBlock *entry = f->add_block("entry");
    BasicBlock *saved = b_.insert_block();
    b_.set_insert_block(entry);
    Value *arr = b_.call(b_.rt_array_create_1d(), {mod_->i64_const(1)},
                         "__controlQubits__");
    Value *p = b_.call(b_.rt_array_get_element_ptr_1d(),
                       {arr, mod_->i64_const(0)}, "elem");
    Value *pp = b_.bitcast(p, Type::qubit_ptr_ptr(), "cast");
    b_.store(f->params()[0], pp);
    b_.vcall(b_.rt_array_update_alias_count(), {arr, mod_->i64_const(1)}, true);
    b_.vcall(b_.qis_controlled("x__ctl"), {arr, f->params()[1]}, true);
    b_.vcall(b_.rt_array_update_alias_count(), {arr, mod_->i64_const(-1)}, true);
    b_.vcall(b_.rt_array_update_reference_count(), {arr, mod_->i64_const(-1)},
             true);
    b_.ret();
    b_.set_insert_block(saved);
    cnot_wrapper_ = f;
    return f;
  }

  // A self-contained operation dispatched through a callable table: the
  // wrapper allocates its own scratch register, flips it, and releases it.
  void emit_callable_demo() {
    Function *wrapper = mod_->create_function(
        "Oracle__body__wrapper", Type::void_ty(),
        {Type::tuple_ptr(), Type::tuple_ptr(), Type::tuple_ptr()}, false);
    wrapper->set_internal(true);
    wrapper->set_param_name(0, "capture.tuple");
    wrapper->set_param_name(1, "arg.tuple");
    wrapper->set_param_name(2, "result.tuple");
    BasicBlock *entry = wrapper->add_block("entry");
    BasicBlock *saved = b_.insert_block();
    b_.set_insert_block(entry);
    Value *anc = b_.call(b_.rt_qubit_allocate_array(), {mod_->i64_const(1)},
                         "ancilla");
    Value *q = b_.load_qubit(anc, mod_->i64_const(0), "aq");
    b_.vcall(b_.qis_single("x__body"), {q}, true);
    b_.vcall(b_.rt_qubit_release_array(), {anc});
    b_.ret();
    b_.set_insert_block(saved);

    GlobalTable *table = mod_->create_table(
        "Oracle__FunctionTable", {wrapper, nullptr, nullptr, nullptr});
    Value *c = b_.call(
        b_.rt_callable_create(),
        {mod_->global_ref(table), mod_->null_const(Type::tuple_ptr())}, "op");
    Value *args = b_.call(b_.rt_tuple_create(), {mod_->i64_const(0)}, "args");
    b_.vcall(b_.rt_callable_invoke(),
             {c, args, mod_->null_const(Type::tuple_ptr())}, true);
    b_.vcall(b_.rt_callable_update_reference_count(),
             {c, mod_->i64_const(-1)}, true);
    b_.vcall(b_.rt_tuple_update_reference_count(),
             {args, mod_->i64_const(-1)}, true);
  }

  void emit_repeat(const RepeatSpec &rep) {
    bool uses_var = false;
    for (const GateSpec &g : rep.body)
      for (int q : g.qubits) uses_var |= q == kLoopVar;

    if (style_.loop_form == EmitterStyle::LoopForm::UnrolledSource ||
        !uses_var) {
      for (int i = 0; i < rep.count; ++i)
        for (const GateSpec &g : rep.body) emit_expanded(substitute(g, i));
      return;
    }

    // Runtime-size loop: the bound comes from the array's size when the
    // count spans the whole register, otherwise it is a literal.
    Value *bound = rep.count == spec_.n_qubits
                       ? b_.call(b_.rt_array_get_size_1d(), {qs_}, "size")
                       : mod_->i64_const(rep.count);
    BasicBlock *pre = b_.insert_block();
    Function *f = pre->parent();
    BasicBlock *header = f->add_block("header");
    BasicBlock *body = f->add_block("body");
    BasicBlock *exit = f->add_block("exit");
    b_.br(header);

    b_.set_insert_block(header);
    Value *iv = b_.phi(Type::i64_ty(), {mod_->i64_const(0)}, {pre}, "i");
    Value *cmp = b_.icmp(ICmpPred::SLT, iv, bound, "cond");
    b_.cond_br(cmp, body, exit);

    b_.set_insert_block(body);
    Value *var_qubit = nullptr;
    for (const GateSpec &g : rep.body) {
      for (const GateSpec &e : expand_gate(g)) {
        // loads inside the loop are fresh by construction
        std::vector<Value *> qubits;
        for (int q : e.qubits) {
          if (q == kLoopVar) {
            if (!var_qubit || style_.redundant_loads)
              var_qubit = b_.load_qubit(qs_, iv, "qubit");
            qubits.push_back(var_qubit);
          } else {
            qubits.push_back(b_.load_qubit(qs_, mod_->i64_const(q), "qubit"));
          }
        }
        switch (e.kind) {
          case GateKind::H:
            b_.vcall(b_.qis_single("h__body"), {qubits[0]}, true);
            break;
          case GateKind::X:
            b_.vcall(b_.qis_single("x__body"), {qubits[0]}, true);
            break;
          case GateKind::T:
            b_.vcall(b_.qis_single("t__body"), {qubits[0]}, true);
            break;
          case GateKind::Tdg:
            b_.vcall(b_.qis_single("t__adj"), {qubits[0]}, true);
            break;
          case GateKind::CNOT:
            emit_controlled_x(qubits[0], qubits[1]);
            break;
          default:
            break;
        }
      }
    }
    Value *inc = b_.binop(BinOpKind::Add, iv, mod_->i64_const(1), "inc");
    b_.br(header);
    iv->def_instr()->add_phi_incoming(inc, b_.insert_block());

    b_.set_insert_block(exit);
  }

  static GateSpec substitute(const GateSpec &g, int loop_value) {
    GateSpec out = g;
    for (int &q : out.qubits)
      if (q == kLoopVar) q = loop_value;
    return out;
  }

  const CircuitSpec &spec_;
  const EmitterStyle &style_;
  std::unique_ptr<Module> mod_;
  IrBuilder b_;
  Function *main_ = nullptr;
  Value *qs_ = nullptr;
  Function *cnot_wrapper_ = nullptr;
  std::map<int, Value *> load_cache_;
  std::map<Value *, Value *> create_cache_;
};

}  // namespace

std::unique_ptr<Module> emit_qir(const CircuitSpec &spec,
                                 const EmitterStyle &style) {
  check_spec(spec);
  Emitter e(spec, style);
  return e.emit();
}

CircuitSpec random_circuit(std::string name, int n_qubits,
                           std::size_t target_gates, std::uint64_t seed) {
  Rng rng{seed ^ 0xA5A5A5A5D00DFEEDULL};
  CircuitSpec spec;
  spec.name = std::move(name);
  spec.n_qubits = n_qubits;
  std::size_t emitted = 0;
  auto pick_distinct = [&](int k) {
    std::vector<int> qs;
    while (static_cast<int>(qs.size()) < k) {
      int q = static_cast<int>(rng.below(n_qubits));
      if (std::find(qs.begin(), qs.end(), q) == qs.end()) qs.push_back(q);
    }
    return qs;
  };
  while (emitted < target_gates) {
    std::size_t remaining = target_gates - emitted;
    std::uint64_t roll = rng.below(100);
    GateSpec g;
    if (roll < 40 || remaining < 3) {
      constexpr GateKind one_q[] = {GateKind::H, GateKind::X, GateKind::T,
                                    GateKind::Tdg};
      g = {one_q[rng.below(4)], pick_distinct(1)};
    } else if (roll < 85) {
      g = {GateKind::CNOT, pick_distinct(2)};
    } else if (roll < 95 || remaining < 15) {
      g = {GateKind::SWAP, pick_distinct(2)};
    } else {
      g = {GateKind::CCX, pick_distinct(3)};
    }
    std::size_t cost = expand_gate(g).size();
    if (cost > remaining) continue;
    spec.items.push_back(g);
    emitted += cost;
  }
  return spec;
}

std::vector<NamedCircuit> builtin_corpus(std::uint64_t seed) {
  std::vector<NamedCircuit> out;

  {
    NamedCircuit toffoli;
    toffoli.spec.name = "toffoli_decomposition";
    toffoli.spec.n_qubits = 3;
    toffoli.spec.items = {GateSpec{GateKind::CCX, {0, 1, 2}}};
    toffoli.style.wrap_controlled_gates = false;
    out.push_back(std::move(toffoli));
  }

  {
    // H layer, oracle of CNOTs, diffusion with per-layer loops; two
    // materialized repetitions of the oracle+diffusion step.
    NamedCircuit grover;
    grover.spec.name = "grover_like";
    grover.spec.n_qubits = 3;
    RepeatSpec h_layer{3, {GateSpec{GateKind::H, {kLoopVar}}}};
    RepeatSpec x_layer{3, {GateSpec{GateKind::X, {kLoopVar}}}};
    auto &items = grover.spec.items;
    items.push_back(h_layer);
    for (int iter = 0; iter < 2; ++iter) {
      items.push_back(GateSpec{GateKind::CNOT, {0, 2}});
      items.push_back(GateSpec{GateKind::CNOT, {1, 2}});
      items.push_back(h_layer);
      items.push_back(x_layer);
      items.push_back(GateSpec{GateKind::CNOT, {0, 2}});
      items.push_back(x_layer);
      items.push_back(h_layer);
    }
    grover.style.wrap_controlled_gates = true;
    grover.style.loop_form = EmitterStyle::LoopForm::RuntimeSizeLoop;
    grover.style.callable_demo = true;
    out.push_back(std::move(grover));
  }

  for (std::size_t gates : {18u, 100u, 500u, 2000u, 6723u}) {
    NamedCircuit sc;
    sc.spec = random_circuit("scaling_" + std::to_string(gates), 8, gates,
                             seed * 0x9e3779b9ULL + gates);
    sc.style.wrap_controlled_gates = false;
    out.push_back(std::move(sc));
  }
  return out;
}

const NamedCircuit *find_builtin(const std::vector<NamedCircuit> &corpus,
                                 const std::string &name) {
  for (const NamedCircuit &c : corpus)
    if (c.spec.name == name) return &c;
  return nullptr;
}

// ---------------------------------------------------------------------------
// Circuit document IO

namespace {

using ordered_json = nlohmann::ordered_json;

GateKind gate_kind_from(const std::string &s) {
  for (GateKind k : {GateKind::H, GateKind::X, GateKind::T, GateKind::Tdg,
                     GateKind::CNOT, GateKind::CCX, GateKind::SWAP})
    if (gate_kind_name(k) == s) return k;
  throw SchemaError("unknown gate kind '" + s + "'");
}

GateSpec gate_from_json(const ordered_json &j) {
  if (!j.contains("gate") || !j["gate"].is_string())
    throw SchemaError("gate entry missing 'gate'");
  if (!j.contains("qubits") || !j["qubits"].is_array())
    throw SchemaError("gate entry missing 'qubits'");
  GateSpec g;
  g.kind = gate_kind_from(j["gate"].get<std::string>());
  for (const auto &q : j["qubits"]) {
    if (!q.is_number_integer()) throw SchemaError("qubit index must be an int");
    g.qubits.push_back(q.get<int>());
  }
  return g;
}

ordered_json gate_to_json(const GateSpec &g) {
  ordered_json j;
  j["gate"] = std::string(gate_kind_name(g.kind));
  j["qubits"] = g.qubits;
  return j;
}

}  // namespace

CircuitSpec circuit_from_json_text(const std::string &text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error &e) {
    throw SchemaError(std::string("invalid JSON: ") + e.what());
  }
  CircuitSpec spec;
  if (j.contains("name")) spec.name = j["name"].get<std::string>();
  if (!j.contains("nQubits") || !j["nQubits"].is_number_integer())
    throw SchemaError("nQubits");
  spec.n_qubits = j["nQubits"].get<int>();
  if (!j.contains("gates") || !j["gates"].is_array())
    throw SchemaError("gates");
  for (const auto &item : j["gates"]) {
    if (item.contains("repeat")) {
      RepeatSpec rep;
      if (!item["repeat"].is_number_integer()) throw SchemaError("repeat");
      rep.count = item["repeat"].get<int>();
      if (!item.contains("body") || !item["body"].is_array())
        throw SchemaError("body");
      for (const auto &g : item["body"]) rep.body.push_back(gate_from_json(g));
      spec.items.push_back(rep);
    } else {
      spec.items.push_back(gate_from_json(item));
    }
  }
  try {
    check_spec(spec);
  } catch (const InvalidSpec &e) {
    throw SchemaError(e.what());
  }
  return spec;
}

std::string circuit_to_json_text(const CircuitSpec &spec) {
  ordered_json j;
  j["name"] = spec.name;
  j["nQubits"] = spec.n_qubits;
  j["gates"] = ordered_json::array();
  for (const CircuitItem &item : spec.items) {
    if (const auto *g = std::get_if<GateSpec>(&item)) {
      j["gates"].push_back(gate_to_json(*g));
    } else {
      const auto &rep = std::get<RepeatSpec>(item);
      ordered_json r;
      r["repeat"] = rep.count;
      r["body"] = ordered_json::array();
      for (const GateSpec &g : rep.body) r["body"].push_back(gate_to_json(g));
      j["gates"].push_back(r);
    }
  }
  return j.dump(2) + "\n";
}

CircuitSpec load_circuit_file(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return circuit_from_json_text(ss.str());
}

void save_circuit_file(const CircuitSpec &spec, const std::string &path) {
  std::ofstream out(path);
  if (!out) throw SchemaError("cannot write file " + path);
  out << circuit_to_json_text(spec);
}

}  // namespace qiropt
