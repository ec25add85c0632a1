#include "qiropt/qdfo.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "qiropt/preprocess.hpp"
#include "qiropt/runtime_names.hpp"

namespace qiropt {

namespace {

RuntimeFn callee_kind(const Instruction *in) {
  if (in->opcode() != Opcode::Call || in->callee() == nullptr)
    return RuntimeFn::Unknown;
  return classify_runtime_callee(in->callee()->name());
}

bool is_gate_call(const Instruction *in) {
  return in->opcode() == Opcode::Call && is_qis_callee(in->callee_name());
}

std::string at(const Function &f) { return "@" + f.name(); }

// One-scan use index for the collectors (they do not mutate the function).
class UseMap {
 public:
  explicit UseMap(const Function &f) {
    for (const auto &bb : f.blocks())
      for (const auto &in : bb->instructions())
        for (std::size_t i = 0; i < in->num_operands(); ++i)
          map_[in->operand(i)].push_back({in.get(), i});
  }
  const std::vector<UseSite> &of(const Value *v) const {
    static const std::vector<UseSite> empty;
    auto it = map_.find(v);
    return it == map_.end() ? empty : it->second;
  }

 private:
  std::unordered_map<const Value *, std::vector<UseSite>> map_;
};

}  // namespace

// ---------------------------------------------------------------------------
// Slice provenance

void slice_calculating(Instruction *inst, SliceInfoList &acc, DiagList *diags) {
  if (callee_kind(inst) != RuntimeFn::ArraySlice1d) return;
  if (inst->num_operands() < 2) return;

  Value *parent = inst->operand(0);
  Value *range = inst->operand(1);
  if (range->kind() != ValueKind::RangeConst) {
    note(diags, "DynamicRange", "slice range is not a constant",
         at(*inst->parent_function()));
    return;
  }
  std::vector<std::int64_t> indices = range_to_indices(range->range_value());

  Definition parent_def;
  try {
    parent_def = def_of(parent);
  } catch (const DanglingValue &) {
    return;
  }
  if (parent_def.kind != DefKind::Instruction) return;

  SliceInfo elm;
  elm.slice_instr = inst;
  RuntimeFn k = callee_kind(parent_def.instr);
  if (k == RuntimeFn::ArraySlice1d) {
    // composed through the parent slice's map; both view the same allocation
    const SliceInfo *parent_info = nullptr;
    for (const SliceInfo &s : acc)
      if (s.slice_instr == parent_def.instr) parent_info = &s;
    if (!parent_info) return;
    elm.tag = SliceInfo::Tag::Slice;
    elm.slice_from_instr = parent_info->slice_from_instr;
    for (std::int64_t i : indices) {
      if (i < 0 || i >= static_cast<std::int64_t>(parent_info->q_ref.size())) {
        note(diags, "IndexOutOfBounds",
             "slice position " + std::to_string(i) +
                 " outside the parent slice",
             at(*inst->parent_function()));
        return;
      }
      elm.q_ref.push_back(parent_info->q_ref[i]);
    }
  } else if (k == RuntimeFn::QubitAllocateArray) {
    elm.tag = SliceInfo::Tag::Array;
    elm.slice_from_instr = parent_def.instr;
    auto len = parent_def.instr->operand(0)->as_int_const();
    for (std::int64_t i : indices) {
      if (i < 0 || (len && i >= *len)) {
        note(diags, "IndexOutOfBounds",
             "slice index " + std::to_string(i) +
                 " outside the allocated array",
             at(*inst->parent_function()));
        return;
      }
    }
    elm.q_ref = std::move(indices);
  } else {
    return;  // unknown source; not tracked
  }
  acc.push_back(std::move(elm));
}

SliceInfoList compute_slices(Function &f, DiagList *diags) {
  SliceInfoList acc;
  for (const BasicBlock *bb : reverse_postorder(f))
    for (const auto &in : bb->instructions())
      slice_calculating(in.get(), acc, diags);
  return acc;
}

// ---------------------------------------------------------------------------
// Load idioms

std::vector<LoadOpDesc> collect_load_ops(Function &f,
                                         const SliceInfoList &slices,
                                         const QdfoConfig &cfg,
                                         DiagList *diags) {
  std::vector<LoadOpDesc> out;
  UseMap uses(f);
  std::unordered_map<const Instruction *, const SliceInfo *> slice_by_instr;
  for (const SliceInfo &s : slices) slice_by_instr[s.slice_instr] = &s;

  std::vector<Instruction *> geps;
  f.for_each_instruction([&](Instruction *in) {
    if (callee_kind(in) == RuntimeFn::ArrayGetElementPtr1d) geps.push_back(in);
    return true;
  });

  for (Instruction *gep : geps) {
    auto index = gep->operand(1)->as_int_const();
    if (!index) {
      note(diags, "DynamicIndex", "element pointer with non-constant index",
           at(f));
      continue;
    }
    // resolve the source array to its allocation
    Instruction *allocation = nullptr;
    std::int64_t resolved = 0;
    Value *source = gep->operand(0);
    Definition sdef;
    try {
      sdef = def_of(source);
    } catch (const DanglingValue &) {
      continue;
    }
    if (sdef.kind != DefKind::Instruction) {
      note(diags, "UnresolvableSource",
           "element pointer into a non-local array", at(f));
      continue;
    }
    RuntimeFn k = callee_kind(sdef.instr);
    if (k == RuntimeFn::QubitAllocateArray) {
      auto len = sdef.instr->operand(0)->as_int_const();
      if (!len || *index < 0 || *index >= *len) {
        note(diags, "IndexOutOfBounds", "load index outside the allocation",
             at(f));
        continue;
      }
      if (*len > cfg.max_qubits) {
        note(diags, "AllocationTooLarge",
             "allocation of " + std::to_string(*len) +
                 " qubits exceeds the cap of " +
                 std::to_string(cfg.max_qubits),
             at(f));
        continue;
      }
      allocation = sdef.instr;
      resolved = *index;
    } else if (k == RuntimeFn::ArraySlice1d) {
      auto it = slice_by_instr.find(sdef.instr);
      if (it == slice_by_instr.end()) {
        note(diags, "UnresolvableSource", "load from an untracked slice",
             at(f));
        continue;
      }
      const SliceInfo *info = it->second;
      if (*index < 0 ||
          *index >= static_cast<std::int64_t>(info->q_ref.size())) {
        note(diags, "IndexOutOfBounds", "load index outside the slice", at(f));
        continue;
      }
      allocation = info->slice_from_instr;
      resolved = info->q_ref[*index];
    } else {
      continue;  // control arrays etc.; not qubit-register loads
    }

    // complete the gep -> bitcast(%Qubit**) -> load chain
    for (const UseSite &gsite : uses.of(gep->result())) {
      Instruction *cast = gsite.user;
      if (cast->opcode() != Opcode::Bitcast ||
          cast->result()->type() != Type::qubit_ptr_ptr())
        continue;
      for (const UseSite &csite : uses.of(cast->result())) {
        Instruction *load = csite.user;
        if (load->opcode() != Opcode::Load) continue;
        LoadOpDesc d;
        d.gep_call = gep;
        d.bitcast = cast;
        d.load_inst = load;
        d.source_array = source;
        d.index = *index;
        d.allocation = allocation;
        d.resolved_qubit = resolved;
        out.push_back(d);
      }
    }
  }
  return out;
}

namespace {

// Calls that take the allocation's array (or a slice of it) and may change
// element identity; load merges never cross them.
std::vector<Instruction *> mutation_barriers(Function &f,
                                             const Instruction *allocation,
                                             const SliceInfoList &slices) {
  std::unordered_set<const Value *> views;
  if (allocation->result()) views.insert(allocation->result());
  for (const SliceInfo &s : slices)
    if (s.slice_from_instr == allocation && s.slice_instr->result())
      views.insert(s.slice_instr->result());

  std::vector<Instruction *> barriers;
  f.for_each_instruction([&](Instruction *in) {
    if (in->opcode() != Opcode::Call) return true;
    bool takes_view = false;
    for (const Value *op : in->operands())
      if (views.count(op)) takes_view = true;
    if (!takes_view) return true;
    if (is_gate_call(in)) return true;  // gates read qubit identities only
    if (is_array_readonly(classify_runtime_callee(in->callee_name())))
      return true;
    barriers.push_back(in);
    return true;
  });
  return barriers;
}

}  // namespace

std::size_t qdfo_load(Function &f, const std::vector<LoadOpDesc> &loads,
                      const SliceInfoList &slices, DiagList *diags) {
  if (loads.empty()) return 0;
  DominatorInfo dom(f);

  // qubit table: (allocation, resolved index) -> loads of that qubit
  std::map<std::pair<const Instruction *, std::int64_t>,
           std::vector<const LoadOpDesc *>>
      table;
  for (const LoadOpDesc &d : loads)
    table[{d.allocation, d.resolved_qubit}].push_back(&d);

  auto counts = [&] {
    std::unordered_map<const Value *, std::size_t> c;
    for (const auto &bb : f.blocks())
      for (const auto &in : bb->instructions())
        for (const Value *v : in->operands()) ++c[v];
    return c;
  }();

  std::unordered_map<const Instruction *, std::vector<Instruction *>>
      barrier_cache;
  auto barriers_for = [&](const Instruction *alloc)
      -> const std::vector<Instruction *> & {
    auto it = barrier_cache.find(alloc);
    if (it == barrier_cache.end())
      it = barrier_cache
               .emplace(alloc,
                        mutation_barriers(f, alloc, slices))
               .first;
    return it->second;
  };

  std::size_t merges = 0;
  std::unordered_map<Value *, Value *> batch;  // duplicate load -> survivor

  for (auto &[key, bucket] : table) {
    if (bucket.size() < 2) continue;
    bool same_block = true;
    for (const LoadOpDesc *d : bucket)
      if (d->load_inst->parent() != bucket.front()->load_inst->parent())
        same_block = false;

    const auto &barriers = barriers_for(key.first);
    auto crossed = [&](const Instruction *from, const Instruction *to) {
      for (Instruction *x : barriers)
        if (is_before(from, x, dom) == Order::ABeforeB &&
            is_before(x, to, dom) == Order::ABeforeB)
          return true;
      return false;
    };

    if (same_block) {
      std::vector<const LoadOpDesc *> sorted(bucket.begin(), bucket.end());
      std::sort(sorted.begin(), sorted.end(),
                [](const LoadOpDesc *a, const LoadOpDesc *b) {
                  return a->load_inst->ordinal() < b->load_inst->ordinal();
                });
      const LoadOpDesc *survivor = sorted.front();
      for (std::size_t i = 1; i < sorted.size(); ++i) {
        const LoadOpDesc *dup = sorted[i];
        if (crossed(survivor->load_inst, dup->load_inst)) {
          note(diags, "BarrierBlocksMerge",
               "array mutation between duplicate loads", at(f));
          continue;
        }
        if (counts[dup->load_inst->result()] == 0) continue;  // already dead
        batch[dup->load_inst->result()] = survivor->load_inst->result();
        ++merges;
      }
    } else {
      // branching code: pairwise, skipping unordered pairs
      for (std::size_t i = 0; i < bucket.size(); ++i) {
        for (std::size_t j = i + 1; j < bucket.size(); ++j) {
          Instruction *a = bucket[i]->load_inst;
          Instruction *b = bucket[j]->load_inst;
          Order ord = is_before(a, b, dom);
          if (ord == Order::Unordered) {
            note(diags, "UnorderedLoads",
                 "duplicate loads in unordered branches; skipped", at(f));
            continue;
          }
          Instruction *before = ord == Order::ABeforeB ? a : b;
          Instruction *after = ord == Order::ABeforeB ? b : a;
          if (crossed(before, after)) {
            note(diags, "BarrierBlocksMerge",
                 "array mutation between duplicate loads", at(f));
            continue;
          }
          try {
            if (replace_all_uses(after->result(), before->result(), f, dom) >
                0)
              ++merges;
          } catch (const DominanceViolation &) {
            note(diags, "DominanceBlocksMerge",
                 "replacement would not dominate every use", at(f));
          }
        }
      }
    }
  }

  if (!batch.empty()) {
    for (const auto &bb : f.blocks())
      for (const auto &in : bb->instructions())
        for (std::size_t i = 0; i < in->num_operands(); ++i) {
          auto it = batch.find(in->operand(i));
          if (it != batch.end()) in->set_operand(i, it->second);
        }
  }
  return merges;
}

// ---------------------------------------------------------------------------
// QIR-aware DCE

namespace {

bool keyword_matches(const std::string &callee,
                     const std::vector<std::string> &keywords) {
  for (const std::string &k : keywords)
    if (callee.find(k) != std::string::npos) return true;
  return false;
}

// True when every (transitive) use of v is a bitcast whose uses are likewise
// removable, or a bookkeeping call on v itself. Fills `closure` with the
// users to delete.
bool removable_use_closure(Value *v, const UseMap &uses,
                           std::vector<Instruction *> &closure) {
  for (const UseSite &site : uses.of(v)) {
    Instruction *user = site.user;
    if (user->opcode() == Opcode::Bitcast) {
      if (!removable_use_closure(user->result(), uses, closure)) return false;
      closure.push_back(user);
      continue;
    }
    if (user->opcode() == Opcode::Call &&
        is_memory_management(classify_runtime_callee(user->callee_name())) &&
        site.operand_index == 0) {
      closure.push_back(user);
      continue;
    }
    return false;
  }
  return true;
}

}  // namespace

std::size_t qir_dce(Function &f, const QdfoConfig &cfg, DiagList *diags) {
  (void)diags;
  std::size_t removed = 0;
  bool changed = true;
  while (changed) {
    changed = false;
    UseMap uses(f);
    std::unordered_set<Instruction *> dead;
    f.for_each_instruction([&](Instruction *in) {
      if (in->opcode() != Opcode::Call || in->result() == nullptr ||
          !keyword_matches(in->callee_name(), cfg.dce_keywords))
        return true;
      std::vector<Instruction *> closure;
      if (!removable_use_closure(in->result(), uses, closure)) return true;
      dead.insert(closure.begin(), closure.end());
      dead.insert(in);
      return true;
    });
    if (!dead.empty()) {
      removed += dead.size();
      erase_instructions(f, dead);
      changed = true;
    }
  }
  return removed;
}

// ---------------------------------------------------------------------------
// Create idioms

std::vector<CreateOpGroup> collect_create_ops(Function &f,
                                              const QdfoConfig &cfg,
                                              DiagList *diags) {
  std::vector<CreateOpGroup> out;
  UseMap uses(f);
  std::vector<Instruction *> creates;
  f.for_each_instruction([&](Instruction *in) {
    if (callee_kind(in) == RuntimeFn::ArrayCreate1d) creates.push_back(in);
    return true;
  });

  for (Instruction *create : creates) {
    auto len = create->operand(0)->as_int_const();
    if (!len || *len <= 0 || *len > cfg.max_qubits) {
      note(diags, "CreateNotTracked",
           "array_create_1d with unusable length", at(f));
      continue;
    }
    CreateOpGroup g;
    g.create_call = create;
    g.length = *len;
    g.stores.resize(static_cast<std::size_t>(*len));
    g.stored_qubits.resize(static_cast<std::size_t>(*len), nullptr);

    bool complete = true;
    for (const UseSite &site : uses.of(create->result())) {
      Instruction *user = site.user;
      RuntimeFn k = callee_kind(user);
      if (k == RuntimeFn::ArrayGetElementPtr1d && site.operand_index == 0) {
        auto slot = user->operand(1)->as_int_const();
        if (!slot || *slot < 0 || *slot >= *len) {
          complete = false;
          break;
        }
        auto &triple = g.stores[static_cast<std::size_t>(*slot)];
        if (triple.gep_call != nullptr) {
          complete = false;  // two geps into one slot
          break;
        }
        // gep -> bitcast(%Qubit**) -> store
        const auto &gep_uses = uses.of(user->result());
        if (gep_uses.size() != 1 ||
            gep_uses[0].user->opcode() != Opcode::Bitcast ||
            gep_uses[0].user->result()->type() != Type::qubit_ptr_ptr()) {
          complete = false;  // not a control-qubit slot
          break;
        }
        Instruction *cast = gep_uses[0].user;
        const auto &cast_uses = uses.of(cast->result());
        if (cast_uses.size() != 1 ||
            cast_uses[0].user->opcode() != Opcode::Store ||
            cast_uses[0].operand_index != 1) {
          complete = false;
          break;
        }
        Instruction *store = cast_uses[0].user;
        if (store->operand(0)->type() != Type::qubit_ptr()) {
          complete = false;
          break;
        }
        triple = {user, cast, store};
        g.stored_qubits[static_cast<std::size_t>(*slot)] = store->operand(0);
      } else if (k == RuntimeFn::ArrayUpdateAliasCount ||
                 k == RuntimeFn::ArrayUpdateReferenceCount) {
        g.mgmt_calls.push_back(user);
      } else if (is_gate_call(user)) {
        g.gate_uses.push_back(user);
      } else {
        complete = false;  // escapes to something the pass cannot reason about
        break;
      }
    }
    if (!complete) {
      note(diags, "PartialCreateOp",
           "control array construction incomplete or escaping", at(f));
      continue;
    }
    for (std::size_t i = 0; i < g.stores.size(); ++i)
      if (g.stores[i].store_inst == nullptr) complete = false;
    if (!complete) {
      note(diags, "PartialCreateOp", "not every slot is stored", at(f));
      continue;
    }
    out.push_back(std::move(g));
  }
  return out;
}

std::size_t mmo(Function &f, CreateOpGroup &group, DiagList *diags) {
  DominatorInfo dom(f);
  Value *arr = group.create_call->result();

  // classify current uses; own construction triples are expected
  std::unordered_set<const Instruction *> own;
  for (const auto &t : group.stores) own.insert(t.gep_call);
  std::vector<Instruction *> mgmt;
  std::vector<Instruction *> gates;
  for (const UseSite &site : uses_of(arr, f)) {
    Instruction *user = site.user;
    if (own.count(user)) continue;
    RuntimeFn k = callee_kind(user);
    if (k == RuntimeFn::ArrayUpdateAliasCount ||
        k == RuntimeFn::ArrayUpdateReferenceCount) {
      mgmt.push_back(user);
    } else if (is_gate_call(user)) {
      gates.push_back(user);
    } else {
      note(diags, "UnsafeEscape",
           "control array reaches @" + user->callee_name() +
               "; bookkeeping left untouched",
           at(f));
      return 0;
    }
  }
  if (gates.empty()) return 0;

  // first and last gate use must be totally ordered
  Instruction *first = gates.front();
  Instruction *last = gates.front();
  for (Instruction *g : gates) {
    Order of = is_before(g, first, dom);
    Order ol = is_before(last, g, dom);
    if (of == Order::Unordered || ol == Order::Unordered) {
      note(diags, "UnorderedGateUses",
           "gate uses in unordered branches; bookkeeping left untouched",
           at(f));
      return 0;
    }
    if (of == Order::ABeforeB) first = g;
    if (ol == Order::ABeforeB) last = g;
  }

  auto strictly_between = [&](Instruction *x) {
    return x != first && x != last &&
           is_before(first, x, dom) == Order::ABeforeB &&
           is_before(x, last, dom) == Order::ABeforeB;
  };
  auto delta_of = [](Instruction *x) {
    auto d = x->operand(1)->as_int_const();
    return d ? *d : 0;
  };

  // a release before the first gate would free the array under later code
  for (Instruction *x : mgmt)
    if (callee_kind(x) == RuntimeFn::ArrayUpdateReferenceCount &&
        delta_of(x) < 0 && is_before(x, first, dom) == Order::ABeforeB &&
        x != first) {
      note(diags, "UnsafeEscape",
           "reference decrement before the first gate use", at(f));
      return 0;
    }

  std::vector<Instruction *> removable;
  std::int64_t alias_net = 0;
  for (Instruction *x : mgmt)
    if (strictly_between(x)) {
      removable.push_back(x);
      if (callee_kind(x) == RuntimeFn::ArrayUpdateAliasCount)
        alias_net += delta_of(x);
    }
  if (alias_net != 0) {
    note(diags, "UnbalancedAlias",
         "alias updates between first and last use do not cancel", at(f));
    return 0;
  }
  for (Instruction *x : removable) x->parent()->erase(x);
  return removable.size();
}

std::size_t qdfo_create(Function &f, std::vector<CreateOpGroup> groups,
                        DiagList *diags, std::size_t *mmo_removed) {
  DominatorInfo dom(f);

  // canonical key: (length, stored qubit identities as a set)
  std::map<std::pair<std::int64_t, std::vector<const Value *>>,
           std::vector<CreateOpGroup *>>
      buckets;
  for (CreateOpGroup &g : groups) {
    std::vector<const Value *> key_set(g.stored_qubits.begin(),
                                       g.stored_qubits.end());
    std::sort(key_set.begin(), key_set.end());
    if (std::adjacent_find(key_set.begin(), key_set.end()) != key_set.end()) {
      note(diags, "DuplicateStoredQubit",
           "control array stores one qubit twice; not merged", at(f));
      continue;
    }
    buckets[{g.length, std::move(key_set)}].push_back(&g);
  }

  std::size_t merges = 0;
  std::unordered_set<const CreateOpGroup *> erased;
  std::unordered_map<Value *, Value *> rewrite;  // duplicate array -> survivor
  std::unordered_set<Instruction *> victims;
  for (auto &[key, bucket] : buckets) {
    if (bucket.size() < 2) continue;
    // earliest create in dominance order survives; a linear scan finds it
    // without needing a total order
    CreateOpGroup *survivor = bucket.front();
    for (CreateOpGroup *g : bucket)
      if (is_before(g->create_call, survivor->create_call, dom) ==
          Order::ABeforeB)
        survivor = g;
    for (CreateOpGroup *dup : bucket) {
      if (dup == survivor) continue;
      if (is_before(survivor->create_call, dup->create_call, dom) !=
          Order::ABeforeB) {
        note(diags, "UnorderedCreates",
             "duplicate control arrays in unordered branches; skipped", at(f));
        continue;
      }
      // the survivor dominates the duplicate's create, hence every use of it
      rewrite[dup->create_call->result()] = survivor->create_call->result();
      for (const auto &t : dup->stores) {
        victims.insert(t.store_inst);
        victims.insert(t.bitcast);
        victims.insert(t.gep_call);
      }
      victims.insert(dup->create_call);
      erased.insert(dup);
      ++merges;
    }
  }
  if (!rewrite.empty()) {
    for (const auto &bb : f.blocks())
      for (const auto &in : bb->instructions())
        for (std::size_t i = 0; i < in->num_operands(); ++i) {
          auto it = rewrite.find(in->operand(i));
          if (it != rewrite.end()) in->set_operand(i, it->second);
        }
    erase_instructions(f, victims);
  }

  // bookkeeping pruning on every surviving group
  std::size_t pruned = 0;
  for (CreateOpGroup &g : groups)
    if (!erased.count(&g) && !g.create_call->erased())
      pruned += mmo(f, g, diags);
  if (mmo_removed) *mmo_removed += pruned;
  return merges;
}

// ---------------------------------------------------------------------------
// Counters and workflow

IdiomCounts count_idioms(Module &m, const QdfoConfig &cfg) {
  IdiomCounts c;
  for (const auto &f : m.functions()) {
    if (f->is_declaration()) continue;
    SliceInfoList slices = compute_slices(*f);
    c.load_ops += collect_load_ops(*f, slices, cfg).size();
    c.create_ops += collect_create_ops(*f, cfg).size();
  }
  c.instructions = m.instruction_count();
  return c;
}

OptimizationReport run_workflow(std::unique_ptr<Module> &m,
                                const WorkflowConfig &cfg) {
  OptimizationReport report;
  report.before = count_idioms(*m, cfg.qdfo);
  DiagList *diags = &report.diagnostics;

  auto cleanup = [&] {
    if (!cfg.run_cleanup_stages) return;
    CleanupSummary s = run_cleanup(m, cfg.cleanup, diags);
    report.counters.cleanup.inlined_calls += s.inlined_calls;
    report.counters.cleanup.folds += s.folds;
    report.counters.cleanup.loops_unrolled += s.loops_unrolled;
    report.counters.cleanup.dce_removed += s.dce_removed;
    report.counters.cleanup.rounds += s.rounds;
  };

  bool stable = false;
  for (std::size_t iter = 0; iter < cfg.max_iterations && !stable; ++iter) {
    ++report.iterations;
    std::size_t before_count = m->instruction_count();
    std::size_t rewrites_before = report.counters.total();

    report.counters.qir_inline += qir_inline(*m, diags);
    report.counters.loop_unroll_prep += qir_loop_unroll_prep(*m, diags);
    cleanup();

    for (const auto &f : m->functions()) {
      if (f->is_declaration()) continue;
      SliceInfoList slices = compute_slices(*f, diags);
      auto loads = collect_load_ops(*f, slices, cfg.qdfo, diags);
      report.counters.load_merges += qdfo_load(*f, loads, slices, diags);
    }
    cleanup();

    for (const auto &f : m->functions()) {
      if (f->is_declaration()) continue;
      report.counters.dce_removed += qir_dce(*f, cfg.qdfo, diags);
    }
    report.counters.ctl_inline +=
        qir_ctl_inline(*m, cfg.ctl_inline_patterns, diags);
    cleanup();

    for (const auto &f : m->functions()) {
      if (f->is_declaration()) continue;
      auto groups = collect_create_ops(*f, cfg.qdfo, diags);
      report.counters.create_merges += qdfo_create(
          *f, std::move(groups), diags, &report.counters.mmo_removed);
    }
    cleanup();

    stable = m->instruction_count() == before_count &&
             report.counters.total() == rewrites_before;
  }
  report.fixpoint_reached = stable;
  report.after = count_idioms(*m, cfg.qdfo);
  return report;
}

}  // namespace qiropt
