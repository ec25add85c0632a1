#include "qiropt/cleanup.hpp"

#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "qiropt/parser.hpp"
#include "qiropt/printer.hpp"

namespace qiropt {

namespace {

// Operand rewrite without dominance checking; used for constants and other
// replacements whose validity the caller has already established.
std::size_t rewrite_uses(Value *old_v, Value *new_v, Function &f) {
  std::size_t n = 0;
  for (const auto &bb : f.blocks())
    for (const auto &in : bb->instructions())
      for (std::size_t i = 0; i < in->num_operands(); ++i)
        if (in->operand(i) == old_v) {
          in->set_operand(i, new_v);
          ++n;
        }
  return n;
}

std::unordered_map<const Value *, std::size_t> use_counts(const Function &f) {
  std::unordered_map<const Value *, std::size_t> counts;
  for (const auto &bb : f.blocks())
    for (const auto &in : bb->instructions())
      for (const Value *v : in->operands()) ++counts[v];
  return counts;
}

std::unordered_map<const BasicBlock *, std::vector<BasicBlock *>> pred_map(
    const Function &f) {
  std::unordered_map<const BasicBlock *, std::vector<BasicBlock *>> preds;
  for (const auto &bb : f.blocks())
    for (BasicBlock *s : bb->successors()) preds[s].push_back(bb.get());
  return preds;
}

void drop_phi_edges_from(BasicBlock *target, const BasicBlock *removed_pred) {
  for (const auto &in : target->instructions()) {
    if (in->opcode() != Opcode::Phi) break;
    auto &blocks = in->incoming_blocks();
    for (std::size_t i = blocks.size(); i-- > 0;)
      if (blocks[i] == removed_pred) in->remove_phi_incoming(i);
  }
}

void rename_phi_edges(BasicBlock *target, BasicBlock *from, BasicBlock *to) {
  for (const auto &in : target->instructions()) {
    if (in->opcode() != Opcode::Phi) break;
    for (BasicBlock *&b : in->incoming_blocks())
      if (b == from) b = to;
  }
}

// Clones `src` into `f` appending at the end, remapping operands and
// incoming blocks through the maps. Branch targets are remapped by a second
// pass once all blocks exist.
BasicBlock *clone_block(Function &f, Module &mod, const BasicBlock &src,
                        std::unordered_map<const Value *, Value *> &vmap,
                        std::unordered_map<const BasicBlock *, BasicBlock *>
                            &bmap,
                        const std::string &hint) {
  BasicBlock *out = f.add_block(hint);
  auto mapped = [&](Value *v) -> Value * {
    auto it = vmap.find(v);
    return it == vmap.end() ? v : it->second;
  };
  for (const auto &in : src.instructions()) {
    std::unique_ptr<Instruction> c;
    std::vector<Value *> ops;
    ops.reserve(in->num_operands());
    for (Value *v : in->operands()) ops.push_back(mapped(v));
    switch (in->opcode()) {
      case Opcode::Call:
        c = mod.make_call(in->callee(), std::move(ops), "", in->is_tail());
        break;
      case Opcode::Load:
        c = mod.make_load(in->result()->type(), ops[0], "");
        break;
      case Opcode::Store:
        c = mod.make_store(ops[0], ops[1]);
        break;
      case Opcode::Bitcast:
        c = mod.make_bitcast(ops[0], in->result()->type(), "");
        break;
      case Opcode::Br:
        c = in->is_conditional()
                ? mod.make_cond_br(ops[0], in->target_true(),
                                   in->target_false())
                : mod.make_br(in->target_true());
        break;
      case Opcode::ICmp:
        c = mod.make_icmp(in->icmp_pred(), ops[0], ops[1], "");
        break;
      case Opcode::BinOp:
        c = mod.make_binop(in->binop_kind(), ops[0], ops[1], "");
        break;
      case Opcode::Phi:
        c = mod.make_phi(in->result()->type(), std::move(ops),
                         in->incoming_blocks(), "");
        break;
      case Opcode::Ret:
        c = ops.empty() ? mod.make_ret() : mod.make_ret(ops[0]);
        break;
      case Opcode::GepConst: {
        std::vector<Value *> idx(ops.begin() + 1, ops.end());
        c = mod.make_gep_const(ops[0], idx, in->result()->type(), "");
        break;
      }
    }
    if (in->result()) {
      c->result()->set_name(f.unique_name(in->result()->name()));
      vmap[in->result()] = c->result();
    }
    out->append(std::move(c));
  }
  bmap[&src] = out;
  return out;
}

void remap_clone_targets(
    const std::vector<BasicBlock *> &clones,
    const std::unordered_map<const BasicBlock *, BasicBlock *> &bmap) {
  for (BasicBlock *bb : clones)
    for (const auto &in : bb->instructions()) {
      if (in->opcode() == Opcode::Br) {
        auto t = bmap.find(in->target_true());
        auto fl = in->is_conditional() ? bmap.find(in->target_false())
                                       : bmap.end();
        in->set_targets(t == bmap.end() ? in->target_true() : t->second,
                        in->is_conditional()
                            ? (fl == bmap.end() ? in->target_false()
                                                : fl->second)
                            : nullptr);
      }
      if (in->opcode() == Opcode::Phi)
        for (BasicBlock *&b : in->incoming_blocks()) {
          auto it = bmap.find(b);
          if (it != bmap.end()) b = it->second;
        }
    }
}

bool referenced_by_table(const Module &m, const Function *f) {
  for (const auto &g : m.globals())
    for (const Function *slot : g->slots)
      if (slot == f) return true;
  return false;
}

std::size_t call_count(const Module &m, const Function *f) {
  std::size_t n = 0;
  for (const auto &fn : m.functions())
    fn->for_each_instruction([&](Instruction *in) {
      if (in->opcode() == Opcode::Call && in->callee() == f) ++n;
      return true;
    });
  return n;
}

// Functions on an always-inline cycle (directly or via other always-inline
// functions) cannot be inlined.
std::unordered_set<const Function *> recursive_inline_set(const Module &m) {
  std::unordered_set<const Function *> recursive;
  for (const auto &f : m.functions()) {
    if (f->is_declaration() || !f->always_inline()) continue;
    // DFS from f through always-inline defined callees.
    std::vector<const Function *> stack{f.get()};
    std::unordered_set<const Function *> seen;
    bool cycle = false;
    while (!stack.empty() && !cycle) {
      const Function *cur = stack.back();
      stack.pop_back();
      cur->for_each_instruction([&](Instruction *in) {
        if (in->opcode() != Opcode::Call) return true;
        const Function *callee = in->callee();
        if (callee == nullptr || callee->is_declaration() ||
            !callee->always_inline())
          return true;
        if (callee == f.get()) {
          cycle = true;
          return false;
        }
        if (seen.insert(callee).second) stack.push_back(callee);
        return true;
      });
    }
    if (cycle) recursive.insert(f.get());
  }
  return recursive;
}

// Inlines one call site. Returns the continuation block.
void inline_call_site(Module &m, Function &caller, Instruction *call) {
  Function *callee = call->callee();
  BasicBlock *bb = call->parent();

  // Split: everything after the call moves to a continuation block.
  BasicBlock *cont = caller.add_block_after(bb, bb->name() + ".cont");
  std::vector<Instruction *> tail;
  bool after = false;
  for (const auto &in : bb->instructions()) {
    if (after) tail.push_back(in.get());
    if (in.get() == call) after = true;
  }
  for (Instruction *in : tail) cont->append(bb->detach(in));
  for (BasicBlock *succ : cont->successors()) rename_phi_edges(succ, bb, cont);

  // Clone the callee body.
  std::unordered_map<const Value *, Value *> vmap;
  std::unordered_map<const BasicBlock *, BasicBlock *> bmap;
  std::size_t n_args = std::min(callee->params().size(), call->num_operands());
  for (std::size_t i = 0; i < n_args; ++i)
    vmap[callee->params()[i]] = call->operand(i);
  std::vector<BasicBlock *> clones;
  for (const auto &src : callee->blocks())
    clones.push_back(clone_block(caller, m, *src, vmap, bmap,
                                 src->name() + ".i"));
  remap_clone_targets(clones, bmap);

  // Rets become branches to the continuation; a returned value replaces the
  // call result (phi when there are several returns).
  std::vector<std::pair<BasicBlock *, Value *>> returns;
  for (BasicBlock *cb : clones) {
    Instruction *t = cb->terminator();
    if (t && t->opcode() == Opcode::Ret) {
      Value *rv = t->num_operands() ? t->operand(0) : nullptr;
      cb->erase(t);
      cb->append(m.make_br(cont));
      returns.emplace_back(cb, rv);
    }
  }
  if (call->result()) {
    Value *replacement = nullptr;
    if (returns.size() == 1) {
      replacement = returns[0].second;
    } else if (returns.size() > 1) {
      std::vector<Value *> vals;
      std::vector<BasicBlock *> froms;
      for (auto &[blk, val] : returns) {
        vals.push_back(val);
        froms.push_back(blk);
      }
      auto phi = m.make_phi(call->result()->type(), std::move(vals),
                            std::move(froms),
                            caller.unique_name(call->result()->name()));
      replacement = phi->result();
      cont->insert_before(cont->front(), std::move(phi));
    }
    if (replacement) rewrite_uses(call->result(), replacement, caller);
  }

  // The original block now falls through to the cloned entry.
  bb->erase(call);
  bb->append(m.make_br(bmap.at(callee->entry())));

  // Place the clones between bb and cont in block order for readable output.
  std::unordered_set<BasicBlock *> placed(clones.begin(), clones.end());
  placed.insert(cont);
  std::vector<BasicBlock *> order;
  for (const auto &p : caller.blocks()) {
    if (placed.count(p.get())) continue;
    order.push_back(p.get());
    if (p.get() == bb) {
      for (BasicBlock *cb : clones) order.push_back(cb);
      order.push_back(cont);
    }
  }
  caller.reorder_blocks(order);
}

}  // namespace

std::size_t inline_always(Module &m, const CleanupConfig &cfg,
                          DiagList *diags) {
  std::size_t inlined = 0;
  auto recursive = recursive_inline_set(m);
  for (const Function *f : recursive)
    note(diags, "RecursionDetected",
         "always-inline function @" + f->name() + " is recursive; kept");

  for (std::size_t round = 0; round < cfg.max_inline_depth; ++round) {
    std::size_t this_round = 0;
    for (const auto &caller : m.functions()) {
      if (caller->is_declaration()) continue;
      // collect first: inlining mutates the block list
      std::vector<Instruction *> sites;
      caller->for_each_instruction([&](Instruction *in) {
        Function *callee = in->callee();
        if (in->opcode() == Opcode::Call && callee != nullptr &&
            !callee->is_declaration() && callee->always_inline() &&
            callee != caller.get() && !recursive.count(callee))
          sites.push_back(in);
        return true;
      });
      for (Instruction *site : sites) {
        inline_call_site(m, *caller, site);
        ++this_round;
      }
    }
    inlined += this_round;
    if (this_round == 0) break;
  }

  // Drop bodies that are no longer referenced anywhere.
  std::vector<Function *> droppable;
  for (const auto &f : m.functions())
    if (!f->is_declaration() && f->always_inline() &&
        call_count(m, f.get()) == 0 && !referenced_by_table(m, f.get()) &&
        f->name() != "main")
      droppable.push_back(f.get());
  for (Function *f : droppable) m.remove_function(f);

  return inlined;
}

std::size_t fold_constants_and_simplify(Module &m, DiagList *diags) {
  std::size_t rewrites = 0;
  for (const auto &f : m.functions()) {
    if (f->is_declaration()) continue;
    bool changed = true;
    while (changed) {
      changed = false;

      // constant arithmetic and comparisons
      std::vector<Instruction *> foldable;
      f->for_each_instruction([&](Instruction *in) {
        if (in->opcode() == Opcode::ICmp || in->opcode() == Opcode::BinOp) {
          auto a = in->operand(0)->as_int_const();
          auto b = in->operand(1)->as_int_const();
          if (a && b) foldable.push_back(in);
        }
        return true;
      });
      for (Instruction *in : foldable) {
        std::int64_t a = *in->operand(0)->as_int_const();
        std::int64_t b = *in->operand(1)->as_int_const();
        Value *result = nullptr;
        if (in->opcode() == Opcode::ICmp) {
          bool r = false;
          switch (in->icmp_pred()) {
            case ICmpPred::EQ: r = a == b; break;
            case ICmpPred::NE: r = a != b; break;
            case ICmpPred::SLT: r = a < b; break;
            case ICmpPred::SLE: r = a <= b; break;
            case ICmpPred::SGT: r = a > b; break;
            case ICmpPred::SGE: r = a >= b; break;
          }
          result = m.bool_const(r);
        } else {
          std::int64_t r = 0;
          switch (in->binop_kind()) {
            case BinOpKind::Add: r = a + b; break;
            case BinOpKind::Sub: r = a - b; break;
            case BinOpKind::Mul: r = a * b; break;
          }
          result = m.int_const(in->result()->type(), r);
        }
        rewrite_uses(in->result(), result, *f);
        in->parent()->erase(in);
        ++rewrites;
        changed = true;
      }

      // branches on constant conditions
      for (const auto &bb : f->blocks()) {
        Instruction *t = bb->terminator();
        if (!t || t->opcode() != Opcode::Br || !t->is_conditional()) continue;
        auto c = t->operand(0)->as_int_const();
        if (!c) continue;
        BasicBlock *taken = *c ? t->target_true() : t->target_false();
        BasicBlock *dropped = *c ? t->target_false() : t->target_true();
        bb->erase(t);
        bb->append(m.make_br(taken));
        if (dropped != taken) drop_phi_edges_from(dropped, bb.get());
        ++rewrites;
        changed = true;
      }

      // unreachable blocks
      {
        std::unordered_set<const BasicBlock *> reachable;
        std::vector<BasicBlock *> work{f->entry()};
        while (!work.empty()) {
          BasicBlock *cur = work.back();
          work.pop_back();
          if (!reachable.insert(cur).second) continue;
          for (BasicBlock *s : cur->successors()) work.push_back(s);
        }
        std::vector<BasicBlock *> dead;
        for (const auto &bb : f->blocks())
          if (!reachable.count(bb.get())) dead.push_back(bb.get());
        for (BasicBlock *bb : dead)
          for (BasicBlock *s : bb->successors())
            if (reachable.count(s)) drop_phi_edges_from(s, bb);
        for (BasicBlock *bb : dead) {
          f->remove_block(bb);
          ++rewrites;
          changed = true;
        }
      }

      // trivial phis: single incoming, or all incomings equal (ignoring
      // self-references)
      std::vector<Instruction *> trivial;
      f->for_each_instruction([&](Instruction *in) {
        if (in->opcode() != Opcode::Phi) return true;
        Value *only = nullptr;
        bool ok = true;
        for (Value *v : in->operands()) {
          if (v == in->result()) continue;
          if (only == nullptr) only = v;
          else if (only != v) ok = false;
        }
        if (ok && only) trivial.push_back(in);
        return true;
      });
      for (Instruction *in : trivial) {
        Value *only = nullptr;
        for (Value *v : in->operands())
          if (v != in->result()) only = v;
        rewrite_uses(in->result(), only, *f);
        in->parent()->erase(in);
        ++rewrites;
        changed = true;
      }

      // merge straight-line chains
      {
        auto preds = pred_map(*f);
        for (const auto &bbp : f->blocks()) {
          BasicBlock *bb = bbp.get();
          Instruction *t = bb->terminator();
          if (!t || t->opcode() != Opcode::Br || t->is_conditional()) continue;
          BasicBlock *next = t->target_true();
          if (next == bb || next == f->entry()) continue;
          auto pit = preds.find(next);
          if (pit == preds.end() || pit->second.size() != 1) continue;
          if (!next->empty() && next->front()->opcode() == Opcode::Phi)
            continue;  // collapsed on a later round
          bb->erase(t);
          std::vector<Instruction *> moving;
          for (const auto &in : next->instructions()) moving.push_back(in.get());
          for (Instruction *in : moving) bb->append(next->detach(in));
          for (BasicBlock *s : bb->successors()) rename_phi_edges(s, next, bb);
          f->remove_block(next);
          ++rewrites;
          changed = true;
          break;  // block list changed; restart scan
        }
      }
    }
  }
  (void)diags;
  return rewrites;
}

namespace {

struct CountedLoop {
  BasicBlock *preheader = nullptr;
  BasicBlock *header = nullptr;
  BasicBlock *body = nullptr;  // also the latch
  BasicBlock *exit = nullptr;
  Instruction *phi = nullptr;
  Instruction *cmp = nullptr;
  Instruction *inc = nullptr;
  std::int64_t init = 0;
  std::int64_t step = 0;
  std::size_t trip = 0;
};

std::optional<CountedLoop> match_loop(Function &f, BasicBlock *header,
                                      std::size_t max_trip) {
  auto preds = pred_map(f);
  auto pit = preds.find(header);
  if (pit == preds.end() || pit->second.size() != 2) return std::nullopt;

  // header: phi, icmp, cond-br (exactly)
  if (header->size() != 3) return std::nullopt;
  Instruction *phi = header->instructions()[0].get();
  Instruction *cmp = header->instructions()[1].get();
  Instruction *br = header->instructions()[2].get();
  if (phi->opcode() != Opcode::Phi || cmp->opcode() != Opcode::ICmp ||
      br->opcode() != Opcode::Br || !br->is_conditional() ||
      br->operand(0) != cmp->result())
    return std::nullopt;
  if (phi->num_operands() != 2) return std::nullopt;

  BasicBlock *body =
      br->target_true() == header ? nullptr : br->target_true();
  BasicBlock *exit = br->target_false();
  bool body_on_true = true;
  // identify which target loops back via the latch
  auto is_latch = [&](BasicBlock *b) {
    return b && b->terminator() && b->terminator()->opcode() == Opcode::Br &&
           !b->terminator()->is_conditional() &&
           b->terminator()->target_true() == header;
  };
  if (!is_latch(body)) {
    if (!is_latch(exit)) return std::nullopt;
    std::swap(body, exit);
    body_on_true = false;
  }
  if (body == nullptr || exit == header || exit == body) return std::nullopt;
  if (is_latch(exit)) return std::nullopt;  // ambiguous shape

  // single-block body, no interior phis
  if (!body->empty() && body->front()->opcode() == Opcode::Phi)
    return std::nullopt;

  // preheader is the other predecessor of header
  BasicBlock *preheader =
      pit->second[0] == body ? pit->second[1] : pit->second[0];
  if (preheader == body) return std::nullopt;

  // phi incomings: init from preheader, inc from body
  Value *init_v = nullptr, *inc_v = nullptr;
  for (std::size_t i = 0; i < 2; ++i) {
    if (phi->incoming_blocks()[i] == preheader) init_v = phi->operand(i);
    if (phi->incoming_blocks()[i] == body) inc_v = phi->operand(i);
  }
  if (!init_v || !inc_v) return std::nullopt;
  auto init = init_v->as_int_const();
  if (!init) return std::nullopt;
  Instruction *inc = inc_v->kind() == ValueKind::InstrResult
                         ? inc_v->def_instr()
                         : nullptr;
  if (!inc || inc->parent() != body || inc->opcode() != Opcode::BinOp)
    return std::nullopt;
  std::optional<std::int64_t> step;
  if (inc->operand(0) == phi->result())
    step = inc->operand(1)->as_int_const();
  else if (inc->operand(1) == phi->result() &&
           inc->binop_kind() == BinOpKind::Add)
    step = inc->operand(0)->as_int_const();
  if (!step || *step == 0) return std::nullopt;
  std::int64_t eff_step =
      inc->binop_kind() == BinOpKind::Sub ? -*step
      : inc->binop_kind() == BinOpKind::Add ? *step
                                            : 0;
  if (eff_step == 0) return std::nullopt;

  // comparison must involve the phi and a constant
  std::optional<std::int64_t> bound;
  bool phi_lhs = false;
  if (cmp->operand(0) == phi->result()) {
    bound = cmp->operand(1)->as_int_const();
    phi_lhs = true;
  } else if (cmp->operand(1) == phi->result()) {
    bound = cmp->operand(0)->as_int_const();
  }
  if (!bound) return std::nullopt;

  auto continues = [&](std::int64_t i) {
    std::int64_t a = phi_lhs ? i : *bound;
    std::int64_t b = phi_lhs ? *bound : i;
    bool c = false;
    switch (cmp->icmp_pred()) {
      case ICmpPred::EQ: c = a == b; break;
      case ICmpPred::NE: c = a != b; break;
      case ICmpPred::SLT: c = a < b; break;
      case ICmpPred::SLE: c = a <= b; break;
      case ICmpPred::SGT: c = a > b; break;
      case ICmpPred::SGE: c = a >= b; break;
    }
    return body_on_true ? c : !c;
  };

  CountedLoop loop;
  loop.preheader = preheader;
  loop.header = header;
  loop.body = body;
  loop.exit = exit;
  loop.phi = phi;
  loop.cmp = cmp;
  loop.inc = inc;
  loop.init = *init;
  loop.step = eff_step;
  std::int64_t i = *init;
  std::size_t trip = 0;
  while (continues(i)) {
    if (++trip > max_trip) return std::nullopt;
    i += eff_step;
  }
  loop.trip = trip;
  return loop;
}

}  // namespace

std::size_t unroll_constant_loops(Module &m, const CleanupConfig &cfg,
                                  DiagList *diags) {
  std::size_t unrolled = 0;
  for (const auto &f : m.functions()) {
    if (f->is_declaration()) continue;
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto &bbp : f->blocks()) {
        auto loop = match_loop(*f, bbp.get(), cfg.max_unroll_trip_count);
        if (!loop) continue;

        // chain the iterations
        BasicBlock *pre = loop->preheader;
        Instruction *pre_br = pre->terminator();
        std::vector<BasicBlock *> clones;
        BasicBlock *insert_after = pre;
        for (std::size_t k = 0; k < loop->trip; ++k) {
          std::unordered_map<const Value *, Value *> vmap;
          std::unordered_map<const BasicBlock *, BasicBlock *> bmap;
          vmap[loop->phi->result()] = m.i64_const(
              loop->init + static_cast<std::int64_t>(k) * loop->step);
          BasicBlock *cb = clone_block(*f, m, *loop->body, vmap, bmap,
                                       loop->body->name() + ".u");
          // the clone's back edge becomes a fall-through to the next piece
          Instruction *t = cb->terminator();
          cb->erase(t);
          clones.push_back(cb);
          insert_after = cb;
        }
        std::int64_t final_iv =
            loop->init + static_cast<std::int64_t>(loop->trip) * loop->step;

        // wire: preheader -> first clone -> ... -> exit
        BasicBlock *first =
            clones.empty() ? loop->exit : clones.front();
        if (pre_br->opcode() == Opcode::Br) {
          if (pre_br->target_true() == loop->header)
            pre_br->set_targets(first, pre_br->is_conditional()
                                           ? pre_br->target_false()
                                           : nullptr);
          if (pre_br->is_conditional() &&
              pre_br->target_false() == loop->header)
            pre_br->set_targets(pre_br->target_true(), first);
        }
        for (std::size_t k = 0; k < clones.size(); ++k)
          clones[k]->append(m.make_br(k + 1 < clones.size() ? clones[k + 1]
                                                            : loop->exit));

        // exit-side fixups: the induction value and its increment observed
        // after the loop equal the first value failing the condition
        rename_phi_edges(loop->exit, loop->header,
                         clones.empty() ? pre : clones.back());
        rewrite_uses(loop->phi->result(), m.i64_const(final_iv), *f);
        rewrite_uses(loop->inc->result(), m.i64_const(final_iv), *f);

        f->remove_block(loop->header);
        f->remove_block(loop->body);

        // keep source order readable: clones sit after the preheader
        std::vector<BasicBlock *> order;
        for (const auto &p : f->blocks()) {
          if (std::find(clones.begin(), clones.end(), p.get()) != clones.end())
            continue;
          order.push_back(p.get());
          if (p.get() == pre)
            for (BasicBlock *cb : clones) order.push_back(cb);
        }
        f->reorder_blocks(order);

        ++unrolled;
        changed = true;
        break;  // block list invalidated; rescan
      }
    }
  }
  (void)diags;
  return unrolled;
}

std::size_t dce_pure(Module &m, DiagList *diags) {
  (void)diags;
  std::size_t removed = 0;
  for (const auto &f : m.functions()) {
    if (f->is_declaration()) continue;
    auto counts = use_counts(*f);
    auto pure = [](const Instruction *in) {
      switch (in->opcode()) {
        case Opcode::Load:
        case Opcode::Bitcast:
        case Opcode::ICmp:
        case Opcode::BinOp:
        case Opcode::Phi:
        case Opcode::GepConst:
          return true;
        default:
          return false;
      }
    };
    std::vector<Instruction *> work;
    f->for_each_instruction([&](Instruction *in) {
      if (pure(in) && counts[in->result()] == 0) work.push_back(in);
      return true;
    });
    std::unordered_set<Instruction *> dead(work.begin(), work.end());
    while (!work.empty()) {
      Instruction *in = work.back();
      work.pop_back();
      for (Value *v : in->operands()) {
        if (--counts[v] == 0 && v->kind() == ValueKind::InstrResult) {
          Instruction *def = v->def_instr();
          if (def && !def->erased() && pure(def) && dead.insert(def).second)
            work.push_back(def);
        }
      }
    }
    removed += dead.size();
    erase_instructions(*f, dead);
  }
  return removed;
}

std::string run_external_opt(const Module &m, const std::string &cmd_template) {
  namespace fs = std::filesystem;
  static int counter = 0;
  fs::path dir = fs::temp_directory_path();
  fs::path in_path = dir / ("qiropt-ext-" + std::to_string(::getpid()) + "-" +
                            std::to_string(counter) + ".in.ll");
  fs::path out_path = dir / ("qiropt-ext-" + std::to_string(::getpid()) + "-" +
                             std::to_string(counter) + ".out.ll");
  ++counter;
  {
    std::ofstream out(in_path);
    out << print_module(m);
  }
  std::string cmd =
      cmd_template + " " + in_path.string() + " -o " + out_path.string();
  int rc = std::system(cmd.c_str());
  if (rc != 0) {
    fs::remove(in_path);
    throw ExternalOptFailed(rc, cmd);
  }
  std::ifstream in(out_path);
  if (!in) throw ExternalOptFailed(-1, "no output file from " + cmd);
  std::stringstream ss;
  ss << in.rdbuf();
  fs::remove(in_path);
  fs::remove(out_path);
  return ss.str();
}

CleanupSummary run_cleanup(std::unique_ptr<Module> &m,
                           const CleanupConfig &cfg, DiagList *diags) {
  CleanupSummary summary;
  if (cfg.external_opt_command) {
    std::string text = run_external_opt(*m, *cfg.external_opt_command);
    m = parse_module(text);
    summary.rounds = 1;
    return summary;
  }
  for (std::size_t round = 0; round < 8; ++round) {
    std::size_t n = 0;
    std::size_t k;
    k = inline_always(*m, cfg, diags);
    summary.inlined_calls += k;
    n += k;
    k = fold_constants_and_simplify(*m, diags);
    summary.folds += k;
    n += k;
    k = unroll_constant_loops(*m, cfg, diags);
    summary.loops_unrolled += k;
    n += k;
    k = dce_pure(*m, diags);
    summary.dce_removed += k;
    n += k;
    ++summary.rounds;
    if (n == 0) break;
  }
  return summary;
}

}  // namespace qiropt
