#include "qiropt/dataflow.hpp"

#include <algorithm>
#include <cassert>

namespace qiropt {

// Reverse postorder over the CFG from the entry block.
std::vector<const BasicBlock *> reverse_postorder(const Function &f) {
  std::vector<const BasicBlock *> post;
  std::unordered_map<const BasicBlock *, bool> seen;
  // iterative DFS
  struct Frame {
    const BasicBlock *bb;
    std::vector<BasicBlock *> succ;
    std::size_t next = 0;
  };
  if (!f.entry()) return post;
  std::vector<Frame> stack;
  stack.push_back({f.entry(), f.entry()->successors()});
  seen[f.entry()] = true;
  while (!stack.empty()) {
    Frame &fr = stack.back();
    if (fr.next < fr.succ.size()) {
      BasicBlock *s = fr.succ[fr.next++];
      if (s && !seen[s]) {
        seen[s] = true;
        stack.push_back({s, s->successors()});
      }
    } else {
      post.push_back(fr.bb);
      stack.pop_back();
    }
  }
  std::reverse(post.begin(), post.end());
  return post;
}

DominatorInfo::DominatorInfo(const Function &f) {
  auto rpo = reverse_postorder(f);
  for (std::size_t i = 0; i < rpo.size(); ++i)
    rpo_index_[rpo[i]] = static_cast<int>(i);
  if (rpo.empty()) return;

  // predecessor map over reachable blocks
  std::unordered_map<const BasicBlock *, std::vector<const BasicBlock *>> preds;
  for (const BasicBlock *bb : rpo)
    for (BasicBlock *s : bb->successors())
      if (rpo_index_.count(s)) preds[s].push_back(bb);

  // Cooper-Harvey-Kennedy iterative idom computation. The entry block is its
  // own idom internally; the accessor reports it as having none.
  const BasicBlock *entry = rpo.front();
  idom_[entry] = entry;
  auto intersect = [&](const BasicBlock *a, const BasicBlock *b) {
    while (a != b) {
      while (rpo_index_.at(a) > rpo_index_.at(b)) a = idom_.at(a);
      while (rpo_index_.at(b) > rpo_index_.at(a)) b = idom_.at(b);
    }
    return a;
  };
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 1; i < rpo.size(); ++i) {
      const BasicBlock *bb = rpo[i];
      const BasicBlock *new_idom = nullptr;
      for (const BasicBlock *p : preds[bb]) {
        if (!idom_.count(p)) continue;  // not yet processed
        new_idom = new_idom ? intersect(p, new_idom) : p;
      }
      auto it = idom_.find(bb);
      if (new_idom && (it == idom_.end() || it->second != new_idom)) {
        idom_[bb] = new_idom;
        changed = true;
      }
    }
  }
}

bool DominatorInfo::dominates(const BasicBlock *a, const BasicBlock *b) const {
  if (a == b) return true;
  if (!rpo_index_.count(a) || !rpo_index_.count(b)) return false;
  const BasicBlock *cur = b;
  for (;;) {
    auto it = idom_.find(cur);
    if (it == idom_.end() || it->second == cur) return false;  // hit entry
    cur = it->second;
    if (cur == a) return true;
  }
}

const BasicBlock *DominatorInfo::idom(const BasicBlock *b) const {
  auto it = idom_.find(b);
  if (it == idom_.end() || it->second == b) return nullptr;
  return it->second;
}

bool DominatorInfo::inst_dominates(const Instruction *a,
                                   const Instruction *b) const {
  if (a == b) return true;
  if (a->parent() == b->parent()) return a->ordinal() < b->ordinal();
  return dominates(a->parent(), b->parent());
}

std::vector<UseSite> uses_of(const Value *v, const Function &f) {
  std::vector<UseSite> sites;
  for (const auto &bb : f.blocks())
    for (const auto &in : bb->instructions())
      for (std::size_t i = 0; i < in->num_operands(); ++i)
        if (in->operand(i) == v) sites.push_back({in.get(), i});
  return sites;
}

Definition def_of(const Value *v) {
  switch (v->kind()) {
    case ValueKind::InstrResult: {
      Instruction *def = v->def_instr();
      if (def == nullptr || def->erased()) throw DanglingValue(v->name());
      return {DefKind::Instruction, def};
    }
    case ValueKind::FunctionArg:
      return {DefKind::Argument, nullptr};
    default:
      return {DefKind::Constant, nullptr};
  }
}

Order is_before(const Instruction *a, const Instruction *b,
                const DominatorInfo &dom) {
  if (a->parent_function() != b->parent_function())
    throw DifferentFunctions();
  if (a == b) return Order::ABeforeB;  // identity, by convention
  if (a->parent() == b->parent())
    return a->ordinal() < b->ordinal() ? Order::ABeforeB : Order::BBeforeA;
  if (dom.dominates(a->parent(), b->parent())) return Order::ABeforeB;
  if (dom.dominates(b->parent(), a->parent())) return Order::BBeforeA;
  return Order::Unordered;
}

namespace {

// The program point a use must be dominated at: for phi operands this is the
// terminator of the incoming block, not the phi itself.
const Instruction *effective_use_point(const UseSite &site) {
  const Instruction *user = site.user;
  if (user->opcode() == Opcode::Phi) {
    const BasicBlock *incoming = user->incoming_blocks()[site.operand_index];
    if (incoming->terminator()) return incoming->terminator();
  }
  return user;
}

}  // namespace

std::optional<UseSite> first_dominance_violation(const Value *old_v,
                                                 const Value *new_v,
                                                 const Function &f,
                                                 const DominatorInfo &dom) {
  if (new_v->kind() != ValueKind::InstrResult) return std::nullopt;
  Instruction *def = new_v->def_instr();
  if (def == nullptr || def->erased()) return UseSite{};
  for (const UseSite &site : uses_of(old_v, f)) {
    const Instruction *point = effective_use_point(site);
    if (def == point) return site;  // self-reference cannot dominate
    if (!dom.inst_dominates(def, point)) return site;
  }
  return std::nullopt;
}

std::size_t replace_all_uses(Value *old_v, Value *new_v, Function &f,
                             const DominatorInfo &dom) {
  if (old_v->type() != new_v->type())
    throw TypeMismatch(old_v->type()->str(), new_v->type()->str());
  if (auto bad = first_dominance_violation(old_v, new_v, f, dom))
    throw DominanceViolation(*bad);
  std::size_t count = 0;
  for (const auto &bb : f.blocks())
    for (const auto &in : bb->instructions())
      for (std::size_t i = 0; i < in->num_operands(); ++i)
        if (in->operand(i) == old_v) {
          in->set_operand(i, new_v);
          ++count;
        }
  return count;
}

}  // namespace qiropt
