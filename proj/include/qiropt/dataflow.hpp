#pragma once

#include <cstddef>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "qiropt/ir.hpp"

namespace qiropt {

struct UseSite {
  Instruction *user = nullptr;
  std::size_t operand_index = 0;
};

// Blocks reachable from entry, dominators before dominated.
std::vector<const BasicBlock *> reverse_postorder(const Function &f);

// Immediate-dominator map for one function. Computed once per pass
// invocation; functions are small after unrolling, so recomputation beats
// incremental maintenance.
class DominatorInfo {
 public:
  explicit DominatorInfo(const Function &f);

  // Reflexive dominance: a block dominates itself.
  bool dominates(const BasicBlock *a, const BasicBlock *b) const;
  const BasicBlock *idom(const BasicBlock *b) const;
  // true if `a` executes before `b` on every path (strict for distinct
  // instructions in the same block by ordinal).
  bool inst_dominates(const Instruction *a, const Instruction *b) const;

 private:
  std::unordered_map<const BasicBlock *, const BasicBlock *> idom_;
  std::unordered_map<const BasicBlock *, int> rpo_index_;
};

// All operand positions referencing v inside f, in (block, ordinal) order.
// Complete and duplicate-free; empty for unused values.
std::vector<UseSite> uses_of(const Value *v, const Function &f);

enum class DefKind { Instruction, Argument, Constant };

struct Definition {
  DefKind kind = DefKind::Constant;
  Instruction *instr = nullptr;  // when kind == Instruction
};

class DanglingValue : public std::runtime_error {
 public:
  explicit DanglingValue(const std::string &name)
      : std::runtime_error("dangling value %" + name) {}
};

// Unique SSA definition of v. Throws DanglingValue if v's defining
// instruction was erased without replacing its uses.
Definition def_of(const Value *v);

enum class Order { ABeforeB, BBeforeA, Unordered };

class DifferentFunctions : public std::runtime_error {
 public:
  DifferentFunctions()
      : std::runtime_error("instructions belong to different functions") {}
};

// Execution order of two instructions in the same function, derived from
// block dominance plus ordinals. Identity compares as ABeforeB by
// convention. Unordered when neither block dominates the other.
Order is_before(const Instruction *a, const Instruction *b,
                const DominatorInfo &dom);

class TypeMismatch : public std::runtime_error {
 public:
  TypeMismatch(const std::string &a, const std::string &b)
      : std::runtime_error("type mismatch: " + a + " vs " + b) {}
};

class DominanceViolation : public std::runtime_error {
 public:
  explicit DominanceViolation(UseSite site)
      : std::runtime_error("replacement does not dominate a use"), site(site) {}
  UseSite site;
};

// First use of `old_v` in f that `new_v`'s definition does not dominate, if
// any. Constants and arguments dominate everything.
std::optional<UseSite> first_dominance_violation(const Value *old_v,
                                                 const Value *new_v,
                                                 const Function &f,
                                                 const DominatorInfo &dom);

// Rewrites every use of old_v to new_v and returns the number of rewritten
// sites. Throws TypeMismatch or DominanceViolation (before any rewrite; a
// failed call leaves the function untouched).
std::size_t replace_all_uses(Value *old_v, Value *new_v, Function &f,
                             const DominatorInfo &dom);

}  // namespace qiropt
