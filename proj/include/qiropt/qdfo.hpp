#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "qiropt/cleanup.hpp"
#include "qiropt/dataflow.hpp"
#include "qiropt/diagnostics.hpp"
#include "qiropt/ir.hpp"
#include "qiropt/range_calc.hpp"

namespace qiropt {

// Provenance record for one array_slice_1d call: which allocation it
// ultimately views, and which allocation index each slice position maps to.
struct SliceInfo {
  enum class Tag { Array, Slice };
  Tag tag = Tag::Array;
  Instruction *slice_instr = nullptr;       // the array_slice_1d call
  Instruction *slice_from_instr = nullptr;  // the originating allocation
  std::vector<std::int64_t> q_ref;          // slice position -> alloc index
};

using SliceInfoList = std::vector<SliceInfo>;

// Processes one instruction: appends a SliceInfo when it is a slice over an
// allocation or a known slice; anything else leaves the list unchanged.
// Out-of-range slice positions skip the entry with a diagnostic.
void slice_calculating(Instruction *inst, SliceInfoList &acc,
                       DiagList *diags = nullptr);

// Sweeps a function in dominance-compatible order.
SliceInfoList compute_slices(Function &f, DiagList *diags = nullptr);

// One three-instruction qubit fetch (element-pointer call, bitcast to
// %Qubit**, load) with its provenance resolved to an allocation index.
struct LoadOpDesc {
  Instruction *gep_call = nullptr;
  Instruction *bitcast = nullptr;
  Instruction *load_inst = nullptr;
  Value *source_array = nullptr;      // allocation or slice result
  std::int64_t index = 0;             // constant operand of the gep
  Instruction *allocation = nullptr;  // originating qubit_allocate_array
  std::int64_t resolved_qubit = 0;    // index into the allocation
};

// One control-array construction: the create call plus one
// (element-pointer, bitcast, store) triple per slot.
struct CreateOpGroup {
  Instruction *create_call = nullptr;
  std::int64_t length = 0;
  struct StoreTriple {
    Instruction *gep_call = nullptr;
    Instruction *bitcast = nullptr;
    Instruction *store_inst = nullptr;
  };
  std::vector<StoreTriple> stores;      // by slot index
  std::vector<Value *> stored_qubits;   // by slot index
  std::vector<Instruction *> mgmt_calls;  // alias/reference updates on it
  std::vector<Instruction *> gate_uses;   // gate calls taking the array
};

struct QdfoConfig {
  // Sanity cap on allocation sizes the optimizer will reason about.
  std::int64_t max_qubits = 64;
  std::vector<std::string> dce_keywords = {
      "get_element_ptr", "array_slice", "array_get_size", "callable_create",
      "tuple_create"};
};

// Complete load idioms with constant indices and resolvable provenance.
std::vector<LoadOpDesc> collect_load_ops(Function &f,
                                         const SliceInfoList &slices,
                                         const QdfoConfig &cfg = {},
                                         DiagList *diags = nullptr);

// Complete control-qubit-array constructions (every slot stored through a
// %Qubit** bitcast). Partial groups and non-qubit arrays are excluded.
std::vector<CreateOpGroup> collect_create_ops(Function &f,
                                              const QdfoConfig &cfg = {},
                                              DiagList *diags = nullptr);

// Replaces uses of duplicate loads with the earliest dominating load of the
// same (allocation, index); skips unordered pairs and merges across
// array-mutation barriers. Returns the number of loads merged.
std::size_t qdfo_load(Function &f, const std::vector<LoadOpDesc> &loads,
                      const SliceInfoList &slices, DiagList *diags = nullptr);

// Keyword-driven elimination of QIR-specific calls whose results are unused
// or feed only bitcasts and bookkeeping calls; iterates to a fixpoint.
// Returns instructions removed.
std::size_t qir_dce(Function &f, const QdfoConfig &cfg = {},
                    DiagList *diags = nullptr);

// Merges equal-length groups storing the same qubit set into the earliest
// dominating group, erases the duplicates, then prunes bookkeeping between
// each surviving group's first and last gate use (the pruning keeps the
// merged arrays alive until their last gate). Returns groups merged;
// `mmo_removed` reports the pruned bookkeeping calls.
std::size_t qdfo_create(Function &f, std::vector<CreateOpGroup> groups,
                        DiagList *diags = nullptr,
                        std::size_t *mmo_removed = nullptr);

// The bookkeeping pruning alone: removes alias/reference updates strictly
// between the group's first and last gate-call use. Returns calls removed.
std::size_t mmo(Function &f, CreateOpGroup &group, DiagList *diags = nullptr);

struct IdiomCounts {
  std::size_t load_ops = 0;
  std::size_t create_ops = 0;
  std::size_t instructions = 0;
};

IdiomCounts count_idioms(Module &m, const QdfoConfig &cfg = {});

struct PassCounters {
  std::size_t qir_inline = 0;
  std::size_t loop_unroll_prep = 0;
  std::size_t ctl_inline = 0;
  std::size_t load_merges = 0;
  std::size_t dce_removed = 0;
  std::size_t create_merges = 0;
  std::size_t mmo_removed = 0;
  CleanupSummary cleanup;
  std::size_t total() const {
    return qir_inline + loop_unroll_prep + ctl_inline + load_merges +
           dce_removed + create_merges + mmo_removed + cleanup.total();
  }
};

struct OptimizationReport {
  PassCounters counters;
  IdiomCounts before;
  IdiomCounts after;
  std::size_t iterations = 0;
  bool fixpoint_reached = true;
  DiagList diagnostics;
};

struct WorkflowConfig {
  QdfoConfig qdfo;
  CleanupConfig cleanup;
  std::vector<std::string> ctl_inline_patterns;  // empty = defaults
  std::size_t max_iterations = 4;
  bool run_cleanup_stages = true;
};

// The full pipeline: preprocessing, cleanup, load dedup, QIR-aware DCE,
// control-gate inlining, create dedup with bookkeeping pruning; repeated
// until the instruction count stops changing (bounded).
OptimizationReport run_workflow(std::unique_ptr<Module> &m,
                                const WorkflowConfig &cfg = {});

}  // namespace qiropt
