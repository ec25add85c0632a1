#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>

#include "qiropt/diagnostics.hpp"
#include "qiropt/ir.hpp"

namespace qiropt {

// Built-in stand-in for the generic optimizer stages between the QIR-aware
// passes: always-inline inlining, constant folding with CFG simplification,
// full unrolling of constant-trip-count loops, and DCE of side-effect-free
// instructions. Calls are opaque side-effecting barriers throughout; only
// the QIR-aware DCE may delete them.
struct CleanupConfig {
  std::size_t max_unroll_trip_count = 4096;
  std::size_t max_inline_depth = 16;
  // When set, pipes printed IR through `cmd input -o output` instead of the
  // built-in pipeline.
  std::optional<std::string> external_opt_command;
};

struct CleanupSummary {
  std::size_t inlined_calls = 0;
  std::size_t folds = 0;
  std::size_t loops_unrolled = 0;
  std::size_t dce_removed = 0;
  std::size_t rounds = 0;
  std::size_t total() const {
    return inlined_calls + folds + loops_unrolled + dce_removed;
  }
};

class RecursionDetected : public std::runtime_error {
 public:
  explicit RecursionDetected(const std::string &fn)
      : std::runtime_error("recursive always-inline function @" + fn) {}
};

class ExternalOptFailed : public std::runtime_error {
 public:
  ExternalOptFailed(int exit_code, const std::string &detail)
      : std::runtime_error("external optimizer failed (exit " +
                           std::to_string(exit_code) + "): " + detail),
        exit_code(exit_code) {}
  int exit_code;
};

// Replaces each direct call to a defined, non-recursive always-inline
// function with its body. Returns calls inlined.
std::size_t inline_always(Module &m, const CleanupConfig &cfg = {},
                          DiagList *diags = nullptr);

// Folds constant icmp/add/sub/mul, rewrites branches on constant i1,
// removes unreachable blocks, collapses trivial phis, merges straight-line
// block chains. Returns rewrites performed.
std::size_t fold_constants_and_simplify(Module &m, DiagList *diags = nullptr);

// Fully unrolls single-block counted loops with constant bounds and trip
// count within the limit. Returns loops unrolled.
std::size_t unroll_constant_loops(Module &m, const CleanupConfig &cfg = {},
                                  DiagList *diags = nullptr);

// Removes unused pure instructions (loads, bitcasts, icmp, binops, phis,
// constant geps) transitively. Never touches stores, branches, returns, or
// calls. Returns instructions removed.
std::size_t dce_pure(Module &m, DiagList *diags = nullptr);

// Runs the four stages to a fixpoint (bounded at 8 rounds). When an external
// optimizer is configured the module is printed, piped through it, and the
// re-parsed result replaces *m.
CleanupSummary run_cleanup(std::unique_ptr<Module> &m,
                           const CleanupConfig &cfg = {},
                           DiagList *diags = nullptr);

// Pipes printed IR through `cmd input -o output` and returns the output
// text. Throws ExternalOptFailed.
std::string run_external_opt(const Module &m, const std::string &cmd_template);

}  // namespace qiropt
