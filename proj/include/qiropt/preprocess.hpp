#pragma once

#include <string>
#include <vector>

#include "qiropt/diagnostics.hpp"
#include "qiropt/ir.hpp"

namespace qiropt {

// Rewrites each callable_invoke whose callable traces to a local
// callable_create over a constant function table (no capture tuple, no
// adjoint/controlled conversion) into a direct call to the body wrapper:
// (null capture, forwarded arg tuple, forwarded result tuple). The create
// and its bookkeeping become dead and are left for the QIR-aware DCE.
// Returns invokes rewritten; skipped sites get a diagnostic naming the
// blocker.
std::size_t qir_inline(Module &m, DiagList *diags = nullptr);

// Replaces uses of array_get_size_1d results with the allocation's constant
// length when the queried array comes from qubit_allocate_array(K) or
// array_create_1d(K). The size call itself is left for DCE. Returns call
// sites whose uses were substituted.
std::size_t qir_loop_unroll_prep(Module &m, DiagList *diags = nullptr);

// Marks controlled-gate and SWAP functions always-inline: name suffix
// "__ctl"/"__ctladj", name containing "SWAP" (case-insensitive), or an
// Intrinsic__*__body wrapper around a single controlled-gate call. Returns
// functions newly tagged.
std::size_t qir_ctl_inline(Module &m,
                           const std::vector<std::string> &extra_patterns = {},
                           DiagList *diags = nullptr);

}  // namespace qiropt
