#pragma once

#include "qiropt/diagnostics.hpp"
#include "qiropt/ir.hpp"

namespace qiropt {

// Structural validation. Returns an empty list iff the module satisfies the
// IR invariants: SSA single definitions, unique names, pointer depth <= 2,
// integer widths, terminator placement, operand dominance, 4-slot function
// tables, no unreachable blocks.
DiagList validate(const Module &m);

}  // namespace qiropt
