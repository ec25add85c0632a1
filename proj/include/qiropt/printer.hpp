#pragma once

#include <string>

#include "qiropt/ir.hpp"

namespace qiropt {

// Deterministic canonical text for a module: opaque type declarations for the
// types in use, then globals in declaration order, then functions in
// declaration order (instructions by block and ordinal). The output re-parses
// to a structurally equal module.
std::string print_module(const Module &m);

// One instruction, printed the way print_module would (no trailing newline).
std::string print_instruction(const Instruction &in);

}  // namespace qiropt
