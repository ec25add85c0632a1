#pragma once

#include <memory>
#include <string_view>

#include "qiropt/diagnostics.hpp"
#include "qiropt/ir.hpp"

namespace qiropt {

// Parses the textual dialect (grammar in docs/ir-subset.md). Throws
// ParseError on malformed syntax and UnsupportedConstruct on IR features
// outside the subset. Unreferenced symbols called but never declared are
// recorded as auto-declarations.
std::unique_ptr<Module> parse_module(std::string_view text);

}  // namespace qiropt
