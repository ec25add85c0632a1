#pragma once

#include <stdexcept>
#include <vector>

#include "qiropt/ir.hpp"

namespace qiropt {

class ZeroStep : public std::runtime_error {
 public:
  ZeroStep() : std::runtime_error("range step must be nonzero") {}
};

// The inclusive arithmetic sequence start, start+step, ... while on the
// `end` side of the step direction; empty when start is already past end.
// {3,-1,0} -> 3,2,1,0 and {3,-2,0} -> 3,1.
std::vector<std::int64_t> range_to_indices(const RangeTriple &r);

}  // namespace qiropt
