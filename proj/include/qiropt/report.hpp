#pragma once

#include <string>

#include "qiropt/qdfo.hpp"

namespace qiropt {

// Human-readable report table.
std::string report_to_text(const OptimizationReport &r);
// Machine-readable report (stable key order, byte-stable for equal inputs).
std::string report_to_json(const OptimizationReport &r);

std::string stats_to_text(const IdiomCounts &c, std::size_t functions);
std::string stats_to_json(const IdiomCounts &c, std::size_t functions);

struct SweepRow {
  std::size_t gates = 0;
  std::size_t instructions_before = 0;
  std::size_t instructions_after = 0;
  double reduction_ratio = 0.0;
  bool verified = false;
};

std::string sweep_to_text(const std::vector<SweepRow> &rows);
std::string sweep_to_json(const std::vector<SweepRow> &rows);

}  // namespace qiropt
