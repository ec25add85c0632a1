#include "qiropt/report.hpp"

#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace qiropt {

namespace {
using ordered_json = nlohmann::ordered_json;

double ratio(std::size_t before, std::size_t after) {
  if (before == 0) return 0.0;
  return 1.0 - static_cast<double>(after) / static_cast<double>(before);
}

std::string pct(double r) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(1) << r * 100.0 << "%";
  return os.str();
}
}  // namespace

std::string report_to_text(const OptimizationReport &r) {
  std::ostringstream os;
  os << "pass                 rewrites\n";
  os << "  qir-inline         " << r.counters.qir_inline << "\n";
  os << "  qir-loop-unroll    " << r.counters.loop_unroll_prep << "\n";
  os << "  ctl-inline         " << r.counters.ctl_inline << "\n";
  os << "  qdfo-load          " << r.counters.load_merges << "\n";
  os << "  qir-dce            " << r.counters.dce_removed << "\n";
  os << "  qdfo-create        " << r.counters.create_merges << "\n";
  os << "  mmo                " << r.counters.mmo_removed << "\n";
  os << "  cleanup inlines    " << r.counters.cleanup.inlined_calls << "\n";
  os << "  cleanup folds      " << r.counters.cleanup.folds << "\n";
  os << "  cleanup unrolls    " << r.counters.cleanup.loops_unrolled << "\n";
  os << "  cleanup dce        " << r.counters.cleanup.dce_removed << "\n";
  os << "instructions  " << r.before.instructions << " -> "
     << r.after.instructions << "  ("
     << pct(ratio(r.before.instructions, r.after.instructions))
     << " reduction)\n";
  os << "load ops      " << r.before.load_ops << " -> " << r.after.load_ops
     << "\n";
  os << "create ops    " << r.before.create_ops << " -> "
     << r.after.create_ops << "\n";
  os << "iterations    " << r.iterations
     << (r.fixpoint_reached ? "" : "  (fixpoint NOT reached)") << "\n";
  return os.str();
}

std::string report_to_json(const OptimizationReport &r) {
  ordered_json j;
  j["schema"] = "qir-opt/report/v1";
  j["instructions"] = {{"before", r.before.instructions},
                       {"after", r.after.instructions}};
  j["loadOps"] = {{"before", r.before.load_ops}, {"after", r.after.load_ops}};
  j["createOps"] = {{"before", r.before.create_ops},
                    {"after", r.after.create_ops}};
  j["reductionRatio"] = ratio(r.before.instructions, r.after.instructions);
  j["iterations"] = r.iterations;
  j["fixpointReached"] = r.fixpoint_reached;
  j["passes"] = {{"qirInline", r.counters.qir_inline},
                 {"qirLoopUnroll", r.counters.loop_unroll_prep},
                 {"ctlInline", r.counters.ctl_inline},
                 {"qdfoLoad", r.counters.load_merges},
                 {"qirDce", r.counters.dce_removed},
                 {"qdfoCreate", r.counters.create_merges},
                 {"mmo", r.counters.mmo_removed}};
  j["cleanup"] = {{"inlinedCalls", r.counters.cleanup.inlined_calls},
                  {"folds", r.counters.cleanup.folds},
                  {"loopsUnrolled", r.counters.cleanup.loops_unrolled},
                  {"dceRemoved", r.counters.cleanup.dce_removed}};
  j["diagnostics"] = ordered_json::array();
  for (const Diagnostic &d : r.diagnostics)
    j["diagnostics"].push_back(
        {{"code", d.code}, {"message", d.message}, {"where", d.where}});
  return j.dump(2) + "\n";
}

std::string stats_to_text(const IdiomCounts &c, std::size_t functions) {
  std::ostringstream os;
  os << "load ops      " << c.load_ops << "\n";
  os << "create ops    " << c.create_ops << "\n";
  os << "instructions  " << c.instructions << "\n";
  os << "functions     " << functions << "\n";
  return os.str();
}

std::string stats_to_json(const IdiomCounts &c, std::size_t functions) {
  ordered_json j;
  j["schema"] = "qir-opt/stats/v1";
  j["loadOps"] = c.load_ops;
  j["createOps"] = c.create_ops;
  j["instructions"] = c.instructions;
  j["functions"] = functions;
  return j.dump(2) + "\n";
}

std::string sweep_to_text(const std::vector<SweepRow> &rows) {
  std::ostringstream os;
  os << "gates  instrBefore  instrAfter  reduction  verified\n";
  for (const SweepRow &r : rows)
    os << std::left << std::setw(7) << r.gates << std::setw(13)
       << r.instructions_before << std::setw(12) << r.instructions_after
       << std::setw(11) << pct(r.reduction_ratio)
       << (r.verified ? "yes" : "NO") << "\n";
  return os.str();
}

std::string sweep_to_json(const std::vector<SweepRow> &rows) {
  ordered_json j;
  j["schema"] = "qir-opt/sweep/v1";
  j["rows"] = ordered_json::array();
  for (const SweepRow &r : rows)
    j["rows"].push_back({{"gates", r.gates},
                         {"instructionsBefore", r.instructions_before},
                         {"instructionsAfter", r.instructions_after},
                         {"reductionRatio", r.reduction_ratio},
                         {"verified", r.verified}});
  return j.dump(2) + "\n";
}

}  // namespace qiropt
