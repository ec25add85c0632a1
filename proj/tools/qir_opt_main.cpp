// qir-opt: optimizer, equivalence checker, and corpus generator for the
// textual QIR dialect. Subcommands: opt, verify, stats, gen, sweep.
//
// Exit codes: 0 success, 1 parse failure, 2 validation diagnostics,
// 3 pass/internal error, 4 trace mismatch or interpreter diagnostics.

#include <cstdlib>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "qiropt/cleanup.hpp"
#include "qiropt/corpus.hpp"
#include "qiropt/interp.hpp"
#include "qiropt/parser.hpp"
#include "qiropt/preprocess.hpp"
#include "qiropt/printer.hpp"
#include "qiropt/qdfo.hpp"
#include "qiropt/report.hpp"
#include "qiropt/validate.hpp"

using namespace qiropt;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitParse = 1;
constexpr int kExitValidate = 2;
constexpr int kExitPass = 3;
constexpr int kExitTrace = 4;

std::string read_file(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string &path, const std::string &text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

std::unique_ptr<Module> parse_or_exit(const std::string &path, int *rc) {
  std::unique_ptr<Module> m;
  try {
    m = parse_module(read_file(path));
  } catch (const ParseError &e) {
    std::cerr << path << ":" << e.line << ":" << e.col << ": " << e.message
              << "\n";
    *rc = kExitParse;
    return nullptr;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    *rc = kExitParse;
    return nullptr;
  }
  DiagList diags = validate(*m);
  if (!diags.empty()) {
    for (const Diagnostic &d : diags)
      std::cerr << path << ": " << d.code << ": " << d.message << " [" << d.where
                << "]\n";
    *rc = kExitValidate;
    return nullptr;
  }
  return m;
}

std::vector<std::string> split_list(const std::string &csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

struct OptOptions {
  std::string input;
  std::string output;
  std::string report_path;
  std::string format = "text";
  std::string passes;  // empty = full workflow
  std::string dce_keywords;
  std::string ctl_patterns;
  std::string entry = "main";
  bool stats = false;
  bool do_verify = false;
  bool no_cleanup = false;
  std::size_t max_unroll = 4096;
  std::int64_t max_qubits = 64;
};

WorkflowConfig make_workflow_config(const OptOptions &opt) {
  WorkflowConfig cfg;
  cfg.cleanup.max_unroll_trip_count = opt.max_unroll;
  cfg.qdfo.max_qubits = opt.max_qubits;
  if (!opt.dce_keywords.empty())
    cfg.qdfo.dce_keywords = split_list(opt.dce_keywords);
  if (!opt.ctl_patterns.empty())
    cfg.ctl_inline_patterns = split_list(opt.ctl_patterns);
  cfg.run_cleanup_stages = !opt.no_cleanup;
  if (const char *ext = std::getenv("QDFO_EXTERNAL_OPT"); ext && *ext)
    cfg.cleanup.external_opt_command = std::string(ext);
  return cfg;
}

// Runs only the selected stages (with the mandated cleanup interleaved
// unless disabled), mirroring the full workflow's order.
OptimizationReport run_selected(std::unique_ptr<Module> &m,
                                const WorkflowConfig &cfg,
                                const std::vector<std::string> &passes) {
  auto wants = [&](const char *name) {
    for (const std::string &p : passes)
      if (p == name) return true;
    return false;
  };
  OptimizationReport report;
  report.before = count_idioms(*m, cfg.qdfo);
  DiagList *diags = &report.diagnostics;
  report.iterations = 1;

  auto cleanup = [&] {
    if (!cfg.run_cleanup_stages) return;
    CleanupSummary s = run_cleanup(m, cfg.cleanup, diags);
    report.counters.cleanup.inlined_calls += s.inlined_calls;
    report.counters.cleanup.folds += s.folds;
    report.counters.cleanup.loops_unrolled += s.loops_unrolled;
    report.counters.cleanup.dce_removed += s.dce_removed;
  };

  if (wants("qir-inline"))
    report.counters.qir_inline += qir_inline(*m, diags);
  if (wants("qir-loop-unroll"))
    report.counters.loop_unroll_prep += qir_loop_unroll_prep(*m, diags);
  cleanup();
  if (wants("qdfo-load")) {
    for (const auto &f : m->functions()) {
      if (f->is_declaration()) continue;
      SliceInfoList slices = compute_slices(*f, diags);
      auto loads = collect_load_ops(*f, slices, cfg.qdfo, diags);
      report.counters.load_merges += qdfo_load(*f, loads, slices, diags);
    }
    cleanup();
  }
  if (wants("qir-dce")) {
    for (const auto &f : m->functions()) {
      if (f->is_declaration()) continue;
      report.counters.dce_removed += qir_dce(*f, cfg.qdfo, diags);
    }
  }
  if (wants("ctl-inline")) {
    report.counters.ctl_inline +=
        qir_ctl_inline(*m, cfg.ctl_inline_patterns, diags);
    cleanup();
  }
  if (wants("qdfo-create")) {
    for (const auto &f : m->functions()) {
      if (f->is_declaration()) continue;
      auto groups = collect_create_ops(*f, cfg.qdfo, diags);
      report.counters.create_merges += qdfo_create(
          *f, std::move(groups), diags, &report.counters.mmo_removed);
    }
    cleanup();
  }
  report.after = count_idioms(*m, cfg.qdfo);
  report.fixpoint_reached = true;
  return report;
}

int cmd_opt(const OptOptions &opt) {
  int rc = kExitOk;
  auto m = parse_or_exit(opt.input, &rc);
  if (!m) return rc;

  GateTrace before;
  if (opt.do_verify) before = interpret(*m, opt.entry);

  WorkflowConfig cfg = make_workflow_config(opt);
  if (opt.no_cleanup)
    std::cerr << "warning: --no-cleanup skips the canonicalization the "
                 "dataflow passes rely on; expect weaker results\n";
  OptimizationReport report;
  try {
    if (opt.passes.empty()) {
      report = run_workflow(m, cfg);
    } else {
      report = run_selected(m, cfg, split_list(opt.passes));
    }
  } catch (const std::exception &e) {
    std::cerr << "pass error: " << e.what() << "\n";
    return kExitPass;
  }

  DiagList post = validate(*m);
  if (!post.empty()) {
    for (const Diagnostic &d : post)
      std::cerr << "internal: " << d.code << ": " << d.message << "\n";
    return kExitPass;
  }
  write_file(opt.output, print_module(*m));

  std::string rendered = opt.format == "json" ? report_to_json(report)
                                              : report_to_text(report);
  if (!opt.report_path.empty())
    write_file(opt.report_path, rendered);
  if (opt.stats || opt.report_path.empty()) std::cout << rendered;

  if (opt.do_verify) {
    GateTrace after = interpret(*m, opt.entry);
    if (!trace_equal(before, after)) {
      auto idx = first_divergence(before, after);
      std::cerr << "verification FAILED";
      if (idx) std::cerr << " at event " << *idx;
      std::cerr << "\n";
      return kExitTrace;
    }
    std::cout << "verified: traces equal\n";
  }
  return kExitOk;
}

int cmd_verify(const std::string &before_path, const std::string &after_path,
               const std::string &entry, std::uint64_t max_steps,
               const std::string &outcomes_csv) {
  int rc = kExitOk;
  auto before_m = parse_or_exit(before_path, &rc);
  if (!before_m) return rc;
  auto after_m = parse_or_exit(after_path, &rc);
  if (!after_m) return rc;

  InterpPolicy policy;
  policy.max_steps = max_steps;
  if (!outcomes_csv.empty()) {
    policy.measurement_outcomes.clear();
    for (const std::string &o : split_list(outcomes_csv))
      policy.measurement_outcomes.push_back(std::stoi(o));
  }

  GateTrace a, b;
  try {
    a = interpret(*before_m, entry, policy);
    b = interpret(*after_m, entry, policy);
  } catch (const InterpError &e) {
    std::cerr << "interpreter error: " << e.what() << "\n";
    return kExitTrace;
  }
  for (const auto *t : {&a, &b})
    for (const Diagnostic &d : t->diagnostics)
      std::cerr << (t == &a ? before_path : after_path) << ": " << d.code
                << ": " << d.message << "\n";
  bool clean =
      a.diagnostics.empty() && b.diagnostics.empty();
  if (!clean) return kExitTrace;

  if (!trace_equal(a, b)) {
    auto idx = first_divergence(a, b);
    std::cerr << "traces differ";
    if (idx) {
      std::cerr << " at event " << *idx << ":\n";
      auto show = [&](const GateTrace &t, const char *which) {
        if (*idx < t.events.size()) {
          GateTrace one;
          one.events.push_back(t.events[*idx]);
          std::cerr << "  " << which << ": " << trace_to_string(one);
        } else {
          std::cerr << "  " << which << ": <no event>\n";
        }
      };
      show(a, "before");
      show(b, "after ");
    } else {
      std::cerr << "\n";
    }
    return kExitTrace;
  }
  std::cout << "traces equal (" << a.events.size() << " events)\n";
  return kExitOk;
}

int cmd_stats(const std::string &input, const std::string &format) {
  int rc = kExitOk;
  auto m = parse_or_exit(input, &rc);
  if (!m) return rc;
  IdiomCounts counts = count_idioms(*m);
  std::size_t functions = 0;
  for (const auto &f : m->functions())
    if (!f->is_declaration()) ++functions;
  std::cout << (format == "json" ? stats_to_json(counts, functions)
                                 : stats_to_text(counts, functions));
  return kExitOk;
}

struct GenOptions {
  std::string source;
  std::string output;
  std::uint64_t seed = 1;
  int redundant_loads = -1;   // -1 = builtin/default choice
  int redundant_creates = -1;
  int wrap_controlled = -1;
  int callable_demo = -1;
  std::string loop_form;
  bool list = false;
};

int cmd_gen(const GenOptions &gen) {
  if (gen.list) {
    for (const NamedCircuit &c : builtin_corpus(gen.seed))
      std::cout << c.spec.name << "  (" << expanded_gate_count(c.spec)
                << " gates, " << c.spec.n_qubits << " qubits)\n";
    return kExitOk;
  }
  CircuitSpec spec;
  EmitterStyle style;
  auto corpus = builtin_corpus(gen.seed);
  if (const NamedCircuit *c = find_builtin(corpus, gen.source)) {
    spec = c->spec;
    style = c->style;
  } else if (gen.source.find('.') != std::string::npos) {
    try {
      spec = load_circuit_file(gen.source);
    } catch (const SchemaError &e) {
      std::cerr << e.what() << "\n";
      return kExitParse;
    }
  } else {
    std::cerr << "unknown corpus name '" << gen.source
              << "' (use --list to see builtins)\n";
    return kExitParse;
  }
  if (gen.redundant_loads >= 0) style.redundant_loads = gen.redundant_loads;
  if (gen.redundant_creates >= 0)
    style.redundant_creates = gen.redundant_creates;
  if (gen.wrap_controlled >= 0)
    style.wrap_controlled_gates = gen.wrap_controlled;
  if (gen.callable_demo >= 0) style.callable_demo = gen.callable_demo;
  if (gen.loop_form == "unrolled")
    style.loop_form = EmitterStyle::LoopForm::UnrolledSource;
  else if (gen.loop_form == "runtime-size")
    style.loop_form = EmitterStyle::LoopForm::RuntimeSizeLoop;

  try {
    auto m = emit_qir(spec, style);
    write_file(gen.output, print_module(*m));
  } catch (const InvalidSpec &e) {
    std::cerr << e.what() << "\n";
    return kExitParse;
  }
  return kExitOk;
}

int cmd_sweep(const std::vector<std::size_t> &sizes, std::uint64_t seed,
              int n_qubits, unsigned jobs, const std::string &format) {
  auto run_one = [&](std::size_t gates) -> SweepRow {
    CircuitSpec spec = random_circuit("sweep_" + std::to_string(gates),
                                      n_qubits, gates,
                                      seed * 0x9e3779b9ULL + gates);
    EmitterStyle style;
    style.wrap_controlled_gates = false;
    auto m = emit_qir(spec, style);
    SweepRow row;
    row.gates = gates;
    row.instructions_before = m->instruction_count();
    GateTrace before = interpret(*m);
    OptimizationReport report = run_workflow(m);
    row.instructions_after = m->instruction_count();
    row.reduction_ratio =
        row.instructions_before == 0
            ? 0.0
            : 1.0 - static_cast<double>(row.instructions_after) /
                        static_cast<double>(row.instructions_before);
    GateTrace after = interpret(*m);
    row.verified = trace_equal(before, after);
    return row;
  };

  std::vector<SweepRow> rows(sizes.size());
  if (jobs <= 1) {
    for (std::size_t i = 0; i < sizes.size(); ++i) rows[i] = run_one(sizes[i]);
  } else {
    std::vector<std::future<SweepRow>> futs;
    for (std::size_t gates : sizes)
      futs.push_back(
          std::async(std::launch::async, run_one, gates));
    for (std::size_t i = 0; i < futs.size(); ++i) rows[i] = futs[i].get();
  }

  std::cout << (format == "json" ? sweep_to_json(rows) : sweep_to_text(rows));
  for (const SweepRow &r : rows)
    if (!r.verified) {
      std::cerr << "sweep: trace mismatch at " << r.gates << " gates\n";
      return kExitTrace;
    }
  return kExitOk;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"optimizer for the textual QIR dialect"};
  app.require_subcommand(1);

  // --- opt ---
  OptOptions opt;
  CLI::App *opt_cmd = app.add_subcommand("opt", "optimize a module");
  opt_cmd->add_option("input", opt.input, "input .ll file")->required();
  opt_cmd->add_option("-o,--output", opt.output, "output .ll file")
      ->required();
  opt_cmd->add_flag("--stats", opt.stats, "print the report to stdout");
  opt_cmd->add_option("--format", opt.format, "report format: text|json")
      ->check(CLI::IsMember({"text", "json"}));
  opt_cmd->add_option("--report", opt.report_path, "write the report here");
  opt_cmd->add_flag("--verify", opt.do_verify,
                    "check trace equivalence after optimizing");
  opt_cmd->add_option("--passes", opt.passes,
                      "comma list: qir-inline,qir-loop-unroll,qdfo-load,"
                      "qir-dce,ctl-inline,qdfo-create");
  opt_cmd->add_flag("--no-cleanup", opt.no_cleanup,
                    "skip the interleaved cleanup stages (debugging only)");
  opt_cmd->add_option("--max-unroll", opt.max_unroll,
                      "loop unrolling trip-count cap");
  opt_cmd->add_option("--max-qubits", opt.max_qubits,
                      "allocation size cap for the dataflow passes");
  opt_cmd->add_option("--dce-keywords", opt.dce_keywords,
                      "comma list of callee keywords for the QIR-aware DCE");
  opt_cmd->add_option("--ctl-inline-patterns", opt.ctl_patterns,
                      "comma list of controlled-gate name patterns");
  opt_cmd->add_option("--entry", opt.entry, "entry function for --verify");

  // --- verify ---
  std::string v_before, v_after, v_entry = "main", v_outcomes;
  std::uint64_t v_steps = 10'000'000;
  CLI::App *verify_cmd =
      app.add_subcommand("verify", "compare the gate traces of two modules");
  verify_cmd->add_option("before", v_before)->required();
  verify_cmd->add_option("after", v_after)->required();
  verify_cmd->add_option("--entry", v_entry, "entry function");
  verify_cmd->add_option("--max-steps", v_steps, "interpreter step budget");
  verify_cmd->add_option("--measurement-outcomes", v_outcomes,
                         "comma list of fixed outcomes (cyclic)");

  // --- stats ---
  std::string s_input, s_format = "text";
  CLI::App *stats_cmd =
      app.add_subcommand("stats", "count load/create idioms and instructions");
  stats_cmd->add_option("input", s_input)->required();
  stats_cmd->add_option("--format", s_format)
      ->check(CLI::IsMember({"text", "json"}));

  // --- gen ---
  GenOptions gen;
  CLI::App *gen_cmd = app.add_subcommand(
      "gen", "emit compiler-style redundant QIR from a circuit");
  gen_cmd->add_option("source", gen.source,
                      "builtin name or circuit .json file");
  gen_cmd->add_option("-o,--output", gen.output, "output .ll file");
  gen_cmd->add_option("--seed", gen.seed, "seed for the random families");
  gen_cmd->add_option("--redundant-loads", gen.redundant_loads,
                      "0|1 override");
  gen_cmd->add_option("--redundant-creates", gen.redundant_creates,
                      "0|1 override");
  gen_cmd->add_option("--wrap-controlled", gen.wrap_controlled,
                      "0|1 override");
  gen_cmd->add_option("--callable-demo", gen.callable_demo, "0|1 override");
  gen_cmd->add_option("--loop-form", gen.loop_form,
                      "unrolled|runtime-size override")
      ->check(CLI::IsMember({"", "unrolled", "runtime-size"}));
  gen_cmd->add_flag("--list", gen.list, "list builtin circuits");

  // --- sweep ---
  std::vector<std::size_t> sw_sizes;
  std::uint64_t sw_seed = 1;
  int sw_qubits = 8;
  unsigned sw_jobs = 4;
  std::string sw_format = "text";
  CLI::App *sweep_cmd = app.add_subcommand(
      "sweep", "generate, optimize, and verify a family of sizes");
  sweep_cmd->add_option("sizes", sw_sizes, "gate counts")->required();
  sweep_cmd->add_option("--seed", sw_seed);
  sweep_cmd->add_option("--qubits", sw_qubits, "register width");
  sweep_cmd->add_option("--jobs", sw_jobs, "parallel workers");
  sweep_cmd->add_option("--format", sw_format)
      ->check(CLI::IsMember({"text", "json"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (opt_cmd->parsed()) return cmd_opt(opt);
    if (verify_cmd->parsed())
      return cmd_verify(v_before, v_after, v_entry, v_steps, v_outcomes);
    if (stats_cmd->parsed()) return cmd_stats(s_input, s_format);
    if (gen_cmd->parsed()) {
      if (!gen.list && (gen.source.empty() || gen.output.empty())) {
        std::cerr << "gen: source and -o output are required\n";
        return kExitParse;
      }
      return cmd_gen(gen);
    }
    if (sweep_cmd->parsed())
      return cmd_sweep(sw_sizes, sw_seed, sw_qubits, sw_jobs, sw_format);
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitPass;
  }
  return kExitOk;
}
