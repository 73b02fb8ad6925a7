#pragma once

// Strategy dispatch, parameter sweeps with CSV output, and the small-instance
// oracle battery (exhaustive enumeration against the solver and baselines).

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "fpc/scenario.hpp"
#include "fpc/solver.hpp"
#include "fpc/taskmap.hpp"

namespace fpc {

enum class Strategy { fpc, wrr, greedy_lb, pick_kx, cloud, local };

inline const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::fpc: return "fpc";
    case Strategy::wrr: return "wrr";
    case Strategy::greedy_lb: return "greedy_lb";
    case Strategy::pick_kx: return "pick_kx";
    case Strategy::cloud: return "cloud";
    case Strategy::local: return "local";
  }
  return "?";
}

inline Strategy parse_strategy(const std::string& name) {
  for (Strategy s : {Strategy::fpc, Strategy::wrr, Strategy::greedy_lb, Strategy::pick_kx, Strategy::cloud, Strategy::local}) {
    if (name == to_string(s)) return s;
  }
  throw ConfigError("unknown strategy '" + name + "'");
}

struct StrategyOutcome {
  Strategy strategy = Strategy::fpc;
  bool feasible = false;
  double latency = kInf;
  std::optional<MappingDecision> decision;
  std::vector<double> trace;  // fpc only
  std::uint64_t positions_audited = 0;
  std::uint64_t audit_failures = 0;
};

inline StrategyOutcome run_strategy(Strategy strategy, const Scenario& s, const ScenarioGraph& g, const TaskDag& dag,
                                    const SolverConfig& solver) {
  StrategyOutcome out;
  out.strategy = strategy;
  switch (strategy) {
    case Strategy::fpc: {
      SolverResult r = csabpso(dag, g.efsm, solver, s.eval);
      out.feasible = r.feasible;
      out.latency = r.latency;
      out.decision = std::move(r.best);
      out.trace = std::move(r.trace);
      out.positions_audited = r.positions_audited;
      out.audit_failures = r.audit_failures;
      return out;
    }
    case Strategy::cloud:
    case Strategy::local: {
      const BaselineResult b = strategy == Strategy::cloud ? baseline_cloud(dag, s.cloud, s.channel)
                                                           : baseline_local(dag, s.local_capacity);
      out.feasible = b.feasible;
      out.latency = b.latency;
      return out;
    }
    default: break;
  }
  const Baselines baselines(dag, g.efsm, s.eval);
  BaselineResult b = strategy == Strategy::wrr         ? baselines.wrr()
                     : strategy == Strategy::greedy_lb ? baselines.greedy_lb()
                                                       : baselines.pick_kx(s.pick_kx_k, derive_seed(s.seed, 15));
  out.feasible = b.feasible;
  out.latency = b.latency;
  out.decision = std::move(b.decision);
  return out;
}

enum class SweepVariable { input_size_bits, complexity_cycles_per_bit };

inline SweepVariable parse_sweep_variable(const std::string& name) {
  if (name == "input_size_bits") return SweepVariable::input_size_bits;
  if (name == "complexity_cycles_per_bit") return SweepVariable::complexity_cycles_per_bit;
  throw ConfigError("sweep variable must be 'input_size_bits' or 'complexity_cycles_per_bit'");
}

struct SweepSpec {
  SweepVariable variable = SweepVariable::complexity_cycles_per_bit;
  std::vector<double> values;
  std::vector<Strategy> strategies;
  std::vector<std::uint64_t> seeds;  // one scenario expansion per seed
  std::optional<int> swarm_size;
  std::optional<int> max_iterations;
};

struct SweepRow {
  double swept_value = 0.0;
  Strategy strategy = Strategy::fpc;
  std::uint64_t seed = 0;
  double latency = kInf;
  bool feasible = false;
  double wall_ms = 0.0;
  std::vector<double> trace;
};

using SweepObserver = std::function<void(const SweepRow&)>;

/// Every (seed, value, strategy) combination. The topology depends on the seed
/// only, so all points of one seed share a fleet; the solver stream is also
/// per seed, which keeps adjacent points comparable.
inline std::vector<SweepRow> run_sweep(const Json& scenario_root, const SweepSpec& spec, const SweepObserver& observe = {}) {
  if (spec.values.empty()) throw ConfigError("sweep needs at least one value");
  std::vector<SweepRow> rows;
  if (spec.strategies.empty()) return rows;
  for (std::uint64_t seed : spec.seeds) {
    const Scenario s = parse_scenario(scenario_root, seed);
    const ScenarioGraph g = build_graphs(s);
    SolverConfig solver = s.solver;
    if (spec.swarm_size) solver.swarm_size = *spec.swarm_size;
    if (spec.max_iterations) solver.max_iterations = *spec.max_iterations;
    for (double value : spec.values) {
      const TaskDag dag = spec.variable == SweepVariable::input_size_bits ? s.make_task(value, std::nullopt)
                                                                          : s.make_task(std::nullopt, value);
      for (Strategy strategy : spec.strategies) {
        const auto t0 = std::chrono::steady_clock::now();
        SweepRow row{value, strategy, seed, kInf, false, 0.0, {}};
        try {
          StrategyOutcome o = run_strategy(strategy, s, g, dag, solver);
          row.latency = o.latency;
          row.feasible = o.feasible;
          row.trace = std::move(o.trace);
        } catch (const InfeasibleError&) {
          row.feasible = false;
        }
        row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        if (observe) observe(row);
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

inline std::string format_double(double v) {
  if (v == kInf) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline constexpr const char* kCsvHeader = "swept_value,strategy,seed,latency_s,feasible,wall_ms";

/// Wall time is the only non-reproducible column; with_wall = false writes it
/// as 0 so two runs can be compared byte for byte.
inline void write_csv_row(std::ostream& os, const SweepRow& row, bool with_wall = true) {
  char wall[32];
  std::snprintf(wall, sizeof wall, "%.3f", with_wall ? row.wall_ms : 0.0);
  os << format_double(row.swept_value) << ',' << to_string(row.strategy) << ',' << row.seed << ','
     << format_double(row.latency) << ',' << (row.feasible ? 1 : 0) << ',' << wall << '\n';
}

inline void write_csv(std::ostream& os, const std::vector<SweepRow>& rows, bool with_wall = true) {
  os << kCsvHeader << '\n';
  for (const auto& row : rows) write_csv_row(os, row, with_wall);
}

inline std::string csv_string(const std::vector<SweepRow>& rows, bool with_wall = true) {
  std::ostringstream os;
  write_csv(os, rows, with_wall);
  return os.str();
}

/// Replaces the wall_ms field of every data line with 0.000.
inline std::string mask_wall_time(const std::string& csv) {
  std::istringstream in(csv);
  std::ostringstream out;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (!header) {
      const auto comma = line.rfind(',');
      if (comma != std::string::npos) line = line.substr(0, comma + 1) + "0.000";
    }
    header = false;
    out << line << '\n';
  }
  return out.str();
}

inline void write_trace_csv(std::ostream& os, const std::vector<double>& trace) {
  os << "generation,best_fitness\n";
  for (std::size_t i = 0; i < trace.size(); ++i) os << i << ',' << format_double(trace[i]) << '\n';
}

// ---------------------------------------------------------------------------
// Small instances and exhaustive enumeration.

struct EnumerationResult {
  std::uint64_t candidates = 0;
  std::uint64_t feasible = 0;
  double best_latency = kInf;
  std::optional<MappingDecision> best;
};

using EnumerationVisitor = std::function<void(const MappingDecision&, const ScheduleResult&)>;

/// Evaluates every X assembled from feasible_runs; visit sees each candidate.
inline EnumerationResult enumerate_mappings(const TaskDag& dag, const EfsmsGraph& graph, const EvalOptions& options,
                                            const EnumerationVisitor& visit = {}, std::uint64_t limit = 1'000'000) {
  const auto& base = graph.base();
  std::vector<std::vector<Run>> runs;
  std::uint64_t total = 1;
  for (int i = 0; i < dag.size(); ++i) {
    runs.push_back(feasible_runs(i, dag, graph.catalog(), base.grid(), options.roles));
    total *= runs.back().size();
    if (total > limit) throw ConfigError("enumeration exceeds " + std::to_string(limit) + " candidates");
  }
  EnumerationResult out;
  if (total == 0) return out;
  EvalOptions opt = options;
  opt.record_routes = false;
  Evaluator ev(dag, graph, opt);
  std::vector<std::size_t> pick(runs.size(), 0);
  MappingDecision x(dag.size(), base.uav_count(), base.slot_count());
  for (;;) {
    for (std::size_t i = 0; i < runs.size(); ++i) x.set_run(static_cast<int>(i), runs[i][pick[i]]);
    const ScheduleResult r = ev.evaluate(x);
    ++out.candidates;
    if (r.feasible()) {
      ++out.feasible;
      if (r.total_latency < out.best_latency) {
        out.best_latency = r.total_latency;
        out.best = x;
      }
    }
    if (visit) visit(x, r);
    std::size_t i = 0;
    while (i < pick.size() && ++pick[i] == runs[i].size()) pick[i++] = 0;
    if (i == pick.size()) break;
  }
  return out;
}

struct OracleBounds {
  int max_uavs = 3;
  int max_slots = 3;
  int max_subtasks = 3;
};

/// A self-contained small scenario for the oracle battery.
struct OracleInstance {
  std::uint64_t seed = 0;
  Scenario scenario;
  ScenarioGraph graphs;
  TaskDag dag;
};

/// Random small instance with at least one feasible mapping. Orbits are wider
/// and faster than in the field scenario so the topology changes between slots.
inline OracleInstance make_oracle_instance(std::uint64_t seed, const OracleBounds& bounds = {}) {
  for (std::uint64_t attempt = 0;; ++attempt) {
    Rng rng(derive_seed(seed, 21, attempt));
    const int p = 2 + static_cast<int>(rng.index(static_cast<std::size_t>(std::max(1, bounds.max_uavs - 1))));
    const int n = 2 + static_cast<int>(rng.index(static_cast<std::size_t>(std::max(1, bounds.max_slots - 1))));
    const int q = 2 + static_cast<int>(rng.index(static_cast<std::size_t>(std::max(1, bounds.max_subtasks - 1))));
    Scenario s;
    s.seed = seed;
    s.grid = SlotGrid(n, 1.0);
    s.channel = ChannelParams::reference();
    std::vector<double> capacity;
    for (int d = 0; d < p; ++d) {
      s.fleet.push_back({rng.uniform(0.0, 3000.0), rng.uniform(0.0, 3000.0), rng.uniform(20.0, 100.0),
                         rng.uniform(200.0, 1500.0), rng.uniform(0.2, 0.8), rng.uniform(0.0, 2.0 * std::numbers::pi)});
      s.formation.push_back(d);
      capacity.push_back(rng.uniform(5e8, 1.2e9));
    }
    std::vector<std::string> types;
    for (int i = 0; i < q; ++i) types.push_back("s" + std::to_string(i + 1));
    s.catalog = StateCatalog(types, capacity);
    s.roles = {0, p - 1};
    s.eval.roles = s.roles;

    std::vector<Subtask> subtasks;
    for (int i = 0; i < q; ++i) subtasks.push_back({"phi" + std::to_string(i + 1), i, rng.uniform(100.0, 200.0), rng.uniform(0.5, 1.0)});
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i + 1 < q; ++i) edges.push_back({i, i + 1});
    if (q == 3 && rng.uniform() < 0.5) edges.push_back({0, 2});
    const double bits = rng.uniform(0.1, 0.9) * 8.5e8 / 150.0;
    TaskDag dag(subtasks, edges, bits);

    for (int d = 0; d < p; ++d) {
      for (int l = 0; l < q; ++l) {
        if (rng.uniform() < 0.6) s.catalog.grant(d, l, subtasks[static_cast<std::size_t>(l)].complexity);
      }
    }
    s.catalog.grant(0, 0, subtasks[0].complexity);
    s.catalog.grant(p - 1, q - 1, subtasks[static_cast<std::size_t>(q - 1)].complexity);
    for (int l = 0; l < q; ++l) {
      if (s.catalog.members_of(l).empty()) {
        s.catalog.grant(static_cast<int>(rng.index(static_cast<std::size_t>(p))), l, subtasks[static_cast<std::size_t>(l)].complexity);
      }
    }
    const auto positions = sample_fleet(s.fleet, s.grid, s.sample);
    bool distinct = true;
    for (const auto& row : positions) {
      for (int a = 0; a < p; ++a) {
        for (int b = a + 1; b < p; ++b) distinct = distinct && distance(row[static_cast<std::size_t>(a)], row[static_cast<std::size_t>(b)]) > 0.0;
      }
    }
    if (!distinct) continue;
    ScenarioGraph g = build_graphs(s);
    if (enumerate_mappings(dag, g.efsm, s.eval).feasible == 0) continue;
    return {seed, std::move(s), std::move(g), std::move(dag)};
  }
}

struct OracleInstanceReport {
  std::uint64_t seed = 0;
  int uavs = 0;
  int slots = 0;
  int subtasks = 0;
  std::uint64_t candidates = 0;
  std::uint64_t feasible = 0;
  double optimum = kInf;
  std::vector<double> fpc;  // best latency per solver seed
  std::vector<std::vector<double>> fpc_traces;
  double wrr = kInf;
  double greedy_lb = kInf;
  double pick_kx = kInf;
  std::uint64_t positions_audited = 0;
  std::uint64_t audit_failures = 0;

  double gap(std::size_t run) const { return (fpc[run] - optimum) / optimum; }
};

struct OracleSuiteSpec {
  OracleBounds bounds;
  int instances = 20;
  int solver_seeds = 10;
  std::uint64_t master_seed = 1;
  SolverConfig solver;
};

inline std::vector<OracleInstanceReport> run_oracle_suite(const OracleSuiteSpec& spec,
                                                          const std::function<void(const OracleInstanceReport&)>& observe = {}) {
  std::vector<OracleInstanceReport> out;
  for (int k = 0; k < spec.instances; ++k) {
    const OracleInstance inst = make_oracle_instance(derive_seed(spec.master_seed, 31, static_cast<std::uint64_t>(k)), spec.bounds);
    OracleInstanceReport rep;
    rep.seed = inst.seed;
    rep.uavs = inst.graphs.base.uav_count();
    rep.slots = inst.graphs.base.slot_count();
    rep.subtasks = inst.dag.size();
    const auto e = enumerate_mappings(inst.dag, inst.graphs.efsm, inst.scenario.eval);
    rep.candidates = e.candidates;
    rep.feasible = e.feasible;
    rep.optimum = e.best_latency;
    for (int r = 0; r < spec.solver_seeds; ++r) {
      SolverConfig cfg = spec.solver;
      cfg.seed = derive_seed(inst.seed, 32, static_cast<std::uint64_t>(r));
      SolverResult sr = csabpso(inst.dag, inst.graphs.efsm, cfg, inst.scenario.eval);
      rep.fpc.push_back(sr.latency);
      rep.fpc_traces.push_back(std::move(sr.trace));
      rep.positions_audited += sr.positions_audited;
      rep.audit_failures += sr.audit_failures;
    }
    const Baselines b(inst.dag, inst.graphs.efsm, inst.scenario.eval);
    rep.wrr = b.wrr().latency;
    rep.greedy_lb = b.greedy_lb().latency;
    rep.pick_kx = b.pick_kx(2, derive_seed(inst.seed, 33)).latency;
    if (observe) observe(rep);
    out.push_back(std::move(rep));
  }
  return out;
}

}  // namespace fpc
