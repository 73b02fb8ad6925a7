// fpc: command-line front end for scenarios, graphs, solving, sweeps and the
// oracle battery.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fpc/experiment.hpp"
#include "fpc/scenario.hpp"

namespace fs = std::filesystem;

namespace {

struct Globals {
  std::optional<std::uint64_t> seed;
  std::string config = "scenarios/reference.json";
  std::string out_dir = "out";
  bool unit_bit_route = false;
};

fpc::Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw fpc::ConfigError("cannot open scenario file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return fpc::parse_json_text(buf.str(), path);
}

fpc::Json with_globals(fpc::Json root, const Globals& g) {
  if (g.unit_bit_route) root["routing"]["unit_bit_route"] = true;
  return root;
}

fpc::Scenario load(const Globals& g) { return fpc::parse_scenario(with_globals(read_json(g.config), g), g.seed); }

std::ofstream open_out(const Globals& g, const std::string& name) {
  fs::create_directories(g.out_dir);
  const fs::path path = fs::path(g.out_dir) / name;
  std::ofstream os(path);
  if (!os) throw fpc::ConfigError("cannot write '" + path.string() + "'");
  return os;
}

std::string describe_runs(const fpc::MappingDecision& x, const fpc::TaskDag& dag) {
  std::ostringstream os;
  for (int i = 0; i < x.rows(); ++i) {
    const auto run = x.run(i);
    os << "  " << dag.subtask(i).name << ": ";
    if (run) {
      os << "uav " << run->uav + 1 << ", slots " << run->start_slot + 1 << ".." << run->end_slot() + 1;
    } else {
      os << "(none)";
    }
    os << '\n';
  }
  return os.str();
}

int cmd_validate(const Globals& g) {
  const fpc::Scenario s = load(g);
  const auto graphs = fpc::build_graphs(s);
  const fpc::TaskDag dag = s.make_task();
  std::cout << "scenario ok: " << s.uav_count() << " UAVs, " << s.grid.slot_count() << " slots of "
            << s.grid.slot_length() << " s, task with " << dag.size() << " subtasks\n";
  std::cout << "graph: " << graphs.base.digraph().edges().size() << " base edges, " << graphs.efsm.state_node_count()
            << " state nodes\n";
  if (!s.fsms.empty()) {
    const auto report = fpc::validate_fsm(s.fsms.front());
    std::cout << "fsm: " << (report.valid() ? "valid" : report.to_text()) << '\n';
  }
  return 0;
}

int cmd_graph(const Globals& g, bool efsm, bool expanded) {
  const fpc::Scenario s = load(g);
  const auto graphs = fpc::build_graphs(s);
  if (expanded) {
    std::cout << s.expanded.dump(2) << '\n';
    return 0;
  }
  if (efsm) {
    fpc::dump_edges(std::cout, graphs.efsm);
  } else {
    fpc::dump_edges(std::cout, graphs.base);
  }
  return 0;
}

int cmd_solve(const Globals& g, const std::vector<std::string>& strategies, std::optional<double> bits,
              std::optional<double> alpha, std::optional<int> swarm, std::optional<int> iterations, bool trace) {
  const fpc::Scenario s = load(g);
  const auto graphs = fpc::build_graphs(s);
  const fpc::TaskDag dag = s.make_task(bits, alpha);
  fpc::SolverConfig cfg = s.solver;
  if (swarm) cfg.swarm_size = *swarm;
  if (iterations) cfg.max_iterations = *iterations;
  for (const auto& name : strategies) {
    const auto strategy = fpc::parse_strategy(name);
    const auto o = fpc::run_strategy(strategy, s, graphs, dag, cfg);
    std::cout << name << ": " << (o.feasible ? fpc::format_double(o.latency) + " s" : std::string("infeasible")) << '\n';
    if (o.decision && o.feasible) std::cout << describe_runs(*o.decision, dag);
    if (trace && !o.trace.empty()) {
      auto os = open_out(g, "trace_" + name + ".csv");
      fpc::write_trace_csv(os, o.trace);
    }
  }
  return 0;
}

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> out;
  const auto colon = std::count(text.begin(), text.end(), ':');
  if (colon == 2) {
    double lo = 0;
    double hi = 0;
    double step = 0;
    if (std::sscanf(text.c_str(), "%lf:%lf:%lf", &lo, &hi, &step) != 3 || !(step > 0.0) || hi < lo) {
      throw fpc::ConfigError("--values range must be lo:hi:step");
    }
    const auto count = static_cast<int>(std::floor((hi - lo) / step + 1e-9));
    for (int i = 0; i <= count; ++i) out.push_back(lo + step * i);
    return out;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

int cmd_sweep(const Globals& g, const std::string& variable, const std::string& values, const std::vector<std::string>& strategies,
              int seeds, std::optional<int> swarm, std::optional<int> iterations, bool verify, bool traces) {
  const fpc::Json root = with_globals(read_json(g.config), g);
  fpc::SweepSpec spec;
  spec.variable = fpc::parse_sweep_variable(variable);
  spec.values = parse_values(values);
  for (const auto& s : strategies) spec.strategies.push_back(fpc::parse_strategy(s));
  const std::uint64_t master = g.seed ? *g.seed : root.at("seed").get<std::uint64_t>();
  for (int i = 0; i < seeds; ++i) spec.seeds.push_back(master + static_cast<std::uint64_t>(i));
  spec.swarm_size = swarm;
  spec.max_iterations = iterations;

  auto os = open_out(g, "sweep.csv");
  os << fpc::kCsvHeader << '\n';
  const auto rows = fpc::run_sweep(root, spec, [&](const fpc::SweepRow& row) {
    fpc::write_csv_row(os, row);
    os.flush();
    fpc::write_csv_row(std::cout, row);
    if (traces && !row.trace.empty()) {
      std::ostringstream name;
      name << "trace_" << fpc::to_string(row.strategy) << '_' << row.seed << '_' << fpc::format_double(row.swept_value) << ".csv";
      auto ts = open_out(g, name.str());
      fpc::write_trace_csv(ts, row.trace);
    }
  });
  if (verify) {
    const auto again = fpc::run_sweep(root, spec);
    const bool same = fpc::csv_string(rows, false) == fpc::csv_string(again, false);
    std::cout << "verify: " << (same ? "identical" : "DIFFERENT") << " (wall_ms excluded)\n";
    return same ? 0 : 1;
  }
  return 0;
}

int cmd_oracle(const Globals& g, int instances, int solver_seeds, int max_uavs, int max_slots, int max_subtasks, int swarm,
               int iterations) {
  fpc::OracleSuiteSpec spec;
  spec.instances = instances;
  spec.solver_seeds = solver_seeds;
  spec.bounds = {max_uavs, max_slots, max_subtasks};
  spec.master_seed = g.seed.value_or(1);
  spec.solver.swarm_size = swarm;
  spec.solver.max_iterations = iterations;
  spec.solver.audit = true;
  int within = 0;
  int total = 0;
  auto os = open_out(g, "oracle.csv");
  os << "instance_seed,uavs,slots,subtasks,candidates,feasible,optimum_s,fpc_best_s,fpc_worst_s,wrr_s,greedy_lb_s,pick_kx_s\n";
  fpc::run_oracle_suite(spec, [&](const fpc::OracleInstanceReport& r) {
    const double best = *std::min_element(r.fpc.begin(), r.fpc.end());
    const double worst = *std::max_element(r.fpc.begin(), r.fpc.end());
    for (std::size_t k = 0; k < r.fpc.size(); ++k) {
      ++total;
      if (r.gap(k) <= 0.05) ++within;
    }
    std::ostringstream line;
    line << r.seed << ',' << r.uavs << ',' << r.slots << ',' << r.subtasks << ',' << r.candidates << ',' << r.feasible << ','
         << fpc::format_double(r.optimum) << ',' << fpc::format_double(best) << ',' << fpc::format_double(worst) << ','
         << fpc::format_double(r.wrr) << ',' << fpc::format_double(r.greedy_lb) << ',' << fpc::format_double(r.pick_kx) << '\n';
    os << line.str();
    std::cout << line.str();
  });
  std::cout << "fpc within 5% of optimum: " << within << '/' << total << '\n';
  return 0;
}

/// Mean latency per (strategy, swept value) as whitespace-separated x y files.
int cmd_plotdata(const Globals& g, const std::string& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw fpc::ConfigError("cannot open '" + csv_path + "'");
  std::string line;
  std::getline(in, line);
  std::map<std::string, std::map<double, std::pair<double, int>>> series;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string x, strategy, seed, latency, feasible;
    std::getline(ss, x, ',');
    std::getline(ss, strategy, ',');
    std::getline(ss, seed, ',');
    std::getline(ss, latency, ',');
    std::getline(ss, feasible, ',');
    if (feasible != "1") continue;
    auto& cell = series[strategy][std::stod(x)];
    cell.first += std::stod(latency);
    cell.second += 1;
  }
  for (const auto& [strategy, points] : series) {
    auto os = open_out(g, "series_" + strategy + ".dat");
    os << "# x mean_latency_s samples\n";
    for (const auto& [x, cell] : points) os << fpc::format_double(x) << ' ' << fpc::format_double(cell.first / cell.second) << ' ' << cell.second << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulator and mapping optimizer for cooperative UAV swarm computing"};
  app.require_subcommand(1);
  Globals g;
  std::uint64_t seed = 0;
  auto* seed_opt = app.add_option("--seed", seed, "Master seed (overrides the scenario's seed)");
  app.add_option("--config", g.config, "Scenario JSON file")->capture_default_str();
  app.add_option("--out-dir", g.out_dir, "Directory for output files")->capture_default_str();
  app.add_flag("--unit-bit-route", g.unit_bit_route, "Use the literal unit-bit route latency recursion");

  auto* validate = app.add_subcommand("validate", "Load and check a scenario");

  auto* graph = app.add_subcommand("graph", "Dump the space-time graph edge list");
  bool efsm = false;
  bool expanded = false;
  graph->add_flag("--efsm", efsm, "Include state nodes");
  graph->add_flag("--expanded", expanded, "Print the expanded scenario JSON instead");

  auto* solve = app.add_subcommand("solve", "Solve one instance");
  std::vector<std::string> solve_strategies{"fpc", "wrr", "greedy_lb", "pick_kx", "cloud", "local"};
  std::optional<double> bits;
  std::optional<double> alpha;
  std::optional<int> swarm;
  std::optional<int> iterations;
  bool trace = false;
  solve->add_option("--strategy", solve_strategies, "Strategies to run");
  solve->add_option("--input-bits", bits, "Override the task input size");
  solve->add_option("--complexity", alpha, "Override every subtask's complexity (cycles/bit)");
  solve->add_option("--swarm", swarm, "Swarm size");
  solve->add_option("--iterations", iterations, "Generations");
  solve->add_flag("--trace", trace, "Write the convergence trace CSV");

  auto* sweep = app.add_subcommand("sweep", "Sweep input size or complexity");
  std::string variable = "complexity_cycles_per_bit";
  std::string values = "100:200:10";
  std::vector<std::string> sweep_strategies{"fpc"};
  int seeds = 1;
  bool verify = false;
  bool traces = false;
  sweep->add_option("--variable", variable, "input_size_bits | complexity_cycles_per_bit")->capture_default_str();
  sweep->add_option("--values", values, "Comma list or lo:hi:step")->capture_default_str();
  sweep->add_option("--strategies", sweep_strategies, "Strategies to run");
  sweep->add_option("--seeds", seeds, "Number of consecutive seeds from the master seed")->capture_default_str();
  sweep->add_option("--swarm", swarm, "Swarm size");
  sweep->add_option("--iterations", iterations, "Generations");
  sweep->add_flag("--verify", verify, "Re-run and compare the CSV (wall time excluded)");
  sweep->add_flag("--traces", traces, "Write per-point convergence traces");

  auto* oracle = app.add_subcommand("oracle", "Exhaustive-enumeration battery on small instances");
  int instances = 20;
  int solver_seeds = 10;
  int max_uavs = 3;
  int max_slots = 3;
  int max_subtasks = 3;
  int oracle_swarm = 200;
  int oracle_iterations = 500;
  oracle->add_option("--instances", instances)->capture_default_str();
  oracle->add_option("--solver-seeds", solver_seeds)->capture_default_str();
  oracle->add_option("--max-uavs", max_uavs)->capture_default_str();
  oracle->add_option("--max-slots", max_slots)->capture_default_str();
  oracle->add_option("--max-subtasks", max_subtasks)->capture_default_str();
  oracle->add_option("--swarm", oracle_swarm)->capture_default_str();
  oracle->add_option("--iterations", oracle_iterations)->capture_default_str();

  auto* plot = app.add_subcommand("emit-plotdata", "Turn a sweep CSV into x/y series files");
  std::string csv_path;
  plot->add_option("csv", csv_path, "Sweep CSV")->required();

  CLI11_PARSE(app, argc, argv);
  if (*seed_opt) g.seed = seed;

  try {
    if (*validate) return cmd_validate(g);
    if (*graph) return cmd_graph(g, efsm, expanded);
    if (*solve) return cmd_solve(g, solve_strategies, bits, alpha, swarm, iterations, trace);
    if (*sweep) return cmd_sweep(g, variable, values, sweep_strategies, seeds, swarm, iterations, verify, traces);
    if (*oracle) return cmd_oracle(g, instances, solver_seeds, max_uavs, max_slots, max_subtasks, oracle_swarm, oracle_iterations);
    if (*plot) return cmd_plotdata(g, csv_path);
  } catch (const fpc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const fpc::InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return 3;
  } catch (const fpc::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
