#include <gtest/gtest.h>

#include <cmath>

#include "fpc/experiment.hpp"
#include "fpc/solver.hpp"

using namespace fpc;

namespace {

SolverConfig small_config(std::uint64_t seed, int swarm = 40, int iterations = 60) {
  SolverConfig cfg;
  cfg.swarm_size = swarm;
  cfg.max_iterations = iterations;
  cfg.seed = seed;
  return cfg;
}

double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// Fully linked UAVs sharing one state type.
struct Line {
  SpaceTimeGraph base;
  EfsmsGraph graph;
};

Line line(std::vector<double> capacity, int slots = 2) {
  const int p = static_cast<int>(capacity.size());
  std::vector<SlotMatrix> s;
  for (int k = 0; k < slots; ++k) {
    SlotMatrix m(p);
    for (int i = 0; i < p; ++i) {
      for (int j = 0; j < p; ++j) {
        if (i != j) m.set(i, j, 1e-9);
      }
    }
    s.push_back(m);
  }
  Line l;
  l.base = assemble(SlotGrid(slots, 1.0), s, std::vector<CacheBlock>(static_cast<std::size_t>(slots), CacheBlock(capacity.size(), 1.0)));
  StateCatalog c({"work"}, capacity);
  for (int d = 0; d < p; ++d) {
    c.grant(d, 0, 100);
  }
  l.graph = build_efsmsg(l.base, c);
  return l;
}

TaskDag chain(int q, double bits) {
  std::vector<Subtask> s;
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < q; ++i) {
    s.push_back({"s" + std::to_string(i), 0, 100, 0.8});
    if (i > 0) e.push_back({i - 1, i});
  }
  return {s, e, bits};
}

}  // namespace

TEST(Inertia, BoundaryAndMidpoint) {
  SolverConfig cfg;
  cfg.max_iterations = 500;
  EXPECT_EQ(inertia(0, cfg), 1.5);
  EXPECT_EQ(inertia(500, cfg), 0.5);
  EXPECT_EQ(inertia(250, cfg), 1.25);
  EXPECT_THROW(inertia(501, cfg), ContractError);
  double prev = inertia(0, cfg);
  for (int i = 1; i <= 500; ++i) {
    EXPECT_LE(inertia(i, cfg), prev);
    prev = inertia(i, cfg);
  }
}

TEST(Sigmoid, Values) {
  EXPECT_EQ(sigmoid(0.0), 0.5);
  EXPECT_EQ(sigmoid(800.0), 1.0);
  for (double v : {-5.0, -0.3, 0.7, 3.0}) EXPECT_NEAR(sigmoid(v) + sigmoid(-v), 1.0, 1e-15);
  double prev = 0.0;
  for (double v = -10; v <= 10; v += 0.25) {
    EXPECT_GT(sigmoid(v), prev);
    prev = sigmoid(v);
  }
}

TEST(SolverConfig, Validation) {
  SolverConfig cfg;
  cfg.swarm_size = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.inertia_end = 2.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.learning_global = -1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(VelocityUpdate, ConvergedFixpoint) {
  SolverConfig cfg;
  std::vector<double> v(12, 0.0);
  const std::vector<std::uint8_t> x{1, 0, 1, 1, 0, 0, 1, 0, 1, 1, 0, 1};
  Rng rng(1);
  velocity_update(v, x, x, x, 1.2, cfg, rng);
  for (double e : v) EXPECT_EQ(e, 0.0);
}

TEST(VelocityUpdate, ZeroLearningScalesByInertia) {
  SolverConfig cfg;
  cfg.learning_personal = 0.0;
  cfg.learning_global = 0.0;
  Rng rng(2);
  std::vector<double> v;
  for (int i = 0; i < 50; ++i) v.push_back(rng.uniform(-4, 4));
  std::vector<std::uint8_t> x(50, 0), p(50, 1), g(50, 0);
  for (int step = 0; step < 30; ++step) {
    const double before = norm(v);
    const auto copy = v;
    velocity_update(v, x, p, g, 0.7, cfg, rng);
    for (std::size_t b = 0; b < v.size(); ++b) EXPECT_EQ(v[b], 0.7 * copy[b]);
    EXPECT_LE(norm(v), (0.7 + 1e-12) * before);
  }
}

TEST(VelocityUpdate, ClampAndMaskAndDeterminism) {
  SolverConfig cfg;
  std::vector<double> a(20, 5.9), b(20, 5.9);
  std::vector<std::uint8_t> x(20, 0), p(20, 1), g(20, 1), mask(20, 1);
  mask[3] = 0;
  Rng ra(5), rb(5);
  velocity_update(a, x, p, g, 1.5, cfg, ra, mask);
  velocity_update(b, x, p, g, 1.5, cfg, rb, mask);
  EXPECT_EQ(a, b);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (i == 3) {
      EXPECT_EQ(a[i], 5.9);
    } else {
      EXPECT_EQ(a[i], 6.0);
    }
  }
  std::vector<double> wrong(3);
  EXPECT_THROW(velocity_update(wrong, x, p, g, 1.0, cfg, ra), ContractError);
}

TEST(PositionUpdate, SaturatedRunSelectedDeterministically) {
  const Line l = line({1e9, 1e9, 1e9}, 3);
  const TaskDag d = chain(3, 1e6);
  const Roles roles{0, 2};
  const MappingSpace space(d, l.graph.catalog(), l.base.grid(), roles);
  std::vector<double> vel(static_cast<std::size_t>(3 * 9), -1e3);
  auto set = [&](int row, int uav, int slot) { vel[static_cast<std::size_t>(row * 9 + MappingDecision::column(uav, slot, 3))] = 1e3; };
  set(0, 0, 0);
  set(1, 1, 1);
  set(1, 1, 2);
  set(2, 2, 2);
  MappingDecision x(3, 3, 3);
  Rng rng(9);
  const auto runs = position_update(x, vel, space, rng);
  EXPECT_EQ(runs[0], (fpc::Run{0, 0, 0}));
  EXPECT_EQ(runs[1], (fpc::Run{1, 1, 1}));
  EXPECT_EQ(runs[2], (fpc::Run{2, 2, 0}));
  EXPECT_TRUE(check_constraints(x, d, l.graph.catalog(), l.base.grid(), roles).empty());
}

TEST(PositionUpdate, NoMemberIsInfeasible) {
  const Line l = line({1e9, 1e9}, 2);
  const TaskDag d({{"a", 0, 1, 1}, {"b", 1, 1, 1}}, {{0, 1}}, 1.0);
  StateCatalog c({"work", "other"}, {1e9, 1e9});
  c.grant(0, 0, 1);
  EXPECT_THROW(MappingSpace(d, c, l.base.grid(), {0, 1}), InfeasibleError);
}

TEST(PositionUpdate, RandomVelocitiesAlwaysPassConstraints) {
  const OracleInstance inst = make_oracle_instance(77);
  const auto& g = inst.graphs;
  const MappingSpace space(inst.dag, g.efsm.catalog(), g.base.grid(), inst.scenario.roles);
  const int len = inst.dag.size() * g.base.uav_count() * g.base.slot_count();
  Rng rng(3);
  MappingDecision x(inst.dag.size(), g.base.uav_count(), g.base.slot_count());
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> vel;
    for (int i = 0; i < len; ++i) vel.push_back(rng.uniform(-6, 6));
    position_update(x, vel, space, rng);
    ASSERT_TRUE(check_constraints(x, inst.dag, g.efsm.catalog(), g.base.grid(), inst.scenario.roles).empty());
  }
}

TEST(Csabpso, SingleFeasibleMappingFoundAtGenerationZero) {
  const Line l = line({1e9, 1e9}, 1);
  const TaskDag d = chain(2, 1e6);
  EvalOptions o;
  o.roles = {0, 1};
  const auto e = enumerate_mappings(d, l.graph, o);
  ASSERT_EQ(e.feasible, 1u);
  const SolverResult r = csabpso(d, l.graph, small_config(1, 5, 5), o);
  ASSERT_TRUE(r.feasible);
  EXPECT_EQ(r.trace.front(), e.best_latency);
  EXPECT_EQ(r.latency, e.best_latency);
  EXPECT_TRUE(r.best == *e.best);
}

TEST(Csabpso, TraceMonotoneAndDeterministic) {
  const OracleInstance inst = make_oracle_instance(5);
  const SolverConfig cfg = small_config(11);
  const SolverResult a = csabpso(inst.dag, inst.graphs.efsm, cfg, inst.scenario.eval);
  const SolverResult b = csabpso(inst.dag, inst.graphs.efsm, cfg, inst.scenario.eval);
  ASSERT_EQ(a.trace.size(), static_cast<std::size_t>(cfg.max_iterations + 1));
  for (std::size_t i = 1; i < a.trace.size(); ++i) EXPECT_LE(a.trace[i], a.trace[i - 1]);
  EXPECT_EQ(a.trace, b.trace);
  EXPECT_EQ(a.latency, b.latency);
  EXPECT_TRUE(a.best == b.best);
  EXPECT_EQ(a.schedule.total_latency, a.latency);
}

TEST(Csabpso, ThreadCountDoesNotChangeResult) {
  const OracleInstance inst = make_oracle_instance(6);
  SolverConfig cfg = small_config(12);
  const SolverResult one = csabpso(inst.dag, inst.graphs.efsm, cfg, inst.scenario.eval);
  cfg.threads = 3;
  const SolverResult three = csabpso(inst.dag, inst.graphs.efsm, cfg, inst.scenario.eval);
  EXPECT_EQ(one.trace, three.trace);
  EXPECT_TRUE(one.best == three.best);
}

TEST(Csabpso, AuditCountsEveryPosition) {
  const OracleInstance inst = make_oracle_instance(8);
  SolverConfig cfg = small_config(13, 10, 20);
  cfg.audit = true;
  const SolverResult r = csabpso(inst.dag, inst.graphs.efsm, cfg, inst.scenario.eval);
  EXPECT_EQ(r.positions_audited, 10u * 21u);
  EXPECT_EQ(r.audit_failures, 0u);
}

TEST(Csabpso, BestIsFeasibleUnderStrictEvaluation) {
  for (std::uint64_t seed = 20; seed < 25; ++seed) {
    const OracleInstance inst = make_oracle_instance(seed);
    const SolverResult r = csabpso(inst.dag, inst.graphs.efsm, small_config(seed), inst.scenario.eval);
    ASSERT_TRUE(r.feasible);
    const auto check = evaluate(r.best, inst.dag, inst.graphs.efsm, inst.scenario.eval);
    EXPECT_EQ(check.total_latency, r.latency);
    const auto e = enumerate_mappings(inst.dag, inst.graphs.efsm, inst.scenario.eval);
    EXPECT_GE(r.latency, e.best_latency);
  }
}

TEST(Wrr, TwoToOneCapacityPattern) {
  const std::vector<double> cap{2e9, 1e9};
  const std::vector<std::vector<int>> cand(3, {0, 1});
  EXPECT_EQ(wrr_sequence(cap, cand), (std::vector<int>{0, 0, 1}));
  EXPECT_EQ(wrr_sequence({1e9, 2e9}, cand), (std::vector<int>{1, 1, 0}));
}

TEST(Wrr, SkipsInfeasibleAndPinnedRowsKeepCursor) {
  const std::vector<double> cap{1e9, 1e9, 1e9};
  const std::vector<std::vector<int>> cand{{2}, {0, 1}, {1, 2}, {0, 2}};
  EXPECT_EQ(wrr_sequence(cap, cand), (std::vector<int>{2, 0, 1, 2}));
}

TEST(Baselines, SingleFeasibleUavCoincides) {
  const Line l = line({6e8, 9e8, 1.1e9}, 2);
  const TaskDag d({{"a", 0, 100, 0.8}, {"b", 1, 100, 0.8}, {"c", 0, 100, 0.8}}, {{0, 1}, {1, 2}}, 1e6);
  StateCatalog c({"work", "mid"}, {6e8, 9e8, 1.1e9});
  c.grant(0, 0, 100);
  c.grant(2, 0, 100);
  c.grant(1, 1, 100);
  const EfsmsGraph g = build_efsmsg(l.base, c);
  EvalOptions o;
  o.roles = {0, 2};
  const Baselines b(d, g, o);
  const auto w = b.wrr();
  const auto gl = b.greedy_lb();
  const auto pk = b.pick_kx(2, 99);
  EXPECT_EQ(w.uavs, (std::vector<int>{0, 1, 2}));
  EXPECT_EQ(gl.uavs, w.uavs);
  EXPECT_EQ(pk.uavs, w.uavs);
  EXPECT_EQ(w.latency, gl.latency);
  EXPECT_EQ(w.latency, pk.latency);
}

TEST(Baselines, GreedyLoadBalancingHandTrace) {
  // Capacities 1, 2, 4 GHz; five 100 cycle/bit subtasks, 1e6 bits, eta 1.
  // Loads (s): start 0,0,0 -> s0 pinned on u0 (+0.1) -> s1: u1 (0 < 0.1, tie u1/u2 -> u1, +0.05)
  // -> s2: u2 (0) +0.025 -> s3: u2 (0.025 < 0.05) +0.025 -> s4 pinned on u2.
  std::vector<Subtask> s;
  for (int i = 0; i < 5; ++i) s.push_back({"s" + std::to_string(i), 0, 100, 1.0});
  const TaskDag d(s, {{0, 1}, {1, 2}, {2, 3}, {3, 4}}, 1e6);
  const Line l = line({1e9, 2e9, 4e9}, 2);
  EvalOptions o;
  o.roles = {0, 2};
  const Baselines b(d, l.graph, o);
  const auto r = b.greedy_lb();
  EXPECT_EQ(r.uavs, (std::vector<int>{0, 1, 2, 2, 2}));
  EXPECT_TRUE(r.feasible);
  ASSERT_TRUE(r.decision);
  EXPECT_EQ(evaluate(*r.decision, d, l.graph, o).total_latency, r.latency);
}

TEST(Baselines, PickKxIsSeededAndPicksFromCandidates) {
  const OracleInstance inst = make_oracle_instance(9);
  const Baselines b(inst.dag, inst.graphs.efsm, inst.scenario.eval);
  const auto a = b.pick_kx(2, 5);
  const auto c = b.pick_kx(2, 5);
  EXPECT_EQ(a.uavs, c.uavs);
  const auto cand = b.candidates();
  for (int i = 0; i < inst.dag.size(); ++i) {
    EXPECT_NE(std::find(cand[static_cast<std::size_t>(i)].begin(), cand[static_cast<std::size_t>(i)].end(), a.uavs[static_cast<std::size_t>(i)]),
              cand[static_cast<std::size_t>(i)].end());
  }
  EXPECT_THROW(b.pick_kx(0, 1), ConfigError);
}

TEST(CloudLocal, Limits) {
  const TaskDag one({{"only", 0, 100, 0.8}}, {}, 1e6);
  CloudParams cloud;
  cloud.uplink_distance = 0.0;
  cloud.server_capacity = kInf;
  EXPECT_EQ(baseline_cloud(one, cloud, ChannelParams::reference()).latency, 0.0);
  EXPECT_DOUBLE_EQ(baseline_local(one, 1e9).latency, 1e6 * 100 / 1e9);
  EXPECT_THROW(baseline_local(one, 0.0), ConfigError);
}

TEST(CloudLocal, DefaultUplinkRate) {
  const double rate = cloud_uplink_rate(CloudParams{}, ChannelParams::reference());
  EXPECT_GT(rate, 1.0e6);
  EXPECT_LT(rate, 1.3e6);
  CloudParams far;
  far.uplink_distance = 1e7;
  EXPECT_THROW(cloud_uplink_rate(far, ChannelParams::reference()), InfeasibleError);
  CloudParams fixed;
  fixed.uplink_rate = 1e6;
  const TaskDag one({{"only", 0, 100, 0.5}}, {}, 1e6);
  fixed.server_capacity = 1e10;
  EXPECT_DOUBLE_EQ(baseline_cloud(one, fixed, ChannelParams::reference()).latency, 1.0 + 0.01 + 0.5);
}
