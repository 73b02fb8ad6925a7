#pragma once

// CSABPSO and the comparison strategies.
//
// A particle holds a binary position shaped like X and a real velocity of the
// same shape. After bit sampling, each row is reduced to one run (the repair
// step) and the whole position is then re-timed by Evaluator::schedule, so the
// position a particle holds is always a structurally valid X.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "fpc/channel.hpp"
#include "fpc/efsm.hpp"
#include "fpc/error.hpp"
#include "fpc/rng.hpp"
#include "fpc/taskmap.hpp"

namespace fpc {

struct SolverConfig {
  int swarm_size = 200;
  int max_iterations = 500;
  double learning_personal = 1.0;  // gamma_1
  double learning_global = 1.0;    // gamma_2
  double inertia_start = 1.5;
  double inertia_end = 0.5;
  double velocity_clamp = 6.0;
  double initial_velocity = 4.0;
  std::uint64_t seed = 1;
  int threads = 1;
  bool audit = false;  // run check_constraints on every position ever held

  void validate() const {
    if (swarm_size < 1) throw ConfigError("solver.swarm_size must be >= 1");
    if (max_iterations < 1) throw ConfigError("solver.max_iterations must be >= 1");
    if (!(inertia_end > 0.0) || !(inertia_start >= inertia_end)) {
      throw ConfigError("solver inertia bounds must satisfy start >= end > 0");
    }
    if (!(learning_personal >= 0.0) || !(learning_global >= 0.0)) {
      throw ConfigError("solver learning factors must be >= 0");
    }
    if (!(velocity_clamp > 0.0) || !(initial_velocity >= 0.0)) throw ConfigError("solver velocity bounds invalid");
    if (threads < 1) throw ConfigError("solver.threads must be >= 1");
  }
};

inline double inertia(int iteration, const SolverConfig& cfg) {
  if (iteration < 0 || iteration > cfg.max_iterations) throw ContractError("iteration out of range");
  const double r = static_cast<double>(iteration) / cfg.max_iterations;
  return cfg.inertia_start - (cfg.inertia_start - cfg.inertia_end) * (r * r);
}

inline double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

/// V <- mu V + g1 b1 (pbest - X) + g2 b2 (gbest - X), per-scalar b1, b2.
/// Entries outside mask (when given) are left untouched and draw nothing.
inline void velocity_update(std::vector<double>& velocity, const std::vector<std::uint8_t>& position,
                            const std::vector<std::uint8_t>& personal_best, const std::vector<std::uint8_t>& global_best,
                            double mu, const SolverConfig& cfg, Rng& rng, const std::vector<std::uint8_t>& mask = {}) {
  if (position.size() != velocity.size() || personal_best.size() != velocity.size() ||
      global_best.size() != velocity.size() || (!mask.empty() && mask.size() != velocity.size())) {
    throw ContractError("velocity and position shapes differ");
  }
  for (std::size_t b = 0; b < velocity.size(); ++b) {
    if (!mask.empty() && !mask[b]) continue;
    const double b1 = rng.uniform();
    const double b2 = rng.uniform();
    const double x = position[b];
    double v = mu * velocity[b] + cfg.learning_personal * b1 * (personal_best[b] - x) +
               cfg.learning_global * b2 * (global_best[b] - x);
    velocity[b] = std::clamp(v, -cfg.velocity_clamp, cfg.velocity_clamp);
  }
}

/// Which cells of X each subtask may occupy: ismember plus the role pins.
class MappingSpace {
 public:
  MappingSpace(const TaskDag& dag, const StateCatalog& catalog, const SlotGrid& grid, const Roles& roles)
      : q_(dag.size()), p_(catalog.uav_count()), n_(grid.slot_count()), roles_(roles),
        allowed_(static_cast<std::size_t>(q_) * p_, 0) {
    const int receiver = roles.receiver_of(p_);
    if (roles.initiator < 0 || roles.initiator >= p_ || receiver < 0 || receiver >= p_) {
      throw ConfigError("initiator/receiver UAV out of range");
    }
    for (int i = 0; i < q_; ++i) {
      bool any = false;
      for (int d = 0; d < p_; ++d) {
        bool ok = ismember(dag.subtask(i).state_type, {d, 0}, catalog);
        if (i == 0) ok = ok && d == roles.initiator;
        if (i == dag.sink()) ok = ok && d == receiver;
        allowed_[static_cast<std::size_t>(i) * p_ + d] = ok ? 1 : 0;
        any = any || ok;
      }
      if (!any) {
        throw InfeasibleError("no UAV can host subtask " + std::to_string(i + 1) + " ('" +
                              catalog.type_name(dag.subtask(i).state_type) + "')");
      }
    }
  }

  int rows() const { return q_; }
  int uav_count() const { return p_; }
  int slot_count() const { return n_; }
  const Roles& roles() const { return roles_; }

  bool allowed_uav(int row, int uav) const { return allowed_[static_cast<std::size_t>(row) * p_ + uav] != 0; }
  bool allowed(int row, int uav, int slot) const {
    return allowed_uav(row, uav) && (row != 0 || slot == 0);
  }

  /// allowed() over every cell of X, row-major like MappingDecision.
  std::vector<std::uint8_t> mask() const {
    std::vector<std::uint8_t> m(static_cast<std::size_t>(q_) * p_ * n_);
    for (int i = 0; i < q_; ++i) {
      for (int k = 0; k < n_; ++k) {
        for (int d = 0; d < p_; ++d) m[(static_cast<std::size_t>(i) * n_ + k) * p_ + d] = allowed(i, d, k) ? 1 : 0;
      }
    }
    return m;
  }

  std::vector<int> uavs(int row) const {
    std::vector<int> out;
    for (int d = 0; d < p_; ++d) {
      if (allowed_uav(row, d)) out.push_back(d);
    }
    return out;
  }

 private:
  int q_;
  int p_;
  int n_;
  Roles roles_;
  std::vector<std::uint8_t> allowed_;
};

/// Bit sampling with the membership mask, then per-row repair to one run.
/// Returns the selected run per row (an anchor for Evaluator::schedule).
inline std::vector<Run> position_update(MappingDecision& x, const std::vector<double>& velocity,
                                        const MappingSpace& space, Rng& rng) {
  const int q = space.rows();
  const int p = space.uav_count();
  const int n = space.slot_count();
  const int cols = p * n;
  if (x.rows() != q || x.uav_count() != p || x.slot_count() != n ||
      velocity.size() != static_cast<std::size_t>(q) * cols) {
    throw ContractError("position_update shape mismatch");
  }
  std::vector<double> prob(static_cast<std::size_t>(cols));
  std::vector<Run> runs(static_cast<std::size_t>(q));
  for (int i = 0; i < q; ++i) {
    for (int c = 0; c < cols; ++c) {
      // A masked cell can never be set, so it needs no draw.
      if (!space.allowed(i, c % p, c / p)) {
        prob[static_cast<std::size_t>(c)] = 0.0;
        x.at(i, c) = 0;
        continue;
      }
      const double s = sigmoid(velocity[static_cast<std::size_t>(i) * cols + c]);
      prob[static_cast<std::size_t>(c)] = s;
      x.at(i, c) = s >= rng.uniform() ? 1 : 0;
    }
    // Maximal segments of set bits on one UAV; keep the highest summed probability.
    bool found = false;
    Run best{};
    double best_score = -1.0;
    for (int d = 0; d < p; ++d) {
      int k = 0;
      while (k < n) {
        if (!x.bit(i, d, k)) {
          ++k;
          continue;
        }
        const int start = k;
        double score = 0.0;
        while (k < n && x.bit(i, d, k)) score += prob[static_cast<std::size_t>(MappingDecision::column(d, k++, p))];
        if (score > best_score) {
          best_score = score;
          best = {d, start, k - 1 - start};
          found = true;
        }
      }
    }
    if (!found) {
      double total = 0.0;
      for (int c = 0; c < cols; ++c) {
        if (space.allowed(i, c % p, c / p)) total += prob[static_cast<std::size_t>(c)];
      }
      double target = rng.uniform() * total;
      int pick = -1;
      for (int c = 0; c < cols; ++c) {
        if (!space.allowed(i, c % p, c / p)) continue;
        pick = c;
        target -= prob[static_cast<std::size_t>(c)];
        if (target < 0.0) break;
      }
      if (pick < 0) throw InfeasibleError("no feasible run for subtask " + std::to_string(i + 1));
      best = {pick % p, pick / p, 0};
    }
    x.set_run(i, best);
    runs[static_cast<std::size_t>(i)] = best;
  }
  return runs;
}

struct SolverResult {
  bool feasible = false;
  double latency = kInf;
  MappingDecision best;
  ScheduleResult schedule;
  std::vector<double> trace;  // g_best fitness after each generation, generation 0 first
  std::uint64_t evaluations = 0;
  std::uint64_t positions_audited = 0;
  std::uint64_t audit_failures = 0;
};

/// Constraint Selection Adaptive Binary PSO.
class Csabpso {
 public:
  Csabpso(const TaskDag& dag, const EfsmsGraph& graph, SolverConfig cfg, EvalOptions options = {})
      : dag_(&dag), graph_(&graph), cfg_(cfg), options_(options),
        space_(dag, graph.catalog(), graph.base().grid(), options.roles) {
    cfg_.validate();
    options_.record_routes = false;
    mask_ = space_.mask();
    for (int i = 0; i < dag.size(); ++i) {
      runs_.push_back(feasible_runs(i, dag, graph.catalog(), graph.base().grid(), options.roles));
    }
  }

  SolverResult run() {
    const int q = dag_->size();
    const int p = graph_->base().uav_count();
    const int n = graph_->base().slot_count();
    const std::size_t len = static_cast<std::size_t>(q) * p * n;
    const int m_count = cfg_.swarm_size;

    SolverResult out;
    evaluators_.clear();
    for (int t = 0; t < cfg_.threads; ++t) evaluators_.emplace_back(*dag_, *graph_, options_);
    cache_.clear();

    std::vector<Rng> rngs;
    for (int m = 0; m < m_count; ++m) rngs.emplace_back(derive_seed(cfg_.seed, static_cast<std::uint64_t>(m)));

    std::vector<MappingDecision> pos(static_cast<std::size_t>(m_count), MappingDecision(q, p, n));
    std::vector<std::vector<double>> vel(static_cast<std::size_t>(m_count), std::vector<double>(len));
    std::vector<std::vector<Run>> anchors(static_cast<std::size_t>(m_count));
    std::vector<double> fit(static_cast<std::size_t>(m_count), kInf);

    for (int m = 0; m < m_count; ++m) {
      Rng& rng = rngs[static_cast<std::size_t>(m)];
      auto& a = anchors[static_cast<std::size_t>(m)];
      for (int i = 0; i < q; ++i) {
        const auto& runs = runs_[static_cast<std::size_t>(i)];
        a.push_back(runs[rng.index(runs.size())]);
        pos[static_cast<std::size_t>(m)].set_run(i, a.back());
      }
      auto& v = vel[static_cast<std::size_t>(m)];
      for (std::size_t b = 0; b < len; ++b) {
        if (mask_[b]) v[b] = rng.uniform(-cfg_.initial_velocity, cfg_.initial_velocity);
      }
    }
    evaluate_all(pos, anchors, fit, out);

    std::vector<MappingDecision> pbest = pos;
    std::vector<double> pbest_fit = fit;
    int g = 0;
    for (int m = 1; m < m_count; ++m) {
      if (fit[static_cast<std::size_t>(m)] < fit[static_cast<std::size_t>(g)]) g = m;
    }
    MappingDecision gbest = pos[static_cast<std::size_t>(g)];
    double gbest_fit = fit[static_cast<std::size_t>(g)];
    out.trace.push_back(gbest_fit);

    std::vector<std::uint8_t> xbits(len);
    std::vector<std::uint8_t> pbits(len);
    std::vector<std::uint8_t> gbits(len);
    for (int it = 1; it <= cfg_.max_iterations; ++it) {
      const double mu = inertia(it, cfg_);
      flatten(gbest, gbits);
      for (int m = 0; m < m_count; ++m) {
        const auto um = static_cast<std::size_t>(m);
        flatten(pos[um], xbits);
        flatten(pbest[um], pbits);
        velocity_update(vel[um], xbits, pbits, gbits, mu, cfg_, rngs[um], mask_);
        anchors[um] = position_update(pos[um], vel[um], space_, rngs[um]);
      }
      evaluate_all(pos, anchors, fit, out);
      for (int m = 0; m < m_count; ++m) {
        const auto um = static_cast<std::size_t>(m);
        if (fit[um] < pbest_fit[um]) {
          pbest_fit[um] = fit[um];
          pbest[um] = pos[um];
        }
        if (fit[um] < gbest_fit) {
          gbest_fit = fit[um];
          gbest = pos[um];
        }
      }
      out.trace.push_back(gbest_fit);
    }

    out.best = gbest;
    out.latency = gbest_fit;
    out.feasible = gbest_fit < kInf;
    Evaluator final_eval(*dag_, *graph_, with_routes(options_));
    out.schedule = final_eval.evaluate(gbest);
    return out;
  }

 private:
  static EvalOptions with_routes(EvalOptions o) {
    o.record_routes = true;
    return o;
  }

  static void flatten(const MappingDecision& x, std::vector<std::uint8_t>& bits) {
    for (int i = 0; i < x.rows(); ++i) {
      for (int c = 0; c < x.cols(); ++c) bits[static_cast<std::size_t>(i) * x.cols() + c] = x.at(i, c);
    }
  }

  struct Cached {
    double latency;
    std::vector<Run> runs;
  };

  static std::vector<int> key_of(const std::vector<Run>& runs) {
    std::vector<int> key;
    key.reserve(runs.size() * 2);
    for (const Run& r : runs) {
      key.push_back(r.uav);
      key.push_back(r.start_slot);
    }
    return key;
  }

  // Re-times every position; schedule() depends only on each anchor's UAV and
  // start slot, so identical anchors share one evaluation.
  void evaluate_all(std::vector<MappingDecision>& pos, const std::vector<std::vector<Run>>& anchors,
                    std::vector<double>& fit, SolverResult& out) {
    const int m_count = static_cast<int>(pos.size());
    std::vector<std::vector<int>> keys(static_cast<std::size_t>(m_count));
    std::vector<int> pending;
    std::map<std::vector<int>, int> first_pending;
    for (int m = 0; m < m_count; ++m) {
      keys[static_cast<std::size_t>(m)] = key_of(anchors[static_cast<std::size_t>(m)]);
      const auto& key = keys[static_cast<std::size_t>(m)];
      if (cache_.count(key) == 0 && first_pending.emplace(key, m).second) pending.push_back(m);
    }
    std::vector<Cached> fresh(pending.size());
    auto work = [&](int t) {
      Evaluator& ev = evaluators_[static_cast<std::size_t>(t)];
      for (std::size_t j = static_cast<std::size_t>(t); j < pending.size(); j += evaluators_.size()) {
        const auto& a = anchors[static_cast<std::size_t>(pending[j])];
        const ScheduleResult r = ev.schedule(a);
        Cached c{kInf, a};
        if (r.feasible()) {
          c.latency = r.total_latency;
          for (std::size_t i = 0; i < a.size(); ++i) c.runs[i] = r.subtasks[i].run;
        }
        fresh[j] = std::move(c);
      }
    };
    if (evaluators_.size() == 1 || pending.size() < 2) {
      work(0);
    } else {
      std::vector<std::jthread> pool;
      for (int t = 0; t < static_cast<int>(evaluators_.size()); ++t) pool.emplace_back(work, t);
    }
    out.evaluations += pending.size();
    for (std::size_t j = 0; j < pending.size(); ++j) cache_.emplace(keys[static_cast<std::size_t>(pending[j])], fresh[j]);

    for (int m = 0; m < m_count; ++m) {
      const auto um = static_cast<std::size_t>(m);
      const Cached& c = cache_.at(keys[um]);
      fit[um] = c.latency;
      if (c.latency < kInf) {
        for (int i = 0; i < pos[um].rows(); ++i) pos[um].set_run(i, c.runs[static_cast<std::size_t>(i)]);
      }
      if (cfg_.audit) {
        ++out.positions_audited;
        if (!check_constraints(pos[um], *dag_, graph_->catalog(), graph_->base().grid(), options_.roles).empty()) {
          ++out.audit_failures;
        }
      }
    }
  }

  const TaskDag* dag_;
  const EfsmsGraph* graph_;
  SolverConfig cfg_;
  EvalOptions options_;
  MappingSpace space_;
  std::vector<std::vector<Run>> runs_;
  std::vector<std::uint8_t> mask_;
  std::vector<Evaluator> evaluators_;
  std::map<std::vector<int>, Cached> cache_;
};

inline SolverResult csabpso(const TaskDag& dag, const EfsmsGraph& graph, const SolverConfig& cfg,
                            const EvalOptions& options = {}) {
  return Csabpso(dag, graph, cfg, options).run();
}

struct BaselineResult {
  std::string strategy;
  bool feasible = false;
  double latency = kInf;
  std::optional<MappingDecision> decision;
  std::vector<int> uavs;  // chosen UAV per subtask, where applicable
};

/// Weighted round robin: UAVs by descending capacity, each repeated
/// max(1, round(C / C_min)) times; a cursor walks the cycle and skips UAVs the
/// subtask cannot use.
inline std::vector<int> wrr_sequence(const std::vector<double>& capacity,
                                     const std::vector<std::vector<int>>& candidates) {
  std::vector<int> order(capacity.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return capacity[static_cast<std::size_t>(a)] > capacity[static_cast<std::size_t>(b)]; });
  const double c_min = *std::min_element(capacity.begin(), capacity.end());
  std::vector<int> cycle;
  for (int d : order) {
    const int w = std::max(1, static_cast<int>(std::lround(capacity[static_cast<std::size_t>(d)] / c_min)));
    for (int r = 0; r < w; ++r) cycle.push_back(d);
  }
  std::vector<int> out;
  std::size_t cursor = 0;
  for (const auto& cand : candidates) {
    if (cand.empty()) throw InfeasibleError("subtask has no candidate UAV");
    if (cand.size() == 1) {
      out.push_back(cand.front());
      continue;
    }
    for (std::size_t step = 0;; ++step) {
      const int d = cycle[(cursor + step) % cycle.size()];
      if (std::find(cand.begin(), cand.end(), d) != cand.end()) {
        out.push_back(d);
        cursor = (cursor + step + 1) % cycle.size();
        break;
      }
    }
  }
  return out;
}

class Baselines {
 public:
  Baselines(const TaskDag& dag, const EfsmsGraph& graph, EvalOptions options = {})
      : dag_(&dag), graph_(&graph), options_(options),
        space_(dag, graph.catalog(), graph.base().grid(), options.roles), volume_(task_volume(dag)) {}

  /// Candidate UAVs per subtask in subtask-index order.
  std::vector<std::vector<int>> candidates() const {
    std::vector<std::vector<int>> c;
    for (int i = 0; i < dag_->size(); ++i) c.push_back(space_.uavs(i));
    return c;
  }

  BaselineResult wrr() const {
    std::vector<double> cap;
    for (int d = 0; d < graph_->catalog().uav_count(); ++d) cap.push_back(graph_->catalog().capacity(d));
    const auto cand = candidates();
    std::vector<std::vector<int>> ordered;
    for (int j : dag_->topo_order()) ordered.push_back(cand[static_cast<std::size_t>(j)]);
    const auto seq = wrr_sequence(cap, ordered);
    std::vector<int> uavs(static_cast<std::size_t>(dag_->size()));
    for (std::size_t t = 0; t < seq.size(); ++t) uavs[static_cast<std::size_t>(dag_->topo_order()[t])] = seq[t];
    return place("wrr", uavs);
  }

  /// Least accumulated compute seconds, lower index on ties.
  BaselineResult greedy_lb() const {
    return by_load("greedy_lb", [](const std::vector<int>& cand, Rng&) { return cand; }, 0);
  }

  /// k distinct candidates drawn uniformly, the least loaded of them wins.
  BaselineResult pick_kx(int k, std::uint64_t seed) const {
    if (k < 1) throw ConfigError("baseline.k must be >= 1");
    return by_load(
        "pick_kx",
        [k](std::vector<int> cand, Rng& rng) {
          const std::size_t take = std::min(cand.size(), static_cast<std::size_t>(k));
          for (std::size_t i = 0; i < take; ++i) {
            const std::size_t j = i + rng.index(cand.size() - i);
            std::swap(cand[i], cand[j]);
          }
          cand.resize(take);
          std::sort(cand.begin(), cand.end());
          return cand;
        },
        seed);
  }

  BaselineResult place(std::string name, const std::vector<int>& uavs) const {
    BaselineResult r;
    r.strategy = std::move(name);
    r.uavs = uavs;
    auto [x, sched] = place_on_uavs(uavs, *dag_, *graph_, options_);
    r.feasible = sched.feasible();
    r.latency = sched.total_latency;
    r.decision = std::move(x);
    return r;
  }

 private:
  template <class Pick>
  BaselineResult by_load(std::string name, Pick pick, std::uint64_t seed) const {
    const auto& catalog = graph_->catalog();
    std::vector<double> load(static_cast<std::size_t>(catalog.uav_count()), 0.0);
    std::vector<int> uavs(static_cast<std::size_t>(dag_->size()));
    const auto cand = candidates();
    Rng rng(seed);
    for (int j : dag_->topo_order()) {
      const auto pool = pick(cand[static_cast<std::size_t>(j)], rng);
      int best = pool.front();
      for (int d : pool) {
        if (load[static_cast<std::size_t>(d)] < load[static_cast<std::size_t>(best)]) best = d;
      }
      uavs[static_cast<std::size_t>(j)] = best;
      load[static_cast<std::size_t>(best)] +=
          compute_time(volume_[static_cast<std::size_t>(j)], dag_->subtask(j).complexity, catalog.capacity(best));
    }
    return place(std::move(name), uavs);
  }

  const TaskDag* dag_;
  const EfsmsGraph* graph_;
  EvalOptions options_;
  MappingSpace space_;
  std::vector<double> volume_;
};

/// Remote server reached over one long link.
struct CloudParams {
  double uplink_distance = 50e3;           // m; 0 means co-located
  double ber_threshold = 0.45;             // relaxed for the long link
  double server_capacity = 10e9;           // Hz; +inf allowed
  std::optional<double> uplink_rate;       // bit/s, overrides the channel model
};

inline double cloud_uplink_rate(const CloudParams& cloud, const ChannelParams& channel) {
  if (cloud.uplink_rate) {
    if (!(*cloud.uplink_rate > 0.0)) throw ConfigError("cloud.uplink_rate_bps must be > 0");
    return *cloud.uplink_rate;
  }
  if (cloud.uplink_distance == 0.0) return kInf;
  ChannelParams ch = channel;
  ch.ber_threshold = cloud.ber_threshold;
  const LinkMetrics m = link_metrics(cloud.uplink_distance, ch);
  if (!m.connected) throw InfeasibleError("cloud uplink is not connected at the configured distance");
  return m.capacity;
}

/// Upload D_1, compute every subtask on the server in turn, download the sink's output.
inline BaselineResult baseline_cloud(const TaskDag& dag, const CloudParams& cloud, const ChannelParams& channel) {
  if (!(cloud.server_capacity > 0.0)) throw ConfigError("cloud.server_capacity_hz must be > 0");
  const double rate = cloud_uplink_rate(cloud, channel);
  const auto volume = task_volume(dag);
  const double up = rate == kInf ? 0.0 : dag.source_volume() / rate;
  const double down = rate == kInf ? 0.0 : volume.back() * dag.subtask(dag.sink()).scaling / rate;
  double compute = 0.0;
  if (cloud.server_capacity != kInf) {
    for (int j : dag.topo_order()) {
      compute += compute_time(volume[static_cast<std::size_t>(j)], dag.subtask(j).complexity, cloud.server_capacity);
    }
  }
  BaselineResult r;
  r.strategy = "cloud";
  r.feasible = true;
  r.latency = up + compute + down;
  return r;
}

/// Every subtask on the user terminal in turn.
inline BaselineResult baseline_local(const TaskDag& dag, double terminal_capacity) {
  if (!(terminal_capacity > 0.0)) throw ConfigError("local.capacity_hz must be > 0");
  const auto volume = task_volume(dag);
  double t = 0.0;
  for (int j : dag.topo_order()) {
    t += compute_time(volume[static_cast<std::size_t>(j)], dag.subtask(j).complexity, terminal_capacity);
  }
  BaselineResult r;
  r.strategy = "local";
  r.feasible = true;
  r.latency = t;
  return r;
}

}  // namespace fpc
