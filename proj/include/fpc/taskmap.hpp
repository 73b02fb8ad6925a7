#pragma once

// DAG tasks, the binary mapping decision X, structural constraint checks and
// the latency evaluator.
//
// Timing model (time-consistent mode, the default):
//  * phi_1 starts computing on the initiating UAV at t = 0 in slot 1.
//  * The output of a subtask leaves the last node of its run when its
//    computation finishes and travels to the first node of each successor's
//    run on the earliest-arrival route. A hop must finish inside the slot it
//    starts in; otherwise the data waits on a cache edge until the next slot.
//  * A UAV runs one subtask at a time, in canonical topological order.
//  * ComputePolicy::defer: a computation that would cross the end of the slot
//    it starts in is cached to the next slot boundary and runs from there.
//    ComputePolicy::span: computations run straight across slot boundaries.
//  * The span rho of a run is the number of extra slots between the run's
//    start slot and the slot in which its computation finishes.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "fpc/efsm.hpp"
#include "fpc/error.hpp"
#include "fpc/stgraph.hpp"

namespace fpc {

struct Subtask {
  std::string name;
  int state_type = 0;       // required processing state
  double complexity = 0.0;  // alpha, cycles/bit
  double scaling = 1.0;     // eta in (0, 1]
};

/// Subtask 0 is the unique source, subtask q-1 the unique sink.
class TaskDag {
 public:
  TaskDag() = default;
  TaskDag(std::vector<Subtask> subtasks, std::vector<std::pair<int, int>> edges, double source_volume)
      : subtasks_(std::move(subtasks)), edges_(std::move(edges)), source_volume_(source_volume) {
    const int q = size();
    preds_.assign(static_cast<std::size_t>(q), {});
    succs_.assign(static_cast<std::size_t>(q), {});
    for (const auto& [a, b] : edges_) {
      if (a < 0 || a >= q || b < 0 || b >= q || a == b) throw ContractError("DAG edge out of range");
      preds_[static_cast<std::size_t>(b)].push_back(a);
      succs_[static_cast<std::size_t>(a)].push_back(b);
    }
    for (auto& v : preds_) std::sort(v.begin(), v.end());
    for (auto& v : succs_) std::sort(v.begin(), v.end());
    validate();
  }

  int size() const { return static_cast<int>(subtasks_.size()); }
  int sink() const { return size() - 1; }
  const Subtask& subtask(int i) const { return subtasks_.at(static_cast<std::size_t>(i)); }
  const std::vector<Subtask>& subtasks() const { return subtasks_; }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  const std::vector<int>& preds(int i) const { return preds_[static_cast<std::size_t>(i)]; }
  const std::vector<int>& succs(int i) const { return succs_[static_cast<std::size_t>(i)]; }
  double source_volume() const { return source_volume_; }
  const std::vector<int>& topo_order() const { return topo_; }

  TaskDag with_complexity(double alpha) const {
    auto s = subtasks_;
    for (auto& t : s) t.complexity = alpha;
    return {std::move(s), edges_, source_volume_};
  }
  TaskDag with_source_volume(double bits) const { return {subtasks_, edges_, bits}; }

 private:
  void validate() {
    const int q = size();
    if (q < 1) throw ContractError("task needs at least one subtask");
    if (!(source_volume_ > 0.0) || !std::isfinite(source_volume_)) {
      throw ContractError("source volume must be finite and > 0");
    }
    for (const auto& t : subtasks_) {
      if (!(t.scaling > 0.0 && t.scaling <= 1.0)) throw ContractError("scaling factor must lie in (0, 1]");
      if (!(t.complexity >= 0.0) || !std::isfinite(t.complexity)) {
        throw ContractError("complexity must be finite and >= 0");
      }
    }
    for (int i = 0; i < q; ++i) {
      if (i != 0 && preds(i).empty()) throw ContractError("subtask " + std::to_string(i + 1) + " is a second source");
      if (i != q - 1 && succs(i).empty()) throw ContractError("subtask " + std::to_string(i + 1) + " is a second sink");
    }
    if (q > 1 && (!preds(0).empty() || !succs(q - 1).empty())) {
      throw ContractError("first subtask must be the source and last the sink");
    }
    // Kahn with the smallest ready index first: the canonical order.
    std::vector<int> indeg(static_cast<std::size_t>(q));
    for (int i = 0; i < q; ++i) indeg[static_cast<std::size_t>(i)] = static_cast<int>(preds(i).size());
    std::priority_queue<int, std::vector<int>, std::greater<>> ready;
    for (int i = 0; i < q; ++i) {
      if (indeg[static_cast<std::size_t>(i)] == 0) ready.push(i);
    }
    topo_.clear();
    while (!ready.empty()) {
      const int u = ready.top();
      ready.pop();
      topo_.push_back(u);
      for (int v : succs(u)) {
        if (--indeg[static_cast<std::size_t>(v)] == 0) ready.push(v);
      }
    }
    if (static_cast<int>(topo_.size()) != q) throw ContractError("task graph has a cycle");
  }

  std::vector<Subtask> subtasks_;
  std::vector<std::pair<int, int>> edges_;
  double source_volume_ = 0.0;
  std::vector<std::vector<int>> preds_;
  std::vector<std::vector<int>> succs_;
  std::vector<int> topo_;
};

/// D_j = sum over predecessors of D_i * eta_i, D_1 given.
inline std::vector<double> task_volume(const TaskDag& dag) {
  std::vector<double> volume(static_cast<std::size_t>(dag.size()), 0.0);
  for (int j : dag.topo_order()) {
    if (j == 0) {
      volume[0] = dag.source_volume();
      continue;
    }
    double d = 0.0;
    for (int i : dag.preds(j)) d += volume[static_cast<std::size_t>(i)] * dag.subtask(i).scaling;
    volume[static_cast<std::size_t>(j)] = d;
  }
  return volume;
}

/// UAVs that must host the first and last subtask.
struct Roles {
  int initiator = 0;
  int receiver = -1;  // -1 means the last UAV

  int receiver_of(int uav_count) const { return receiver < 0 ? uav_count - 1 : receiver; }
};

/// A subtask's node run: one UAV over slots start_slot .. start_slot + span.
struct Run {
  int uav = 0;
  int start_slot = 0;
  int span = 0;

  int end_slot() const { return start_slot + span; }
  bool operator==(const Run&) const = default;
};

/// X: q rows, one column per space-time node in (slot, uav) order, plus the
/// declared span rho_i per row.
class MappingDecision {
 public:
  MappingDecision() = default;
  MappingDecision(int subtasks, int uavs, int slots)
      : q_(subtasks), p_(uavs), n_(slots),
        bits_(static_cast<std::size_t>(subtasks) * uavs * slots, 0),
        spans_(static_cast<std::size_t>(subtasks), 0) {}

  int rows() const { return q_; }
  int uav_count() const { return p_; }
  int slot_count() const { return n_; }
  int cols() const { return p_ * n_; }
  static int column(int uav, int slot, int uav_count) { return slot * uav_count + uav; }

  std::uint8_t& bit(int row, int uav, int slot) { return bits_[idx(row, column(uav, slot, p_))]; }
  std::uint8_t bit(int row, int uav, int slot) const { return bits_[idx(row, column(uav, slot, p_))]; }
  std::uint8_t& at(int row, int col) { return bits_[idx(row, col)]; }
  std::uint8_t at(int row, int col) const { return bits_[idx(row, col)]; }

  int declared_span(int row) const { return spans_[static_cast<std::size_t>(row)]; }
  void declare_span(int row, int span) { spans_[static_cast<std::size_t>(row)] = span; }

  int row_sum(int row) const {
    int s = 0;
    for (int c = 0; c < cols(); ++c) s += at(row, c);
    return s;
  }

  void clear_row(int row) {
    std::fill_n(bits_.begin() + static_cast<std::ptrdiff_t>(idx(row, 0)), cols(), std::uint8_t{0});
  }

  void set_run(int row, const Run& run) {
    clear_row(row);
    for (int k = run.start_slot; k <= run.end_slot(); ++k) bit(row, run.uav, k) = 1;
    declare_span(row, run.span);
  }

  /// The run a row encodes, if its set bits are one UAV over consecutive slots.
  std::optional<Run> run(int row) const {
    int uav = -1;
    int first = -1;
    int last = -1;
    for (int k = 0; k < n_; ++k) {
      for (int d = 0; d < p_; ++d) {
        if (!bit(row, d, k)) continue;
        if (uav >= 0 && d != uav) return std::nullopt;
        if (last >= 0 && k != last + 1) return std::nullopt;
        uav = d;
        if (first < 0) first = k;
        last = k;
      }
    }
    if (uav < 0) return std::nullopt;
    return Run{uav, first, last - first};
  }

  bool operator==(const MappingDecision&) const = default;

 private:
  std::size_t idx(int row, int col) const { return static_cast<std::size_t>(row) * cols() + col; }

  int q_ = 0;
  int p_ = 0;
  int n_ = 0;
  std::vector<std::uint8_t> bits_;
  std::vector<int> spans_;
};

/// Admissible runs: the UAV owns the required state, runs fit in the period,
/// the source is pinned to the initiator from slot 1 and the sink to the receiver.
inline std::vector<Run> feasible_runs(int subtask, const TaskDag& dag, const StateCatalog& catalog,
                                      const SlotGrid& grid, const Roles& roles = {}) {
  const int p = catalog.uav_count();
  const int n = grid.slot_count();
  const int type = dag.subtask(subtask).state_type;
  std::vector<Run> runs;
  for (int d = 0; d < p; ++d) {
    if (!ismember(type, {d, 0}, catalog)) continue;
    if (subtask == 0 && d != roles.initiator) continue;
    if (subtask == dag.sink() && d != roles.receiver_of(p)) continue;
    for (int k = 0; k < n; ++k) {
      if (subtask == 0 && k != 0) continue;
      for (int span = 0; k + span < n; ++span) runs.push_back({d, k, span});
    }
  }
  return runs;
}

enum class ViolationKind { shape, binarity, row_sum, run_structure, membership, initiator_pin, receiver_pin };

struct Violation {
  int subtask = -1;
  ViolationKind kind = ViolationKind::shape;
  std::string message;
};

inline std::vector<Violation> check_constraints(const MappingDecision& x, const TaskDag& dag,
                                                const StateCatalog& catalog, const SlotGrid& grid,
                                                const Roles& roles = {}) {
  std::vector<Violation> out;
  const int p = catalog.uav_count();
  const int n = grid.slot_count();
  if (x.rows() != dag.size() || x.uav_count() != p || x.slot_count() != n) {
    out.push_back({-1, ViolationKind::shape, "decision matrix shape does not match task and graph"});
    return out;
  }
  for (int i = 0; i < x.rows(); ++i) {
    const std::string who = "subtask " + std::to_string(i + 1) + ": ";
    bool binary = true;
    for (int c = 0; c < x.cols(); ++c) {
      if (x.at(i, c) > 1) binary = false;
    }
    if (!binary) {
      out.push_back({i, ViolationKind::binarity, who + "entries must be 0 or 1"});
      continue;
    }
    if (x.row_sum(i) != x.declared_span(i) + 1) {
      out.push_back({i, ViolationKind::row_sum, who + "row sum " + std::to_string(x.row_sum(i)) +
                                                    " != span + 1 = " + std::to_string(x.declared_span(i) + 1)});
    }
    const auto run = x.run(i);
    if (!run) {
      if (x.row_sum(i) > 0) out.push_back({i, ViolationKind::run_structure, who + "not one UAV over consecutive slots"});
      continue;
    }
    if (!ismember(dag.subtask(i).state_type, {run->uav, run->start_slot}, catalog)) {
      out.push_back({i, ViolationKind::membership, who + "UAV " + std::to_string(run->uav + 1) +
                                                       " lacks state '" +
                                                       catalog.type_name(dag.subtask(i).state_type) + "'"});
    }
    if (i == 0 && (run->uav != roles.initiator || run->start_slot != 0)) {
      out.push_back({i, ViolationKind::initiator_pin, who + "must start in slot 1 on the initiating UAV"});
    }
    if (i == dag.sink() && run->uav != roles.receiver_of(p)) {
      out.push_back({i, ViolationKind::receiver_pin, who + "must run on the receiving UAV"});
    }
  }
  return out;
}

enum class ComputePolicy { defer, span };

struct EvalOptions {
  ComputePolicy policy = ComputePolicy::defer;
  bool unit_bit_route = false;  // literal max[T + d_unit * D * eta] + D * alpha / C recursion
  Roles roles;
  bool record_routes = true;
};

enum class ScheduleStatus { feasible, constraint_violation, no_route, span_mismatch, horizon_exceeded };

inline const char* to_string(ScheduleStatus s) {
  switch (s) {
    case ScheduleStatus::feasible: return "feasible";
    case ScheduleStatus::constraint_violation: return "constraint_violation";
    case ScheduleStatus::no_route: return "no_route";
    case ScheduleStatus::span_mismatch: return "span_mismatch";
    case ScheduleStatus::horizon_exceeded: return "horizon_exceeded";
  }
  return "?";
}

struct SubtaskTiming {
  Run run;
  double volume = 0.0;
  double ready = 0.0;   // all inputs present at the run's first node
  double start = 0.0;   // computation start
  double finish = 0.0;  // T(phi_i)
};

struct Transfer {
  int from = 0;
  int to = 0;
  double volume = 0.0;
  double depart = 0.0;
  double arrive = 0.0;
  std::vector<StNodeId> path;
};

struct ScheduleResult {
  ScheduleStatus status = ScheduleStatus::feasible;
  double total_latency = kInf;
  std::vector<SubtaskTiming> subtasks;
  std::vector<Transfer> transfers;
  std::vector<double> consumed_time;  // t_i^k, slot-major n*p
  int failed_subtask = -1;
  std::pair<int, int> failed_edge{-1, -1};
  std::string detail;

  bool feasible() const { return status == ScheduleStatus::feasible; }

  bool operator==(const ScheduleResult& o) const {
    if (status != o.status || total_latency != o.total_latency || failed_subtask != o.failed_subtask ||
        failed_edge != o.failed_edge || consumed_time != o.consumed_time ||
        subtasks.size() != o.subtasks.size() || transfers.size() != o.transfers.size()) {
      return false;
    }
    for (std::size_t i = 0; i < subtasks.size(); ++i) {
      const auto& a = subtasks[i];
      const auto& b = o.subtasks[i];
      if (!(a.run == b.run) || a.volume != b.volume || a.ready != b.ready || a.start != b.start || a.finish != b.finish) {
        return false;
      }
    }
    for (std::size_t i = 0; i < transfers.size(); ++i) {
      const auto& a = transfers[i];
      const auto& b = o.transfers[i];
      if (a.from != b.from || a.to != b.to || a.volume != b.volume || a.depart != b.depart || a.arrive != b.arrive ||
          a.path != b.path) {
        return false;
      }
    }
    return true;
  }
};

/// Computation duration D * alpha / C.
inline double compute_time(double volume, double complexity, double capacity) {
  return volume * complexity / capacity;
}

/// Reusable evaluator bound to one task and graph. Holds scratch space, so one
/// instance per thread; the free functions below are pure.
class Evaluator {
 public:
  Evaluator(const TaskDag& dag, const EfsmsGraph& graph, EvalOptions options = {})
      : dag_(&dag), graph_(&graph), options_(options), volume_(task_volume(dag)), router_(graph.base()) {
    if (graph.catalog().uav_count() != graph.base().uav_count()) {
      throw ContractError("catalog does not match graph");
    }
  }

  const TaskDag& dag() const { return *dag_; }
  const EfsmsGraph& graph() const { return *graph_; }
  const EvalOptions& options() const { return options_; }
  const std::vector<double>& volumes() const { return volume_; }

  /// Strict evaluation of X: structure, routes, and declared spans must all hold.
  ScheduleResult evaluate(const MappingDecision& x) {
    const auto violations = check_constraints(x, *dag_, graph_->catalog(), graph_->base().grid(), options_.roles);
    if (!violations.empty()) {
      ScheduleResult r;
      r.status = ScheduleStatus::constraint_violation;
      r.failed_subtask = violations.front().subtask;
      r.detail = violations.front().message;
      return r;
    }
    std::vector<Run> runs;
    for (int i = 0; i < x.rows(); ++i) runs.push_back(*x.run(i));
    if (options_.unit_bit_route) return literal(runs);
    return simulate(runs, true);
  }

  /// Schedules subtasks on the anchors' UAVs, each starting no earlier than its
  /// anchor slot and otherwise as early as routes allow; spans are derived.
  ScheduleResult schedule(const std::vector<Run>& anchors) {
    if (options_.unit_bit_route) return literal(anchors);
    return simulate(anchors, false);
  }

  /// X built from a schedule's runs.
  MappingDecision decision(const ScheduleResult& r) const {
    const auto& base = graph_->base();
    MappingDecision x(dag_->size(), base.uav_count(), base.slot_count());
    for (int i = 0; i < dag_->size(); ++i) x.set_run(i, r.subtasks[static_cast<std::size_t>(i)].run);
    return x;
  }

 private:
  ScheduleResult fail(ScheduleResult r, ScheduleStatus status, int subtask, std::pair<int, int> edge,
                      std::string detail) const {
    r.status = status;
    r.total_latency = kInf;
    r.failed_subtask = subtask;
    r.failed_edge = edge;
    r.detail = std::move(detail);
    return r;
  }

  void add_consumed(std::vector<double>& table, int uav, int slot, double amount) const {
    const auto& grid = graph_->base().grid();
    const int p = graph_->base().uav_count();
    double& t = table[static_cast<std::size_t>(slot) * p + uav];
    t = std::min(grid.slot_length(), t + amount);
  }

  void add_compute(std::vector<double>& table, int uav, double start, double finish) const {
    const auto& grid = graph_->base().grid();
    for (int k = 0; k < grid.slot_count(); ++k) {
      const double lo = std::max(start, grid.slot_begin(k));
      const double hi = std::min(finish, grid.boundary(k));
      if (hi > lo) add_consumed(table, uav, k, hi - lo);
    }
  }

  ScheduleResult simulate(const std::vector<Run>& anchors, bool strict) {
    const auto& base = graph_->base();
    const auto& grid = base.grid();
    const auto& catalog = graph_->catalog();
    const int p = base.uav_count();
    const int n = base.slot_count();
    const int q = dag_->size();

    ScheduleResult r;
    r.subtasks.resize(static_cast<std::size_t>(q));
    r.consumed_time.assign(static_cast<std::size_t>(n) * p, 0.0);
    free_.assign(static_cast<std::size_t>(p), 0.0);

    for (int j : dag_->topo_order()) {
      const Run& anchor = anchors[static_cast<std::size_t>(j)];
      const int d = anchor.uav;
      SubtaskTiming& tj = r.subtasks[static_cast<std::size_t>(j)];
      tj.volume = volume_[static_cast<std::size_t>(j)];
      int k = anchor.start_slot;
      double ready = 0.0;
      // Each input's first slot on UAV d; once there it is cached forward.
      inbound_.clear();
      for (int i : dag_->preds(j)) {
        const auto& ti = r.subtasks[static_cast<std::size_t>(i)];
        const double vol = ti.volume * dag_->subtask(i).scaling;
        const int reach = router_.run(ti.run.uav, ti.run.end_slot(), ti.finish, vol, n - 1, d, ti.run.end_slot());
        if (reach < 0 || (strict && reach > k)) {
          return fail(std::move(r), ScheduleStatus::no_route, j, {i, j},
                      "no route from subtask " + std::to_string(i + 1) + " to subtask " + std::to_string(j + 1));
        }
        Inbound in{i, vol, reach, router_.arrival(d, reach), {}};
        if (options_.record_routes) in.path = router_.path(d, reach);
        inbound_.push_back(std::move(in));
        if (!strict) k = std::max(k, reach);
      }
      for (auto& in : inbound_) {
        const double a = in.reach == k ? in.arrive : grid.boundary(k - 1);
        ready = std::max(ready, a);
        if (options_.record_routes) {
          for (int slot = in.reach + 1; slot <= k; ++slot) in.path.push_back({d, slot});
          const auto& ti = r.subtasks[static_cast<std::size_t>(in.from)];
          Transfer tr{in.from, j, in.volume, ti.finish, a, std::move(in.path)};
          for (std::size_t h = 0; h + 1 < tr.path.size(); ++h) {
            const StNodeId u = tr.path[h];
            const StNodeId v = tr.path[h + 1];
            if (u.slot == v.slot) add_consumed(r.consumed_time, u.uav, u.slot, base.slot(u.slot).at(u.uav, v.uav) * in.volume);
          }
          r.transfers.push_back(std::move(tr));
        }
      }
      const double c = compute_time(tj.volume, dag_->subtask(j).complexity, catalog.capacity(d));
      double start = std::max(ready, free_[static_cast<std::size_t>(d)]);
      int sigma = k;
      while (sigma < n && start >= grid.boundary(sigma)) ++sigma;
      double finish = start + c;
      if (options_.policy == ComputePolicy::defer && start > grid.slot_begin(sigma) && finish > grid.boundary(sigma)) {
        start = grid.boundary(sigma);
        finish = start + c;
      }
      int end = k;
      while (end < n && finish > grid.boundary(end)) ++end;
      tj.run = {d, k, end - k};
      tj.ready = ready;
      tj.start = start;
      tj.finish = finish;
      free_[static_cast<std::size_t>(d)] = finish;
      if (end >= n) {
        return fail(std::move(r), ScheduleStatus::horizon_exceeded, j, {-1, -1},
                    "subtask " + std::to_string(j + 1) + " runs past the last slot");
      }
      if (strict && end - k != anchor.span) {
        return fail(std::move(r), ScheduleStatus::span_mismatch, j, {-1, -1},
                    "subtask " + std::to_string(j + 1) + " spans " + std::to_string(end - k) +
                        " extra slots, declared " + std::to_string(anchor.span));
      }
      add_compute(r.consumed_time, d, start, finish);
    }
    r.total_latency = r.subtasks[static_cast<std::size_t>(dag_->sink())].finish;
    return r;
  }

  // Unit-bit route delay times volume, no slot bookkeeping beyond consumed time.
  ScheduleResult literal(const std::vector<Run>& runs) {
    const auto& base = graph_->base();
    const auto& catalog = graph_->catalog();
    const int p = base.uav_count();
    const int n = base.slot_count();
    ScheduleResult r;
    r.subtasks.resize(static_cast<std::size_t>(dag_->size()));
    r.consumed_time.assign(static_cast<std::size_t>(n) * p, 0.0);
    for (int j : dag_->topo_order()) {
      const Run& run = runs[static_cast<std::size_t>(j)];
      SubtaskTiming& tj = r.subtasks[static_cast<std::size_t>(j)];
      tj.run = run;
      tj.volume = volume_[static_cast<std::size_t>(j)];
      double ready = 0.0;
      if (!dag_->preds(j).empty()) {
        const SpaceTimeGraph g = with_consumed_time(base, r.consumed_time);
        for (int i : dag_->preds(j)) {
          const auto& ti = r.subtasks[static_cast<std::size_t>(i)];
          const double vol = ti.volume * dag_->subtask(i).scaling;
          const auto route = shortest_route(g, StNodeId{ti.run.uav, ti.run.end_slot()},
                                            StNodeId{run.uav, run.start_slot}, 1.0);
          if (!route) {
            return fail(std::move(r), ScheduleStatus::no_route, j, {i, j},
                        "no route from subtask " + std::to_string(i + 1) + " to subtask " + std::to_string(j + 1));
          }
          const double a = ti.finish + route->delay * vol;
          ready = std::max(ready, a);
          if (options_.record_routes) {
            Transfer tr{i, j, vol, ti.finish, a, {}};
            for (int node : route->nodes) tr.path.push_back(base.node_id(node));
            r.transfers.push_back(std::move(tr));
          }
        }
      }
      const double c = compute_time(tj.volume, dag_->subtask(j).complexity, catalog.capacity(run.uav));
      tj.ready = ready;
      tj.start = ready;
      tj.finish = ready + c;
      add_consumed(r.consumed_time, run.uav, run.start_slot, c);
    }
    r.total_latency = r.subtasks[static_cast<std::size_t>(dag_->sink())].finish;
    return r;
  }

  const TaskDag* dag_;
  const EfsmsGraph* graph_;
  EvalOptions options_;
  std::vector<double> volume_;
  struct Inbound {
    int from;
    double volume;
    int reach;
    double arrive;
    std::vector<StNodeId> path;
  };

  TimedRouter router_;
  std::vector<double> free_;
  std::vector<Inbound> inbound_;
};

inline ScheduleResult evaluate(const MappingDecision& x, const TaskDag& dag, const EfsmsGraph& graph,
                               const EvalOptions& options = {}) {
  Evaluator ev(dag, graph, options);
  return ev.evaluate(x);
}

/// Feasible-by-construction X for the given per-subtask UAVs, every subtask at
/// its earliest slot. nullopt when the resulting schedule is infeasible.
inline std::pair<std::optional<MappingDecision>, ScheduleResult> place_on_uavs(const std::vector<int>& uavs,
                                                                               const TaskDag& dag,
                                                                               const EfsmsGraph& graph,
                                                                               const EvalOptions& options = {}) {
  Evaluator ev(dag, graph, options);
  std::vector<Run> anchors;
  for (int d : uavs) anchors.push_back({d, 0, 0});
  ScheduleResult r = ev.schedule(anchors);
  if (!r.feasible()) return {std::nullopt, std::move(r)};
  return {ev.decision(r), std::move(r)};
}

/// State types used by the built-in task shapes, in catalog order.
inline const std::vector<std::string>& standard_state_types() {
  static const std::vector<std::string> names{"capture", "preprocess", "analyze", "compress", "transmit"};
  return names;
}

namespace detail {
inline TaskDag make_task(const std::vector<std::pair<std::string, int>>& nodes,
                         std::vector<std::pair<int, int>> edges, double input_bits, double alpha, double eta) {
  std::vector<Subtask> subtasks;
  for (const auto& [name, type] : nodes) subtasks.push_back({name, type, alpha, eta});
  return {std::move(subtasks), std::move(edges), input_bits};
}
}  // namespace detail

// Stand-in topologies: capture, a fork/join body and a final transmit stage.

inline TaskDag image_processing_task(double input_bits, double alpha = 150.0, double eta = 0.8) {
  return detail::make_task({{"capture", 0}, {"denoise", 1}, {"segment", 2}, {"classify", 2}, {"encode", 3}, {"send", 4}},
                           {{0, 1}, {1, 2}, {1, 3}, {2, 4}, {3, 4}, {4, 5}}, input_bits, alpha, eta);
}

inline TaskDag remote_sensing_task(double input_bits, double alpha = 100.0, double eta = 0.8) {
  return detail::make_task({{"capture", 0}, {"radiometric", 1}, {"geometric", 1}, {"features", 2}, {"change", 2},
                            {"fuse", 3}, {"send", 4}},
                           {{0, 1}, {0, 2}, {1, 3}, {2, 4}, {3, 5}, {4, 5}, {5, 6}}, input_bits, alpha, eta);
}

inline TaskDag fire_detection_task(double input_bits, double alpha = 200.0, double eta = 0.8) {
  return detail::make_task({{"capture", 0}, {"calibrate", 1}, {"smoke", 2}, {"flame", 2}, {"thermal", 2},
                            {"track", 2}, {"send", 4}},
                           {{0, 1}, {1, 2}, {1, 3}, {1, 4}, {2, 5}, {3, 5}, {4, 5}, {5, 6}}, input_bits, alpha, eta);
}

/// Built-in task by name: image_processing, remote_sensing, fire_detection.
inline std::optional<TaskDag> generate_task(const std::string& name, double input_bits, std::optional<double> alpha,
                                            double eta = 0.8) {
  if (name == "image_processing") return image_processing_task(input_bits, alpha.value_or(150.0), eta);
  if (name == "remote_sensing") return remote_sensing_task(input_bits, alpha.value_or(100.0), eta);
  if (name == "fire_detection") return fire_detection_task(input_bits, alpha.value_or(200.0), eta);
  return std::nullopt;
}

}  // namespace fpc
