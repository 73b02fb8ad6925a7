#pragma once

// Space-time graph of the swarm: every UAV replicated once per slot, with
// per-bit transmission edges inside a slot, fixed-weight cache edges between
// consecutive slots of the same UAV, and wrap edges closing the period.
//
// Indices are 0-based throughout the C++ API; text dumps are 1-based.

#include <algorithm>
#include <compare>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <queue>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fpc/channel.hpp"
#include "fpc/error.hpp"
#include "fpc/geometry.hpp"

namespace fpc {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct StNodeId {
  int uav = 0;
  int slot = 0;
  auto operator<=>(const StNodeId&) const = default;
};

enum class EdgeKind {
  transmission,      // UAV -> UAV within a slot, weight in s/bit
  cache,             // UAV slot k -> same UAV slot k+1, weight in s
  wrap,              // UAV slot n -> same UAV slot 1, weight in s
  state_entry,       // UAV -> own state node, weight in s/bit
  state_exit,        // state node -> own UAV, 0
  state_transition,  // state node -> state node of the same UAV and slot, 0
  state_carry,       // state node slot k -> same state node slot k+1 (or wrap), 0
};

inline bool is_per_bit(EdgeKind kind) {
  return kind == EdgeKind::transmission || kind == EdgeKind::state_entry;
}

inline const char* to_string(EdgeKind kind) {
  switch (kind) {
    case EdgeKind::transmission: return "transmission";
    case EdgeKind::cache: return "cache";
    case EdgeKind::wrap: return "wrap";
    case EdgeKind::state_entry: return "state_entry";
    case EdgeKind::state_exit: return "state_exit";
    case EdgeKind::state_transition: return "state_transition";
    case EdgeKind::state_carry: return "state_carry";
  }
  return "?";
}

struct StEdge {
  int from = 0;
  int to = 0;
  EdgeKind kind = EdgeKind::transmission;
  double weight = 0.0;

  double cost(double volume) const { return is_per_bit(kind) ? weight * volume : weight; }
  bool operator==(const StEdge&) const = default;
};

class Digraph {
 public:
  Digraph() = default;
  explicit Digraph(int node_count) : out_(static_cast<std::size_t>(node_count)) {}

  int node_count() const { return static_cast<int>(out_.size()); }
  const std::vector<StEdge>& edges() const { return edges_; }
  const std::vector<int>& out_edges(int node) const { return out_[static_cast<std::size_t>(node)]; }

  void add_node() { out_.emplace_back(); }

  void add_edge(const StEdge& e) {
    if (e.from < 0 || e.from >= node_count() || e.to < 0 || e.to >= node_count()) {
      throw ContractError("edge endpoint out of range");
    }
    if (!(e.weight >= 0.0)) throw ContractError("edge weights must be >= 0");
    out_[static_cast<std::size_t>(e.from)].push_back(static_cast<int>(edges_.size()));
    edges_.push_back(e);
  }

 private:
  std::vector<StEdge> edges_;
  std::vector<std::vector<int>> out_;
};

/// One slot's transmission block: entry (i, j) is the unit-bit delay of link
/// i -> j, +inf when the link is absent. The diagonal is 0 and carries no edge.
class SlotMatrix {
 public:
  SlotMatrix() = default;
  explicit SlotMatrix(int uav_count)
      : uav_count_(uav_count), delay_(static_cast<std::size_t>(uav_count) * uav_count, kInf) {
    for (int i = 0; i < uav_count; ++i) delay_[idx(i, i)] = 0.0;
  }

  int uav_count() const { return uav_count_; }
  bool has_link(int i, int j) const { return i != j && delay_[idx(i, j)] < kInf; }
  double at(int i, int j) const { return delay_[idx(i, j)]; }
  std::optional<double> entry(int i, int j) const {
    if (!has_link(i, j)) return std::nullopt;
    return delay_[idx(i, j)];
  }
  void set(int i, int j, double unit_bit_delay) {
    if (i == j) throw ContractError("no self transmission edge");
    delay_[idx(i, j)] = unit_bit_delay;
  }
  void clear(int i, int j) {
    if (i != j) delay_[idx(i, j)] = kInf;
  }

 private:
  std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i) * uav_count_ + j; }
  int uav_count_ = 0;
  std::vector<double> delay_;
};

/// Diagonal of an inter-slot block: cache weight per UAV.
using CacheBlock = std::vector<double>;

inline SlotMatrix build_slot_matrix(std::span<const Position3> positions, const ChannelParams& params) {
  const int p = static_cast<int>(positions.size());
  SlotMatrix m(p);
  for (int i = 0; i < p; ++i) {
    for (int j = i + 1; j < p; ++j) {
      const double d = distance(positions[i], positions[j]);
      if (!(d > 0.0)) throw DomainError("co-located UAVs " + std::to_string(i + 1) + " and " +
                                        std::to_string(j + 1) + " have no channel model");
      const LinkMetrics link = link_metrics(d, params);
      if (link.connected) {
        m.set(i, j, link.unit_bit_delay);
        m.set(j, i, link.unit_bit_delay);
      }
    }
  }
  return m;
}

inline CacheBlock build_interslot(std::span<const double> consumed, const SlotGrid& grid) {
  const double dt = grid.slot_length();
  CacheBlock block;
  block.reserve(consumed.size());
  for (double t : consumed) {
    if (!(t >= 0.0 && t <= dt)) throw ContractError("consumed time must lie in [0, slot_length]");
    block.push_back(dt - t);
  }
  return block;
}

class SpaceTimeGraph {
 public:
  SpaceTimeGraph() = default;

  const SlotGrid& grid() const { return grid_; }
  int uav_count() const { return uav_count_; }
  int slot_count() const { return grid_.slot_count(); }
  int node_count() const { return graph_.node_count(); }

  int node_index(StNodeId id) const {
    if (id.uav < 0 || id.uav >= uav_count_ || id.slot < 0 || id.slot >= slot_count()) {
      throw ContractError("space-time node out of range");
    }
    return id.slot * uav_count_ + id.uav;
  }
  StNodeId node_id(int index) const { return {index % uav_count_, index / uav_count_}; }

  const Digraph& digraph() const { return graph_; }
  const SlotMatrix& slot(int k) const { return slots_[static_cast<std::size_t>(k)]; }
  const CacheBlock& interslot(int k) const { return interslots_[static_cast<std::size_t>(k)]; }

  /// t_i^k recovered from the cache weights.
  double consumed_time(int uav, int k) const {
    return grid_.slot_length() - interslots_[static_cast<std::size_t>(k)][static_cast<std::size_t>(uav)];
  }

  friend SpaceTimeGraph assemble(const SlotGrid& grid, std::vector<SlotMatrix> slots,
                                 std::vector<CacheBlock> interslots);

 private:
  SlotGrid grid_;
  int uav_count_ = 0;
  std::vector<SlotMatrix> slots_;
  std::vector<CacheBlock> interslots_;
  Digraph graph_;
};

/// Block-upper-bidiagonal assembly with the periodic wrap block n -> 1.
/// interslots[k] connects slot k to slot k+1; the last one is the wrap block.
inline SpaceTimeGraph assemble(const SlotGrid& grid, std::vector<SlotMatrix> slots,
                               std::vector<CacheBlock> interslots) {
  const int n = grid.slot_count();
  if (static_cast<int>(slots.size()) != n || static_cast<int>(interslots.size()) != n) {
    throw ContractError("assemble needs exactly one slot block and one inter-slot block per slot");
  }
  const int p = slots.front().uav_count();
  for (int k = 0; k < n; ++k) {
    if (slots[static_cast<std::size_t>(k)].uav_count() != p ||
        static_cast<int>(interslots[static_cast<std::size_t>(k)].size()) != p) {
      throw ContractError("block dimension mismatch in slot " + std::to_string(k + 1));
    }
    for (double w : interslots[static_cast<std::size_t>(k)]) {
      if (!(w >= 0.0 && w <= grid.slot_length())) throw ContractError("cache weight outside [0, slot_length]");
    }
  }
  SpaceTimeGraph g;
  g.grid_ = grid;
  g.uav_count_ = p;
  g.graph_ = Digraph(p * n);
  for (int k = 0; k < n; ++k) {
    const auto& m = slots[static_cast<std::size_t>(k)];
    for (int i = 0; i < p; ++i) {
      for (int j = 0; j < p; ++j) {
        if (m.has_link(i, j)) g.graph_.add_edge({k * p + i, k * p + j, EdgeKind::transmission, m.at(i, j)});
      }
    }
  }
  for (int k = 0; k < n; ++k) {
    const int next = (k + 1) % n;
    const EdgeKind kind = k + 1 < n ? EdgeKind::cache : EdgeKind::wrap;
    for (int i = 0; i < p; ++i) {
      g.graph_.add_edge({k * p + i, next * p + i, kind, interslots[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)]});
    }
  }
  g.slots_ = std::move(slots);
  g.interslots_ = std::move(interslots);
  return g;
}

/// Builds every slot from sampled fleet positions with the given consumed-time
/// table (slot-major, n*p entries; empty means all zero).
inline SpaceTimeGraph build_space_time_graph(const PositionTable& positions, const ChannelParams& params,
                                             const SlotGrid& grid, std::span<const double> consumed = {}) {
  const int n = grid.slot_count();
  if (static_cast<int>(positions.size()) != n) throw ContractError("position table does not match slot grid");
  const auto p = positions.front().size();
  if (!consumed.empty() && consumed.size() != p * static_cast<std::size_t>(n)) {
    throw ContractError("consumed-time table has wrong shape");
  }
  std::vector<SlotMatrix> slots;
  std::vector<CacheBlock> interslots;
  const std::vector<double> zeros(p, 0.0);
  for (int k = 0; k < n; ++k) {
    slots.push_back(build_slot_matrix(positions[static_cast<std::size_t>(k)], params));
    interslots.push_back(build_interslot(consumed.empty() ? std::span<const double>(zeros)
                                                          : consumed.subspan(static_cast<std::size_t>(k) * p, p),
                                         grid));
  }
  return assemble(grid, std::move(slots), std::move(interslots));
}

/// Same topology with the cache/wrap weights recomputed from a new consumed-time table.
inline SpaceTimeGraph with_consumed_time(const SpaceTimeGraph& g, std::span<const double> consumed) {
  const auto p = static_cast<std::size_t>(g.uav_count());
  if (consumed.size() != p * static_cast<std::size_t>(g.slot_count())) {
    throw ContractError("consumed-time table has wrong shape");
  }
  std::vector<SlotMatrix> slots;
  std::vector<CacheBlock> interslots;
  for (int k = 0; k < g.slot_count(); ++k) {
    slots.push_back(g.slot(k));
    interslots.push_back(build_interslot(consumed.subspan(static_cast<std::size_t>(k) * p, p), g.grid()));
  }
  return assemble(g.grid(), std::move(slots), std::move(interslots));
}

struct Route {
  std::vector<int> nodes;  // node indices, src first
  std::vector<int> edges;  // edge indices, one fewer than nodes
  double delay = 0.0;
};

/// Re-sums a route's edge costs left to right.
inline double route_delay(const Digraph& g, std::span<const int> edges, double volume) {
  double total = 0.0;
  for (int e : edges) total += g.edges()[static_cast<std::size_t>(e)].cost(volume);
  return total;
}

/// Minimum-delay route; per-bit edges cost weight*volume, the rest their fixed
/// weight. Equal-delay routes resolve to the lexicographically smallest node
/// sequence. Returns nullopt when dst is unreachable.
inline std::optional<Route> shortest_route(const Digraph& g, int src, int dst, double volume) {
  if (src < 0 || src >= g.node_count() || dst < 0 || dst >= g.node_count()) {
    throw ContractError("route endpoint out of range");
  }
  if (!(volume > 0.0)) throw ContractError("route volume must be > 0");
  if (src == dst) return Route{{src}, {}, 0.0};

  struct Label {
    double delay = kInf;
    std::vector<int> nodes;
    std::vector<int> edges;
  };
  // Ordering on (delay, node sequence) is total and strictly increased by any
  // extension, so label-setting in this order is exact.
  using Key = std::pair<double, std::vector<int>>;
  std::vector<Label> best(static_cast<std::size_t>(g.node_count()));
  std::vector<char> settled(static_cast<std::size_t>(g.node_count()), 0);
  std::set<Key> frontier;
  best[static_cast<std::size_t>(src)] = {0.0, {src}, {}};
  frontier.insert({0.0, {src}});
  while (!frontier.empty()) {
    const Key top = *frontier.begin();
    frontier.erase(frontier.begin());
    const int u = top.second.back();
    if (settled[static_cast<std::size_t>(u)]) continue;
    settled[static_cast<std::size_t>(u)] = 1;
    if (u == dst) break;
    const Label& lu = best[static_cast<std::size_t>(u)];
    for (int ei : g.out_edges(u)) {
      const StEdge& e = g.edges()[static_cast<std::size_t>(ei)];
      if (settled[static_cast<std::size_t>(e.to)]) continue;
      const double cand = lu.delay + e.cost(volume);
      Label& lv = best[static_cast<std::size_t>(e.to)];
      std::vector<int> nodes = lu.nodes;
      nodes.push_back(e.to);
      if (cand < lv.delay || (cand == lv.delay && nodes < lv.nodes)) {
        if (lv.delay < kInf) frontier.erase({lv.delay, lv.nodes});
        std::vector<int> edges = lu.edges;
        edges.push_back(ei);
        lv = {cand, std::move(nodes), std::move(edges)};
        frontier.insert({lv.delay, lv.nodes});
      }
    }
  }
  const Label& ld = best[static_cast<std::size_t>(dst)];
  if (!(ld.delay < kInf)) return std::nullopt;
  return Route{ld.nodes, ld.edges, ld.delay};
}

inline std::optional<Route> shortest_route(const SpaceTimeGraph& g, StNodeId src, StNodeId dst, double volume) {
  return shortest_route(g.digraph(), g.node_index(src), g.node_index(dst), volume);
}

/// Time-dependent earliest arrival on the slot topology. Data of `volume` bits
/// sits on (uav, slot) from absolute time `ready`. A transmission in slot k
/// must complete by the end of slot k; otherwise data waits on a cache edge,
/// whose weight is the remainder of the slot (slot_length - consumed offset).
/// Slots beyond the period are unrolled onto the periodic topology.
class TimedRouter {
 public:
  explicit TimedRouter(const SpaceTimeGraph& g) : g_(&g) {}

  void run(int uav, int slot, double ready, double volume, int last_slot) { run(uav, slot, ready, volume, last_slot, -1, 0); }

  /// As run(), but stops after the first slot >= target_from in which
  /// target_uav is reached; later slots would only cache it forward. Returns
  /// that slot, or -1 if the target is never reached (or no target given).
  int run(int uav, int slot, double ready, double volume, int last_slot, int target_uav, int target_from) {
    const int p = g_->uav_count();
    const SlotGrid& grid = g_->grid();
    first_slot_ = slot;
    slot_span_ = std::max(0, last_slot - slot + 1);
    arrival_.assign(static_cast<std::size_t>(slot_span_) * p, kInf);
    pred_.assign(static_cast<std::size_t>(slot_span_) * p, -1);
    settled_.resize(static_cast<std::size_t>(p));
    if (slot_span_ == 0) return -1;
    arrival_[static_cast<std::size_t>(uav)] = ready;
    for (int s = 0; s < slot_span_; ++s) {
      const int abs_slot = first_slot_ + s;
      const SlotMatrix& m = g_->slot(abs_slot % g_->slot_count());
      const double deadline = grid.boundary(abs_slot);
      double* label = arrival_.data() + static_cast<std::size_t>(s) * p;
      int* pred = pred_.data() + static_cast<std::size_t>(s) * p;
      if (s > 0) {
        const double* prev = label - p;
        for (int i = 0; i < p; ++i) {
          if (prev[i] < kInf) {
            label[i] = grid.boundary(abs_slot - 1);
            pred[i] = (s - 1) * p + i;
          }
        }
      }
      std::fill(settled_.begin(), settled_.end(), 0);
      for (;;) {
        int u = -1;
        for (int i = 0; i < p; ++i) {
          if (!settled_[static_cast<std::size_t>(i)] && label[i] < kInf && (u < 0 || label[i] < label[u])) u = i;
        }
        if (u < 0) break;
        settled_[static_cast<std::size_t>(u)] = 1;
        for (int j = 0; j < p; ++j) {
          if (settled_[static_cast<std::size_t>(j)] || !m.has_link(u, j)) continue;
          const double t = label[u] + m.at(u, j) * volume;
          if (t <= deadline && t < label[j]) {
            label[j] = t;
            pred[j] = s * p + u;
          }
        }
      }
      if (target_uav >= 0 && abs_slot >= target_from && label[target_uav] < kInf) {
        slot_span_ = s + 1;
        return abs_slot;
      }
    }
    return -1;
  }

  /// Earliest arrival at (uav, slot) or +inf.
  double arrival(int uav, int slot) const {
    const int s = slot - first_slot_;
    if (s < 0 || s >= slot_span_) return kInf;
    return arrival_[static_cast<std::size_t>(s) * g_->uav_count() + uav];
  }

  /// Earliest slot in [from_slot, last_slot] in which uav is reached, or -1.
  int first_reached_slot(int uav, int from_slot) const {
    for (int slot = std::max(from_slot, first_slot_); slot < first_slot_ + slot_span_; ++slot) {
      if (arrival(uav, slot) < kInf) return slot;
    }
    return -1;
  }

  /// Node sequence (slots unrolled) ending at (uav, slot).
  std::vector<StNodeId> path(int uav, int slot) const {
    std::vector<StNodeId> out;
    const int p = g_->uav_count();
    if (arrival(uav, slot) == kInf) return out;
    int cur = (slot - first_slot_) * p + uav;
    while (cur >= 0) {
      out.push_back({cur % p, first_slot_ + cur / p});
      cur = pred_[static_cast<std::size_t>(cur)];
    }
    std::reverse(out.begin(), out.end());
    return out;
  }

 private:
  const SpaceTimeGraph* g_;
  int first_slot_ = 0;
  int slot_span_ = 0;
  std::vector<double> arrival_;
  std::vector<int> pred_;
  std::vector<char> settled_;
};

inline void write_weight(std::ostream& os, double w) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", w);
  os << buf;
}

/// Plain-text edge list: from_uav,from_slot,to_uav,to_slot,kind,weight (1-based).
inline void dump_edges(std::ostream& os, const SpaceTimeGraph& g) {
  os << "# from_uav,from_slot,to_uav,to_slot,kind,weight\n";
  for (const StEdge& e : g.digraph().edges()) {
    const StNodeId a = g.node_id(e.from);
    const StNodeId b = g.node_id(e.to);
    os << a.uav + 1 << ',' << a.slot + 1 << ',' << b.uav + 1 << ',' << b.slot + 1 << ',' << to_string(e.kind) << ',';
    write_weight(os, e.weight);
    os << '\n';
  }
}

}  // namespace fpc
