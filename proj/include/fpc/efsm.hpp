#pragma once

// Per-UAV finite state machines and the state-extended space-time graph.
// Each UAV-slot node gains one node per processing state the UAV owns; the
// entry edge carries the state's unit-bit compute cost, exit/transition/carry
// edges are free.

#include <algorithm>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "fpc/error.hpp"
#include "fpc/stgraph.hpp"

namespace fpc {

struct FsmTransition {
  std::string from;
  std::string trigger;
  std::string to;
};

/// (Q, E, delta, q0, O). Triggers never enter the latency model.
struct FsmSpec {
  std::vector<std::string> states;
  std::vector<std::string> triggers;
  std::vector<FsmTransition> transitions;
  std::string initial;
  std::vector<std::string> terminals;
};

struct FsmReport {
  bool initial_missing = false;
  bool no_terminals = false;
  std::vector<std::string> unknown_terminals;
  std::vector<std::string> dangling;  // transitions naming a state or trigger outside Q / E
  std::vector<std::string> unreachable;

  bool valid() const {
    return !initial_missing && !no_terminals && unknown_terminals.empty() && dangling.empty() && unreachable.empty();
  }

  std::string to_text() const {
    std::ostringstream os;
    if (valid()) {
      os << "valid\n";
      return os.str();
    }
    if (initial_missing) os << "initial state is not in the state set\n";
    if (no_terminals) os << "terminal set is empty\n";
    for (const auto& s : unknown_terminals) os << "terminal state not in state set: " << s << '\n';
    for (const auto& s : dangling) os << "dangling transition: " << s << '\n';
    for (const auto& s : unreachable) os << "unreachable state: " << s << '\n';
    return os.str();
  }
};

inline FsmReport validate_fsm(const FsmSpec& spec) {
  FsmReport report;
  const std::set<std::string> q(spec.states.begin(), spec.states.end());
  const std::set<std::string> e(spec.triggers.begin(), spec.triggers.end());
  report.initial_missing = !q.contains(spec.initial);
  report.no_terminals = spec.terminals.empty();
  for (const auto& t : spec.terminals) {
    if (!q.contains(t)) report.unknown_terminals.push_back(t);
  }
  std::map<std::string, std::vector<std::string>> next;
  for (const auto& tr : spec.transitions) {
    if (!q.contains(tr.from) || !q.contains(tr.to) || (!e.empty() && !e.contains(tr.trigger))) {
      report.dangling.push_back(tr.from + " --" + tr.trigger + "--> " + tr.to);
      continue;
    }
    next[tr.from].push_back(tr.to);
  }
  std::set<std::string> seen;
  if (!report.initial_missing) {
    std::vector<std::string> stack{spec.initial};
    seen.insert(spec.initial);
    while (!stack.empty()) {
      const std::string s = stack.back();
      stack.pop_back();
      for (const auto& t : next[s]) {
        if (seen.insert(t).second) stack.push_back(t);
      }
    }
  }
  for (const auto& s : spec.states) {
    if (!seen.contains(s)) report.unreachable.push_back(s);
  }
  return report;
}

/// The simple image-processing machine: capture -> preprocess -> compress -> transmit.
inline FsmSpec image_processing_fsm() {
  return {{"capture", "preprocess", "compress", "transmit"},
          {"frame_ready", "filtered", "encoded"},
          {{"capture", "frame_ready", "preprocess"},
           {"preprocess", "filtered", "compress"},
           {"compress", "encoded", "transmit"}},
          "capture",
          {"transmit"}};
}

/// State types, which UAV owns which, and unit-bit compute costs ct_il.
class StateCatalog {
 public:
  StateCatalog() = default;
  StateCatalog(std::vector<std::string> type_names, std::vector<double> capacity_hz)
      : names_(std::move(type_names)),
        capacity_(std::move(capacity_hz)),
        cost_(capacity_.size() * names_.size()) {
    for (double c : capacity_) {
      if (!(c > 0.0)) throw ContractError("UAV compute capacity must be > 0");
    }
  }

  int type_count() const { return static_cast<int>(names_.size()); }
  int uav_count() const { return static_cast<int>(capacity_.size()); }
  const std::vector<std::string>& type_names() const { return names_; }
  const std::string& type_name(int type) const { return names_.at(static_cast<std::size_t>(type)); }
  double capacity(int uav) const { return capacity_.at(static_cast<std::size_t>(uav)); }
  const std::vector<double>& capacities() const { return capacity_; }

  int type_index(const std::string& name) const {
    const auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) throw ContractError("unknown state type '" + name + "'");
    return static_cast<int>(it - names_.begin());
  }

  void set_cost(int uav, int type, double unit_bit_cost) {
    check(uav, type);
    if (!(unit_bit_cost > 0.0)) throw ContractError("unit-bit cost must be > 0");
    cost_[idx(uav, type)] = unit_bit_cost;
  }

  /// ct = complexity / C_i for the given UAV.
  void grant(int uav, int type, double complexity_cycles_per_bit) {
    set_cost(uav, type, complexity_cycles_per_bit / capacity(uav));
  }

  void revoke(int uav, int type) {
    check(uav, type);
    cost_[idx(uav, type)].reset();
  }

  bool has(int uav, int type) const {
    check(uav, type);
    return cost_[idx(uav, type)].has_value();
  }

  std::optional<double> unit_bit_cost(int uav, int type) const {
    check(uav, type);
    return cost_[idx(uav, type)];
  }

  std::vector<int> types_of(int uav) const {
    std::vector<int> out;
    for (int l = 0; l < type_count(); ++l) {
      if (has(uav, l)) out.push_back(l);
    }
    return out;
  }

  std::vector<int> members_of(int type) const {
    std::vector<int> out;
    for (int i = 0; i < uav_count(); ++i) {
      if (has(i, type)) out.push_back(i);
    }
    return out;
  }

 private:
  void check(int uav, int type) const {
    if (uav < 0 || uav >= uav_count()) throw ContractError("UAV index out of range");
    if (type < 0 || type >= type_count()) throw ContractError("unknown state type index " + std::to_string(type));
  }
  std::size_t idx(int uav, int type) const { return static_cast<std::size_t>(uav) * names_.size() + type; }

  std::vector<std::string> names_;
  std::vector<double> capacity_;
  std::vector<std::optional<double>> cost_;
};

/// Membership is a hardware property, so the answer does not depend on the slot.
inline bool ismember(int state_type, StNodeId node, const StateCatalog& catalog) {
  return catalog.has(node.uav, state_type);
}

class EfsmsGraph {
 public:
  const SpaceTimeGraph& base() const { return base_; }
  const StateCatalog& catalog() const { return catalog_; }
  const Digraph& digraph() const { return graph_; }
  int node_count() const { return graph_.node_count(); }
  int state_node_count() const { return node_count() - base_.node_count(); }

  int node_index(StNodeId id) const { return base_.node_index(id); }

  std::optional<int> state_node(int uav, int slot, int type) const {
    const auto it = state_index_.find({slot, uav, type});
    if (it == state_index_.end()) return std::nullopt;
    return it->second;
  }

  /// Describes a node as "uav,slot" (1-based), state nodes as "uav:type_name,slot".
  std::string label(int index) const {
    if (index < base_.node_count()) {
      const StNodeId id = base_.node_id(index);
      return std::to_string(id.uav + 1) + ',' + std::to_string(id.slot + 1);
    }
    const auto& [slot, uav, type] = state_key_[static_cast<std::size_t>(index - base_.node_count())];
    return std::to_string(uav + 1) + ':' + catalog_.type_name(type) + ',' + std::to_string(slot + 1);
  }

  friend EfsmsGraph build_efsmsg(const SpaceTimeGraph& base, const StateCatalog& catalog,
                                 const std::vector<FsmSpec>& fsms);

 private:
  using Key = std::tuple<int, int, int>;  // slot, uav, type
  SpaceTimeGraph base_;
  StateCatalog catalog_;
  Digraph graph_;
  std::map<Key, int> state_index_;
  std::vector<Key> state_key_;
};

/// fsms may be empty (no state-transition edges) or hold one machine per UAV;
/// when present, every owned state type must be a state of that UAV's machine.
inline EfsmsGraph build_efsmsg(const SpaceTimeGraph& base, const StateCatalog& catalog,
                               const std::vector<FsmSpec>& fsms = {}) {
  const int p = base.uav_count();
  const int n = base.slot_count();
  if (catalog.uav_count() != p) throw ContractError("state catalog does not cover every UAV");
  if (!fsms.empty() && static_cast<int>(fsms.size()) != p) {
    throw ContractError("need one FSM per UAV or none");
  }
  std::vector<std::vector<std::pair<int, int>>> transitions(static_cast<std::size_t>(p));
  if (!fsms.empty()) {
    for (int i = 0; i < p; ++i) {
      const FsmSpec& fsm = fsms[static_cast<std::size_t>(i)];
      const std::set<std::string> q(fsm.states.begin(), fsm.states.end());
      for (int l : catalog.types_of(i)) {
        if (!q.contains(catalog.type_name(l))) {
          throw ContractError("UAV " + std::to_string(i + 1) + " owns state '" + catalog.type_name(l) +
                              "' missing from its FSM");
        }
      }
      for (const auto& tr : fsm.transitions) {
        const auto& names = catalog.type_names();
        const auto a = std::find(names.begin(), names.end(), tr.from);
        const auto b = std::find(names.begin(), names.end(), tr.to);
        if (a == names.end() || b == names.end() || a == b) continue;
        const int la = static_cast<int>(a - names.begin());
        const int lb = static_cast<int>(b - names.begin());
        if (catalog.has(i, la) && catalog.has(i, lb)) transitions[static_cast<std::size_t>(i)].push_back({la, lb});
      }
      std::sort(transitions[static_cast<std::size_t>(i)].begin(), transitions[static_cast<std::size_t>(i)].end());
      transitions[static_cast<std::size_t>(i)].erase(
          std::unique(transitions[static_cast<std::size_t>(i)].begin(), transitions[static_cast<std::size_t>(i)].end()),
          transitions[static_cast<std::size_t>(i)].end());
    }
  }

  EfsmsGraph g;
  g.base_ = base;
  g.catalog_ = catalog;
  g.graph_ = base.digraph();
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < p; ++i) {
      for (int l : catalog.types_of(i)) {
        const int idx = g.graph_.node_count();
        g.graph_.add_node();
        g.state_index_[{k, i, l}] = idx;
        g.state_key_.push_back({k, i, l});
      }
    }
  }
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < p; ++i) {
      const int u = base.node_index({i, k});
      for (int l : catalog.types_of(i)) {
        const int f = *g.state_node(i, k, l);
        g.graph_.add_edge({u, f, EdgeKind::state_entry, *catalog.unit_bit_cost(i, l)});
        g.graph_.add_edge({f, u, EdgeKind::state_exit, 0.0});
      }
      for (const auto& [la, lb] : transitions[static_cast<std::size_t>(i)]) {
        g.graph_.add_edge({*g.state_node(i, k, la), *g.state_node(i, k, lb), EdgeKind::state_transition, 0.0});
      }
    }
  }
  for (int k = 0; k < n; ++k) {
    const int next = (k + 1) % n;
    for (int i = 0; i < p; ++i) {
      for (int l : catalog.types_of(i)) {
        g.graph_.add_edge({*g.state_node(i, k, l), *g.state_node(i, next, l), EdgeKind::state_carry, 0.0});
      }
    }
  }
  return g;
}

inline std::optional<Route> shortest_route(const EfsmsGraph& g, int src, int dst, double volume) {
  return shortest_route(g.digraph(), src, dst, volume);
}

inline std::optional<Route> shortest_route(const EfsmsGraph& g, StNodeId src, StNodeId dst, double volume) {
  return shortest_route(g.digraph(), g.node_index(src), g.node_index(dst), volume);
}

inline void dump_edges(std::ostream& os, const EfsmsGraph& g) {
  os << "# from_uav,from_slot,to_uav,to_slot,kind,weight  (state nodes as uav:state)\n";
  for (const StEdge& e : g.digraph().edges()) {
    os << g.label(e.from) << ',' << g.label(e.to) << ',' << to_string(e.kind) << ',';
    write_weight(os, e.weight);
    os << '\n';
  }
}

}  // namespace fpc
