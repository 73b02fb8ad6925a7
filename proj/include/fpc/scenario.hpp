#pragma once

// JSON scenario files. Random ranges are expanded with the scenario seed into
// concrete per-UAV values; Scenario::expanded keeps those values so a run can
// be reproduced from the expanded file alone.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "fpc/channel.hpp"
#include "fpc/efsm.hpp"
#include "fpc/error.hpp"
#include "fpc/geometry.hpp"
#include "fpc/rng.hpp"
#include "fpc/solver.hpp"
#include "fpc/stgraph.hpp"
#include "fpc/taskmap.hpp"

namespace fpc {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

struct TaskSpec {
  std::string generator;  // empty for an explicit task
  double input_bits = 1e6;
  std::optional<double> complexity;
  double scaling = 0.8;
  std::optional<TaskDag> explicit_dag;
};

struct Scenario {
  std::uint64_t seed = 1;
  SlotGrid grid;
  SampleRule sample = SampleRule::slot_start;
  std::vector<TrajectoryParams> fleet;
  std::vector<int> formation;  // formation index per UAV
  ChannelParams channel;
  StateCatalog catalog;
  std::vector<FsmSpec> fsms;
  TaskSpec task;
  Roles roles;
  EvalOptions eval;
  SolverConfig solver;
  int pick_kx_k = 2;
  CloudParams cloud;
  double local_capacity = 5e8;
  Json expanded;

  int uav_count() const { return static_cast<int>(fleet.size()); }

  /// The task with optional overrides of input size and complexity.
  TaskDag make_task(std::optional<double> input_bits = {}, std::optional<double> complexity = {}) const {
    if (task.explicit_dag) {
      TaskDag dag = *task.explicit_dag;
      if (input_bits) dag = dag.with_source_volume(*input_bits);
      if (complexity) dag = dag.with_complexity(*complexity);
      return dag;
    }
    auto dag = generate_task(task.generator, input_bits.value_or(task.input_bits),
                             complexity ? complexity : task.complexity, task.scaling);
    if (!dag) throw ConfigError("task.generator: unknown generator '" + task.generator + "'");
    return *dag;
  }
};

/// The pipeline machine every UAV runs; a UAV only materializes the states it owns.
inline FsmSpec pipeline_fsm() {
  return {standard_state_types(),
          {"frame_ready", "filtered", "analyzed", "encoded"},
          {{"capture", "frame_ready", "preprocess"},
           {"preprocess", "filtered", "analyze"},
           {"preprocess", "filtered", "compress"},
           {"analyze", "analyzed", "compress"},
           {"compress", "encoded", "transmit"}},
          "capture",
          {"transmit"}};
}

namespace detail {

/// Typed access to a JSON object with dotted key paths in error messages.
class Reader {
 public:
  Reader(const Json& j, std::string path) : j_(&j), path_(std::move(path)) {
    if (!j.is_object()) throw ConfigError(where() + "must be an object");
  }

  bool has(const std::string& key) const { return j_->contains(key) && !(*j_)[key].is_null(); }

  std::string key(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }

  const Json& raw(const std::string& k) const {
    if (!has(k)) throw ConfigError("missing key '" + key(k) + "'");
    return (*j_)[k];
  }

  Reader child(const std::string& k) const { return {raw(k), key(k)}; }

  template <class T>
  T get(const std::string& k) const {
    try {
      return raw(k).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError("key '" + key(k) + "' has the wrong type");
    }
  }

  template <class T>
  T get(const std::string& k, T fallback) const {
    return has(k) ? get<T>(k) : fallback;
  }

  double number(const std::string& k) const {
    const Json& v = raw(k);
    if (!v.is_number()) throw ConfigError("key '" + key(k) + "' must be a number");
    return v.get<double>();
  }

  double number(const std::string& k, double fallback) const { return has(k) ? number(k) : fallback; }

  /// Either a number or a [lo, hi] range.
  std::pair<double, double> range(const std::string& k) const {
    const Json& v = raw(k);
    if (v.is_number()) return {v.get<double>(), v.get<double>()};
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number() && v[0].get<double>() <= v[1].get<double>()) {
      return {v[0].get<double>(), v[1].get<double>()};
    }
    throw ConfigError("key '" + key(k) + "' must be a number or [lo, hi]");
  }

 private:
  std::string where() const { return path_.empty() ? "scenario " : "key '" + path_ + "' "; }

  const Json* j_;
  std::string path_;
};

inline double draw(Rng& rng, std::pair<double, double> r) { return r.first == r.second ? r.first : rng.uniform(r.first, r.second); }

/// True when the link graph of every slot is connected.
inline bool connected_every_slot(const PositionTable& positions, const ChannelParams& channel) {
  const std::size_t p = positions.front().size();
  for (const auto& row : positions) {
    std::vector<char> seen(p, 0);
    std::vector<std::size_t> stack{0};
    seen[0] = 1;
    std::size_t count = 1;
    while (!stack.empty()) {
      const std::size_t u = stack.back();
      stack.pop_back();
      for (std::size_t v = 0; v < p; ++v) {
        if (seen[v]) continue;
        const double d = distance(row[u], row[v]);
        if (d > 0.0 && link_metrics(d, channel).connected) {
          seen[v] = 1;
          ++count;
          stack.push_back(v);
        }
      }
    }
    if (count != p) return false;
  }
  return true;
}

inline void parse_channel(const Reader& r, Scenario& s) {
  s.channel = ChannelParams::from_db({r.number("carrier_frequency_hz"), r.number("los_attenuation_db"),
                                      r.number("eirp_dbm"), r.number("rx_gain_db"), r.number("noise_power_dbm"),
                                      r.number("bandwidth_hz"), r.number("ber_threshold")});
}

inline void parse_fleet(const Reader& r, Scenario& s, Rng& rng, std::vector<double>& capacity) {
  if (r.has("uavs")) {
    const Json& list = r.raw("uavs");
    if (!list.is_array() || list.empty()) throw ConfigError("key 'fleet.uavs' must be a non-empty array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const Reader u(list[i], r.key("uavs[" + std::to_string(i) + "]"));
      const auto c = u.get<std::vector<double>>("center_m");
      if (c.size() != 3) throw ConfigError("key '" + u.key("center_m") + "' must be [x, y, z]");
      TrajectoryParams t{c[0], c[1], c[2], u.number("radius_m"), u.number("angular_velocity_rad_s"),
                         u.number("initial_phase_rad", 0.0)};
      t.validate();
      s.fleet.push_back(t);
      s.formation.push_back(u.get<int>("formation", 0));
      capacity.push_back(u.number("capacity_hz"));
    }
    return;
  }
  const int formations = r.get<int>("formations");
  const int per = r.get<int>("uavs_per_formation");
  if (formations < 1 || per < 1) throw ConfigError("key 'fleet.formations' and 'fleet.uavs_per_formation' must be >= 1");
  const auto area = r.get<std::vector<double>>("area_m");
  if (area.size() != 2 || !(area[0] > 0.0) || !(area[1] > 0.0)) throw ConfigError("key 'fleet.area_m' must be [w, h] > 0");
  const auto radius = r.range("radius_m");
  const auto altitude = r.range("altitude_m");
  const auto omega = r.range("angular_velocity_rad_s");
  const auto cap = r.range("capacity_hz");
  if (!(radius.first >= 0.0) || !(altitude.first > 0.0) || !(cap.first > 0.0)) {
    throw ConfigError("key 'fleet' ranges must be positive");
  }
  const int attempts = r.get<int>("placement_attempts", 1000);
  const double margin = radius.second;
  if (2.0 * margin >= area[0] || 2.0 * margin >= area[1]) throw ConfigError("key 'fleet.area_m' is smaller than an orbit");
  for (int attempt = 0;; ++attempt) {
    if (attempt == attempts) throw ConfigError("key 'fleet': no connected placement found within placement_attempts");
    Rng place(derive_seed(s.seed, 11, static_cast<std::uint64_t>(attempt)));
    s.fleet.clear();
    s.formation.clear();
    for (int f = 0; f < formations; ++f) {
      const double cx = place.uniform(margin, area[0] - margin);
      const double cy = place.uniform(margin, area[1] - margin);
      const double cz = draw(place, altitude);
      for (int u = 0; u < per; ++u) {
        TrajectoryParams t{cx, cy, cz, draw(place, radius), draw(place, omega),
                           place.uniform(0.0, 2.0 * std::numbers::pi)};
        s.fleet.push_back(t);
        s.formation.push_back(f);
      }
    }
    const auto positions = sample_fleet(s.fleet, s.grid, s.sample);
    bool distinct = true;
    for (const auto& row : positions) {
      for (std::size_t a = 0; a < row.size(); ++a) {
        for (std::size_t b = a + 1; b < row.size(); ++b) distinct = distinct && distance(row[a], row[b]) > 0.0;
      }
    }
    if (distinct && connected_every_slot(positions, s.channel)) break;
  }
  for (std::size_t i = 0; i < s.fleet.size(); ++i) capacity.push_back(draw(rng, cap));
}

inline TaskSpec parse_task(const Reader& r, const std::vector<std::string>& types) {
  TaskSpec t;
  t.input_bits = r.number("input_bits");
  if (r.has("complexity_cycles_per_bit")) t.complexity = r.number("complexity_cycles_per_bit");
  t.scaling = r.number("scaling", 0.8);
  if (r.has("generator")) {
    t.generator = r.get<std::string>("generator");
    if (!generate_task(t.generator, t.input_bits, t.complexity, t.scaling)) {
      throw ConfigError("key '" + r.key("generator") + "': unknown generator '" + t.generator + "'");
    }
    for (const auto& name : standard_state_types()) {
      if (std::find(types.begin(), types.end(), name) == types.end()) {
        throw ConfigError("key 'states.types' must define '" + name + "' for built-in tasks");
      }
    }
    return t;
  }
  const Json& list = r.raw("subtasks");
  if (!list.is_array() || list.empty()) throw ConfigError("key '" + r.key("subtasks") + "' must be a non-empty array");
  std::vector<Subtask> subtasks;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const Reader st(list[i], r.key("subtasks[" + std::to_string(i) + "]"));
    const auto state = st.get<std::string>("state");
    const auto it = std::find(types.begin(), types.end(), state);
    if (it == types.end()) throw ConfigError("key '" + st.key("state") + "' names undefined state '" + state + "'");
    subtasks.push_back({st.get<std::string>("name", "phi" + std::to_string(i + 1)), static_cast<int>(it - types.begin()),
                        st.has("complexity") ? st.number("complexity") : t.complexity.value_or(100.0),
                        st.number("scaling", t.scaling)});
  }
  std::vector<std::pair<int, int>> edges;
  for (const auto& e : r.get<std::vector<std::vector<int>>>("edges")) {
    if (e.size() != 2) throw ConfigError("key '" + r.key("edges") + "' entries must be [from, to]");
    edges.push_back({e[0] - 1, e[1] - 1});
  }
  try {
    t.explicit_dag = TaskDag(std::move(subtasks), std::move(edges), t.input_bits);
  } catch (const ContractError& e) {
    throw ConfigError("key '" + r.key("edges") + "': " + e.what());
  }
  return t;
}

}  // namespace detail

inline ComputePolicy parse_policy(const std::string& name) {
  if (name == "defer") return ComputePolicy::defer;
  if (name == "span") return ComputePolicy::span;
  throw ConfigError("key 'routing.compute_policy' must be 'defer' or 'span'");
}

/// Validated scenario; seed overrides the file's seed when given.
inline Scenario parse_scenario(const Json& root, std::optional<std::uint64_t> seed = {}) {
  using detail::Reader;
  const Reader r(root, "");
  const int version = r.get<int>("schema_version");
  if (version != kSchemaVersion) {
    throw ConfigError("key 'schema_version' is " + std::to_string(version) + ", expected " + std::to_string(kSchemaVersion));
  }
  Scenario s;
  s.seed = seed ? *seed : r.get<std::uint64_t>("seed");
  Json out = root;
  out["seed"] = s.seed;

  const Reader slots = r.child("slots");
  try {
    s.grid = SlotGrid(slots.get<int>("count"), slots.number("length_s"));
  } catch (const ContractError& e) {
    throw ConfigError("key 'slots': " + std::string(e.what()));
  }
  const auto sample = slots.get<std::string>("sample", "start");
  if (sample != "start" && sample != "midpoint") throw ConfigError("key 'slots.sample' must be 'start' or 'midpoint'");
  s.sample = sample == "start" ? SampleRule::slot_start : SampleRule::slot_midpoint;

  try {
    detail::parse_channel(r.child("channel"), s);
  } catch (const ContractError& e) {
    throw ConfigError("key 'channel': " + std::string(e.what()));
  }

  Rng rng(derive_seed(s.seed, 12));
  std::vector<double> capacity;
  detail::parse_fleet(r.child("fleet"), s, rng, capacity);
  const int p = s.uav_count();
  Json uavs = Json::array();
  for (int i = 0; i < p; ++i) {
    const auto& t = s.fleet[static_cast<std::size_t>(i)];
    uavs.push_back({{"formation", s.formation[static_cast<std::size_t>(i)]},
                    {"center_m", {t.center_x, t.center_y, t.center_z}},
                    {"radius_m", t.radius},
                    {"angular_velocity_rad_s", t.angular_velocity},
                    {"initial_phase_rad", t.initial_phase},
                    {"capacity_hz", capacity[static_cast<std::size_t>(i)]}});
  }
  out["fleet"] = {{"uavs", uavs}};

  const Reader roles = r.child("roles");
  s.roles.initiator = roles.get<int>("initiator", 1) - 1;
  s.roles.receiver = roles.get<int>("receiver", p) - 1;
  if (s.roles.initiator < 0 || s.roles.initiator >= p) throw ConfigError("key 'roles.initiator' out of range");
  if (s.roles.receiver < 0 || s.roles.receiver >= p) throw ConfigError("key 'roles.receiver' out of range");

  const Reader states = r.child("states");
  const auto types = states.get<std::vector<std::string>>("types");
  if (types.empty()) throw ConfigError("key 'states.types' must not be empty");
  try {
    s.catalog = StateCatalog(types, capacity);
  } catch (const ContractError& e) {
    throw ConfigError("key 'fleet': " + std::string(e.what()));
  }
  s.task = detail::parse_task(r.child("task"), types);
  const TaskDag dag = s.make_task();
  const double alpha_default = s.task.complexity.value_or(dag.subtask(0).complexity);
  Json membership = Json::array();
  if (states.has("membership")) {
    const auto m = states.get<std::vector<std::vector<std::string>>>("membership");
    if (static_cast<int>(m.size()) != p) throw ConfigError("key 'states.membership' needs one list per UAV");
    for (int i = 0; i < p; ++i) {
      for (const auto& name : m[static_cast<std::size_t>(i)]) {
        const auto it = std::find(types.begin(), types.end(), name);
        if (it == types.end()) throw ConfigError("key 'states.membership' names undefined state '" + name + "'");
        s.catalog.grant(i, static_cast<int>(it - types.begin()), alpha_default);
      }
    }
  } else {
    const double prob = states.number("membership_probability");
    if (!(prob >= 0.0 && prob <= 1.0)) throw ConfigError("key 'states.membership_probability' must lie in [0, 1]");
    Rng mrng(derive_seed(s.seed, 13));
    for (int i = 0; i < p; ++i) {
      for (int l = 0; l < static_cast<int>(types.size()); ++l) {
        if (mrng.uniform() < prob) s.catalog.grant(i, l, alpha_default);
      }
    }
    // The endpoints must be able to start and finish the task.
    s.catalog.grant(s.roles.initiator, dag.subtask(0).state_type, alpha_default);
    s.catalog.grant(s.roles.receiver_of(p), dag.subtask(dag.sink()).state_type, alpha_default);
    for (int l = 0; l < static_cast<int>(types.size()); ++l) {
      if (s.catalog.members_of(l).empty()) s.catalog.grant(static_cast<int>(mrng.index(static_cast<std::size_t>(p))), l, alpha_default);
    }
  }
  for (int i = 0; i < p; ++i) {
    Json owned = Json::array();
    for (int l : s.catalog.types_of(i)) owned.push_back(types[static_cast<std::size_t>(l)]);
    membership.push_back(owned);
  }
  out["states"] = {{"types", types}, {"membership", membership}};

  for (int i = 0; i < dag.size(); ++i) {
    if (s.catalog.members_of(dag.subtask(i).state_type).empty()) {
      throw ConfigError("key 'states': no UAV owns state '" + types[static_cast<std::size_t>(dag.subtask(i).state_type)] + "'");
    }
  }
  const FsmSpec fsm = pipeline_fsm();
  if (std::all_of(types.begin(), types.end(), [&](const std::string& t) {
        return std::find(fsm.states.begin(), fsm.states.end(), t) != fsm.states.end();
      })) {
    s.fsms.assign(static_cast<std::size_t>(p), fsm);
  }

  if (r.has("routing")) {
    const Reader routing = r.child("routing");
    s.eval.policy = parse_policy(routing.get<std::string>("compute_policy", "defer"));
    s.eval.unit_bit_route = routing.get<bool>("unit_bit_route", false);
  }
  s.eval.roles = s.roles;

  if (r.has("solver")) {
    const Reader sv = r.child("solver");
    s.solver.swarm_size = sv.get<int>("swarm_size", s.solver.swarm_size);
    s.solver.max_iterations = sv.get<int>("max_iterations", s.solver.max_iterations);
    if (sv.has("learning_factors")) {
      const auto g = sv.get<std::vector<double>>("learning_factors");
      if (g.size() != 2) throw ConfigError("key 'solver.learning_factors' must be [g1, g2]");
      s.solver.learning_personal = g[0];
      s.solver.learning_global = g[1];
    }
    if (sv.has("inertia")) {
      const auto mu = sv.get<std::vector<double>>("inertia");
      if (mu.size() != 2) throw ConfigError("key 'solver.inertia' must be [start, end]");
      s.solver.inertia_start = mu[0];
      s.solver.inertia_end = mu[1];
    }
    s.solver.velocity_clamp = sv.number("velocity_clamp", s.solver.velocity_clamp);
    s.solver.initial_velocity = sv.number("initial_velocity", s.solver.initial_velocity);
    s.solver.threads = sv.get<int>("threads", s.solver.threads);
  }
  s.solver.seed = derive_seed(s.seed, 14);
  s.solver.validate();

  if (r.has("baselines")) {
    const Reader b = r.child("baselines");
    s.pick_kx_k = b.get<int>("k", s.pick_kx_k);
    if (s.pick_kx_k < 1) throw ConfigError("key 'baselines.k' must be >= 1");
    if (b.has("cloud")) {
      const Reader c = b.child("cloud");
      s.cloud.uplink_distance = c.number("uplink_distance_m", s.cloud.uplink_distance);
      s.cloud.ber_threshold = c.number("ber_threshold", s.cloud.ber_threshold);
      s.cloud.server_capacity = c.number("server_capacity_hz", s.cloud.server_capacity);
      if (c.has("uplink_rate_bps")) s.cloud.uplink_rate = c.number("uplink_rate_bps");
      if (!(s.cloud.uplink_distance >= 0.0)) throw ConfigError("key 'baselines.cloud.uplink_distance_m' must be >= 0");
      if (!(s.cloud.ber_threshold > 0.0 && s.cloud.ber_threshold < 0.5)) {
        throw ConfigError("key 'baselines.cloud.ber_threshold' must lie in (0, 0.5)");
      }
      if (!(s.cloud.server_capacity > 0.0)) throw ConfigError("key 'baselines.cloud.server_capacity_hz' must be > 0");
    }
    if (b.has("local")) {
      s.local_capacity = b.child("local").number("capacity_hz", s.local_capacity);
      if (!(s.local_capacity > 0.0)) throw ConfigError("key 'baselines.local.capacity_hz' must be > 0");
    }
  }
  s.expanded = std::move(out);
  return s;
}

inline Json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const std::size_t upto = std::min(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
    throw ConfigError(origin + ":" + std::to_string(line) + ": JSON parse error");
  }
}

inline Scenario load_scenario(const std::string& path, std::optional<std::uint64_t> seed = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(parse_json_text(buf.str(), path), seed);
}

/// Space-time graph and its state extension for a scenario.
struct ScenarioGraph {
  SpaceTimeGraph base;
  EfsmsGraph efsm;
};

inline ScenarioGraph build_graphs(const Scenario& s) {
  ScenarioGraph g;
  g.base = build_space_time_graph(sample_fleet(s.fleet, s.grid, s.sample), s.channel, s.grid);
  g.efsm = build_efsmsg(g.base, s.catalog, s.fsms);
  return g;
}

}  // namespace fpc
