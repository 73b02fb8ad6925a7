#pragma once

// Circular flight trajectories of the cooperative fleet and the slot grid the
// topology is discretized on.

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "fpc/error.hpp"

namespace fpc {

struct Position3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

/// Uniform circular orbit of one UAV. Lengths in meters, angles in radians.
/// The sign of angular_velocity encodes the direction of rotation.
struct TrajectoryParams {
  double center_x = 0.0;
  double center_y = 0.0;
  double center_z = 1.0;
  double radius = 0.0;
  double angular_velocity = 0.0;
  double initial_phase = 0.0;

  void validate() const {
    if (!(radius >= 0.0) || !std::isfinite(radius)) {
      throw ContractError("trajectory radius must be finite and >= 0");
    }
    if (!(center_z > 0.0) || !std::isfinite(center_z)) {
      throw ContractError("trajectory altitude must be > 0");
    }
    if (!std::isfinite(center_x) || !std::isfinite(center_y) ||
        !std::isfinite(angular_velocity) || !std::isfinite(initial_phase)) {
      throw ContractError("trajectory parameters must be finite");
    }
  }
};

enum class SampleRule { slot_start, slot_midpoint };

/// n slots of equal length; the period is defined as n * slot_length.
class SlotGrid {
 public:
  SlotGrid() = default;
  SlotGrid(int slot_count, double slot_length) : slot_count_(slot_count), slot_length_(slot_length) {
    if (slot_count < 1) throw ContractError("slot_count must be >= 1");
    if (!(slot_length > 0.0) || !std::isfinite(slot_length)) {
      throw ContractError("slot_length must be finite and > 0");
    }
  }

  int slot_count() const { return slot_count_; }
  double slot_length() const { return slot_length_; }
  double period() const { return slot_length_ * slot_count_; }

  /// Absolute time at which 0-based slot k ends (== start of slot k+1).
  double boundary(int k) const { return slot_length_ * (k + 1); }
  double slot_begin(int k) const { return slot_length_ * k; }

  double sample_time(int k, SampleRule rule) const {
    return rule == SampleRule::slot_start ? slot_begin(k) : slot_begin(k) + 0.5 * slot_length_;
  }

 private:
  int slot_count_ = 1;
  double slot_length_ = 1.0;
};

inline Position3 position_at(const TrajectoryParams& traj, double t) {
  const double angle = traj.initial_phase + traj.angular_velocity * t;
  return {traj.center_x + traj.radius * std::cos(angle), traj.center_y + traj.radius * std::sin(angle),
          traj.center_z};
}

inline double distance(const Position3& a, const Position3& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

inline double distance(const TrajectoryParams& i, const TrajectoryParams& j, double t) {
  return distance(position_at(i, t), position_at(j, t));
}

/// positions[k][d] is UAV d at the representative instant of slot k.
using PositionTable = std::vector<std::vector<Position3>>;

inline PositionTable sample_fleet(std::span<const TrajectoryParams> fleet, const SlotGrid& grid,
                                  SampleRule rule = SampleRule::slot_start) {
  if (fleet.empty()) throw ContractError("fleet must not be empty");
  PositionTable table(static_cast<std::size_t>(grid.slot_count()));
  for (int k = 0; k < grid.slot_count(); ++k) {
    const double t = grid.sample_time(k, rule);
    auto& row = table[static_cast<std::size_t>(k)];
    row.reserve(fleet.size());
    for (const auto& traj : fleet) row.push_back(position_at(traj, t));
  }
  return table;
}

inline double degrees_to_radians(double deg) { return deg * std::numbers::pi / 180.0; }

}  // namespace fpc
