#pragma once

#include "fom/model.hpp"

#include <string>

namespace romlab {

// "ROMSNAP1" container: magic, u64 n, u64 n_t, u64 p, p doubles (mu), then
// the n x n_t state matrix column-major as doubles.
void save_trajectory(const std::string& path, const Matrix& states, const Param& mu);
void save_trajectory(const std::string& path, const SnapshotTrajectory& traj);

struct LoadedTrajectory {
  Matrix states;
  Param mu;
};
LoadedTrajectory load_trajectory(const std::string& path);

// Header "t,u_0,...": one row per time instance.
void export_trajectory_csv(const std::string& path, const Matrix& states, const TimeGrid& tg);

}  // namespace romlab
