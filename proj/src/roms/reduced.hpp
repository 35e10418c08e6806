#pragma once

#include "common/types.hpp"
#include "fom/grid.hpp"

#include <string>

namespace romlab {

struct ReducedTrajectory {
  Matrix Z;  // r x n_t
  Param mu;
  double wall_time = 0.0;
  int iterations = 0;
};

// V Z, one column per time instance.
Matrix lift(const Matrix& V, const Matrix& Z);

// "ROMRED1" container: magic, u64 r, u64 n_t, u64 p, p doubles (mu), then Z
// column-major.
void save_reduced(const std::string& path, const ReducedTrajectory& traj);
ReducedTrajectory load_reduced(const std::string& path);
void export_reduced_csv(const std::string& path, const ReducedTrajectory& traj, const TimeGrid& tg);

}  // namespace romlab
