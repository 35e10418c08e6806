#pragma once

#include "common/error.hpp"
#include "common/types.hpp"

#include <array>
#include <utility>
#include <vector>

namespace romlab {

enum class BoundaryKind { kPeriodic, kDirichletGhost };

struct GridInfo {
  int dimensionality = 1;
  std::array<Index, 2> elements{0, 0};
  std::array<Index, 2> points_per_axis{0, 0};  // state points per axis
  std::array<double, 2> spacing{0.0, 0.0};
  std::array<double, 2> domain_length{0.0, 0.0};
  BoundaryKind boundary = BoundaryKind::kPeriodic;
};

// Uniform backward-Euler time grid. Snapshots live at t_0 = 0 ... t_{n_t-1};
// dt = T / n_t.
struct TimeGrid {
  double final_time = 0.5;
  Index steps = 500;

  TimeGrid() = default;
  TimeGrid(double T, Index n_t) : final_time(T), steps(n_t) {
    require(T > 0.0, "TimeGrid: final time must be positive");
    require(n_t >= 1, "TimeGrid: step count must be >= 1");
  }

  double dt() const { return final_time / static_cast<double>(steps); }
  double time(Index i) const { return static_cast<double>(i) * dt(); }
  Index size() const { return steps; }
};

// A parameter point together with the closed box it must live in.
struct ParameterSample {
  Param values;
  std::vector<std::pair<double, double>> bounds;

  bool inside() const {
    if (bounds.size() != values.size()) return false;
    for (std::size_t k = 0; k < values.size(); ++k) {
      if (values[k] < bounds[k].first || values[k] > bounds[k].second) return false;
    }
    return true;
  }
};

}  // namespace romlab
