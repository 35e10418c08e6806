#pragma once

#include "common/types.hpp"
#include "fom/grid.hpp"

#include <memory>
#include <string>
#include <vector>

namespace romlab {

// Semidiscrete parametric system
//
//   E du/dt = A u + f(u, mu) + B(t, mu),   u(0) = u0(mu).
//
// The nonlinearity is exposed row by row: row i of f depends only on the
// state entries listed by stencil(i). This is what hyper-reduced ROMs use to
// evaluate f at a handful of rows without touching the full state.
class FomModel {
 public:
  virtual ~FomModel() = default;

  Index dim() const { return n_; }
  const GridInfo& grid() const { return grid_; }
  const TimeGrid& default_time_grid() const { return time_grid_; }
  virtual std::string name() const = 0;
  virtual Index param_dim() const = 0;

  const SparseMatrix& mass() const { return mass_; }
  const SparseMatrix& linear() const { return linear_; }
  Vector apply_E(const Vector& x) const;
  Vector apply_A(const Vector& x) const;

  // Throws InvalidArgument when mu is not admissible.
  virtual void check_param(const Param& mu) const = 0;

  virtual Vector eval_B(double t, const Param& mu) const = 0;
  virtual bool source_time_independent() const { return true; }
  virtual Vector initial_state(const Param& mu) const = 0;

  // Row-wise nonlinearity. `vals` holds the state at stencil(row), in order.
  virtual int max_stencil() const = 0;
  virtual int stencil(Index row, Index* cols) const = 0;
  virtual double f_row(Index row, const double* vals, const Param& mu) const = 0;
  // Returns f_row and writes d f_row / d vals[k] into grad[k].
  virtual double f_row_grad(Index row, const double* vals, const Param& mu,
                            double* grad) const = 0;

  Vector eval_f(const Vector& u, const Param& mu) const;
  void eval_f(const Vector& u, const Param& mu, Vector& out) const;
  SparseMatrix jac_f(const Vector& u, const Param& mu) const;

  // Sparsity pattern of jac_f (structural entries, zeros included).
  SparseMatrix jac_pattern() const;

  // Column elimination order for the Newton matrix. Empty means "let the
  // sparse LU pick one" (COLAMD).
  virtual std::vector<int> elimination_order() const { return {}; }

 protected:
  Index n_ = 0;
  GridInfo grid_;
  TimeGrid time_grid_;
  SparseMatrix mass_;
  SparseMatrix linear_;
};

// r = (1/dt) E (u - u_prev) - A u - f(u, mu) - B(t, mu)
Vector semidiscrete_residual(const FomModel& model, const Vector& u, const Vector& u_prev,
                             double t, double dt, const Param& mu);

struct NewtonOptions {
  double tol = 1e-8;
  int max_iter = 25;
};

struct NewtonResult {
  Vector u;
  int iterations = 0;
  std::vector<double> residual_history;  // norm before each update, then final
};

// One backward-Euler step: solves (E/dt - A - J_f) delta = -r until
// ||r||_2 <= tol, starting from u_prev.
NewtonResult newton_step(const FomModel& model, const Vector& u_prev, double t, double dt,
                         const Param& mu, const NewtonOptions& opts = {});

struct SnapshotTrajectory {
  Matrix states;  // n x n_t, column i is u(t_i)
  Param mu;
  TimeGrid time_grid;
  double wall_time = 0.0;
  int newton_iterations = 0;
};

SnapshotTrajectory simulate_fom(const FomModel& model, const Param& mu, const TimeGrid& tg,
                                const NewtonOptions& opts = {});

}  // namespace romlab
