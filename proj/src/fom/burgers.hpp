#pragma once

#include "fom/model.hpp"

#include <memory>

namespace romlab {

enum class InitialCondition {
  kContinuous,  // 1 + (mu/2)(sin(2 pi x - pi/2) + 1) on [0, 1], 1 elsewhere
  kLiteral,     // 1 + (mu/2) sin(2 pi x - pi/2) + 1 on [0, 1], 1 elsewhere
};

enum class ConvectiveForm { kConservative, kNonconservative };

struct Burgers1dConfig {
  Index elements = 1000;
  double length = 2.0;
  BoundaryKind boundary = BoundaryKind::kPeriodic;
  InitialCondition ic = InitialCondition::kContinuous;
  bool strict_bounds = false;  // mu in [0.9, 1.1]
};

struct Burgers2dConfig {
  Index elements = 249;  // per axis; interior state is (elements - 1)^2 per component
  double length = 100.0;
  ConvectiveForm form = ConvectiveForm::kConservative;
  double source_amplitude = 0.02;
  bool strict_bounds = true;  // mu in [4.25, 5.50] x [0.015, 0.03]
};

// Periodic 1D inviscid Burgers with upwind (backward) differences:
//   f(u)_i = -u_i (u_i - u_{i-1}) / dx,  E = I, A = 0, B = 0.
class Burgers1d final : public FomModel {
 public:
  Burgers1d(const Burgers1dConfig& cfg, const TimeGrid& tg);

  std::string name() const override { return "burgers1d"; }
  Index param_dim() const override { return 1; }
  void check_param(const Param& mu) const override;
  Vector eval_B(double t, const Param& mu) const override;
  Vector initial_state(const Param& mu) const override;

  int max_stencil() const override { return 2; }
  int stencil(Index row, Index* cols) const override;
  double f_row(Index row, const double* vals, const Param& mu) const override;
  double f_row_grad(Index row, const double* vals, const Param& mu,
                    double* grad) const override;

  const Burgers1dConfig& config() const { return cfg_; }

 private:
  Burgers1dConfig cfg_;
  double dx_;
};

// 2D inviscid Burgers on [0, L]^2 with Dirichlet ghost data
// (u_x = mu_1 on x = 0, zero elsewhere; u_y = 0 on the boundary) and source
// 0.02 exp(mu_2 x) in the u_x equation. State = [interior u_x; interior u_y],
// lexicographic with x fastest.
class Burgers2d final : public FomModel {
 public:
  Burgers2d(const Burgers2dConfig& cfg, const TimeGrid& tg);

  std::string name() const override { return "burgers2d"; }
  Index param_dim() const override { return 2; }
  void check_param(const Param& mu) const override;
  Vector eval_B(double t, const Param& mu) const override;
  Vector initial_state(const Param& mu) const override;

  int max_stencil() const override { return 6; }
  int stencil(Index row, Index* cols) const override;
  double f_row(Index row, const double* vals, const Param& mu) const override;
  double f_row_grad(Index row, const double* vals, const Param& mu,
                    double* grad) const override;

  // Interleaves u_x and u_y point by point; the upwind Jacobian is then
  // block lower triangular and factorizes without fill.
  std::vector<int> elimination_order() const override;

  Index side() const { return m_; }
  const Burgers2dConfig& config() const { return cfg_; }

 private:
  struct Local;
  Local gather(Index row, const double* vals, const Param& mu) const;

  Burgers2dConfig cfg_;
  Index m_;  // interior points per axis
  double h_;
};

std::unique_ptr<FomModel> build_burgers1d(const Burgers1dConfig& cfg, const TimeGrid& tg);
std::unique_ptr<FomModel> build_burgers2d(const Burgers2dConfig& cfg, const TimeGrid& tg);

}  // namespace romlab
