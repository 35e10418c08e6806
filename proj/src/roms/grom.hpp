#pragma once

#include "fom/model.hpp"
#include "reduction/eim.hpp"
#include "roms/gappy.hpp"
#include "roms/reduced.hpp"

#include <memory>

namespace romlab {

// Hyper-reduced Galerkin ROM
//
//   Er dz/dt = Ar z + N f_P(V z) + V^T B,   N = V^T U (P^T U)^{-1},
//
// integrated with backward Euler and Newton on the r-dimensional system.
// f_P is evaluated only at the EIM rows, from V restricted to their stencil
// closure.
class GRom {
 public:
  GRom(const FomModel& model, const Matrix& V, std::shared_ptr<const EimData> eim);

  Index r() const { return V_.cols(); }
  const Matrix& basis() const { return V_; }
  const Matrix& Er() const { return Er_; }
  const Matrix& Ar() const { return Ar_; }
  const Matrix& N() const { return N_; }
  const Matrix& V_closure() const { return Vc_; }
  const EimData& eim() const { return *eim_; }
  const FomModel& model() const { return *model_; }

  Vector reduced_initial(const Param& mu) const;
  Vector reduced_source(double t, const Param& mu) const;

  // Er (z - z_prev)/dt - Ar z - N f_P(V z) - b
  Vector reduced_residual(const Vector& z, const Vector& z_prev, double dt, const Param& mu,
                          const Vector& b) const;
  NewtonResult step(const Vector& z_prev, double dt, const Param& mu, const Vector& b,
                    const NewtonOptions& opts) const;

  ReducedTrajectory simulate(const Param& mu, const TimeGrid& tg,
                             const NewtonOptions& opts = {}) const;

 private:
  const FomModel* model_;
  Matrix V_;
  std::shared_ptr<const EimData> eim_;
  GappyNonlinearity gappy_;
  Matrix Er_, Ar_, N_, Vc_;
};

ReducedTrajectory grom_simulate(const GRom& rom, const Param& mu, const TimeGrid& tg,
                                const NewtonOptions& opts = {});

}  // namespace romlab
