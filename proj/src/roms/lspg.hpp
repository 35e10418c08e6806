#pragma once

#include "fom/model.hpp"
#include "reduction/eim.hpp"
#include "roms/gappy.hpp"
#include "roms/reduced.hpp"

namespace romlab {

// Picks collocation rows for LSPG: the EIM rows in greedy order, at least
// max(eim.tolerance_size, oversample * r) of them. When the EIM ran out of
// rows, the remainder is filled with the rows of V of largest norm.
std::vector<Index> lspg_sample_rows(const EimData& eim, const Matrix& V, double oversample);

// Least-squares Petrov-Galerkin ROM with collocation hyper-reduction. Each
// backward-Euler step minimizes ||r_s(V z)||_2 over z, where r_s are the
// sampled rows of the FOM residual, by Gauss-Newton with a QR solve of the
// (samples x r) matrix J_s V.
class LspgRom {
 public:
  LspgRom(const FomModel& model, const Matrix& V, std::vector<Index> sample_rows);

  Index r() const { return V_.cols(); }
  const Matrix& basis() const { return V_; }
  const std::vector<Index>& sample_rows() const { return gappy_.rows(); }

  struct StepResult {
    Vector z;
    int iterations = 0;
    double residual = 0.0;      // ||r_s||
    double stationarity = 0.0;  // ||(J_s V)^T r_s||
  };

  StepResult step(const Vector& z_prev, double t, double dt, const Param& mu,
                  const Vector& B_s, const NewtonOptions& opts) const;

  ReducedTrajectory simulate(const Param& mu, const TimeGrid& tg,
                             const NewtonOptions& opts = {}) const;

 private:
  const FomModel* model_;
  Matrix V_;
  GappyNonlinearity gappy_;
  Matrix Vc_;
  Matrix EVs_;  // rows of E V at the samples
  Matrix AVs_;  // rows of A V at the samples
};

ReducedTrajectory lspg_simulate(const FomModel& model, const Matrix& V,
                                const std::vector<Index>& sample_rows, const Param& mu,
                                const TimeGrid& tg, const NewtonOptions& opts = {});

}  // namespace romlab
