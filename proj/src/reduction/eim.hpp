#pragma once

#include "common/types.hpp"

#include <Eigen/LU>

#include <string>
#include <vector>

namespace romlab {

class FomModel;

// Empirical interpolation data: f(u) ~ U (P^T U)^{-1} P^T f(u).
struct EimData {
  Matrix U;                        // n x m interpolation basis
  std::vector<Index> indices;      // m interpolation rows (the action of P^T)
  std::vector<Index> closure;      // sorted rows needed to evaluate f at `indices`
  Eigen::PartialPivLU<Matrix> interp;  // factorization of P^T U
  double condition = 1.0;              // 2-norm condition number of P^T U
  std::vector<double> residual_history;  // max-norm residual before each pick, then final
  Index tolerance_size = 0;  // number of points needed to meet tol_EIM

  Index size() const { return U.cols(); }
  Index dim() const { return U.rows(); }
};

struct EimOptions {
  double tol = 1e-5;   // absolute, column max-norm of the interpolation residual
  Index min_size = 0;  // keep picking past the tolerance up to this many points
  Index max_size = -1;
};

// Greedy EIM on the columns of F (nonlinearity snapshots). If `model` is
// given, the stencil closure is filled in as well.
EimData eim_build(const Matrix& F, const EimOptions& opts, const FomModel* model = nullptr);

// Exact hyper-reduction: U = I, every row sampled.
EimData eim_identity(Index n, const FomModel* model = nullptr);

// beta = (P^T U)^{-1} f_at_indices
Vector eim_coefficients(const EimData& eim, const Vector& f_at_indices);

// U beta, the interpolant of a full vector f.
Vector eim_interpolate(const EimData& eim, const Vector& f);

void eim_attach_closure(EimData& eim, const FomModel& model);
void eim_refactor(EimData& eim);

// "ROMEIM1" container: magic, u64 n, u64 m, u64 tolerance_size, m indices,
// u64 c, c closure rows, then U column-major.
void save_eim(const std::string& path, const EimData& eim);
EimData load_eim(const std::string& path);
void export_eim_csv(const std::string& path, const EimData& eim);

}  // namespace romlab
