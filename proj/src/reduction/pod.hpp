#pragma once

#include "common/types.hpp"

#include <string>
#include <vector>

namespace romlab {

enum class BasisMode {
  kPod,              // plain truncated SVD of one snapshot matrix
  kGreedyDirect,     // columns of the POD-greedy basis
  kGreedyThenSvd,    // SVD of the snapshots at greedy-selected parameters
  kAllSnapshotsSvd,  // SVD of every training snapshot
};

const char* to_string(BasisMode mode);
BasisMode basis_mode_from_string(const std::string& s);

struct ReducedBasis {
  Matrix V;                // n x r, orthonormal columns
  Vector singular_values;  // retained sigmas (may be empty for greedy bases)
  BasisMode mode = BasisMode::kPod;
  std::vector<Param> selected_parameters;

  Index dim() const { return V.rows(); }
  Index rank() const { return V.cols(); }
};

// Either a fixed rank or the relative-tail rule
//   (sum_{j > r} sigma_j) / (sum_j sigma_j) < tol.
struct Truncation {
  Index rank = -1;
  double tol = -1.0;

  static Truncation fixed(Index r) { return {r, -1.0}; }
  static Truncation tolerance(double t) { return {-1, t}; }
};

// Smallest r with tail sum / total < tol (1 <= r <= sigma.size()).
Index truncation_rank(const Vector& sigma, double tol);

struct ThinSvd {
  Matrix U;
  Vector sigma;
};
ThinSvd thin_svd(const Matrix& X);

ReducedBasis pod_basis(const Matrix& X, const Truncation& trunc);

// Method-of-snapshots POD over trajectory containers read one at a time, so
// the full snapshot matrix never has to sit in memory. Two passes over the
// files: Gram assembly, then basis assembly.
ReducedBasis pod_basis_streamed(const std::vector<std::string>& trajectory_files,
                                const Truncation& trunc);

// ||V^T V - I||_F
double orthonormality_error(const Matrix& V);

// Appends columns of W to V after two rounds of Gram-Schmidt against V and
// each other. Columns that vanish under the projection are dropped.
Matrix append_orthonormal(const Matrix& V, const Matrix& W, double drop_tol = 1e-12);

// "ROMBASE1": magic, u64 n, u64 r, u64 mode, u64 k, k sigmas, u64 n_sel,
// u64 p, n_sel*p parameter values, then V column-major.
void save_basis(const std::string& path, const ReducedBasis& basis);
ReducedBasis load_basis(const std::string& path);
void export_basis_csv(const std::string& path, const ReducedBasis& basis);

}  // namespace romlab
