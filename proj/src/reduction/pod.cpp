#include "reduction/pod.hpp"

#include "common/binio.hpp"
#include "common/error.hpp"
#include "fom/trajectory_io.hpp"

#include <Eigen/SVD>

#include <cmath>

namespace romlab {

const char* to_string(BasisMode mode) {
  switch (mode) {
    case BasisMode::kPod: return "pod";
    case BasisMode::kGreedyDirect: return "greedy-direct";
    case BasisMode::kGreedyThenSvd: return "greedy-then-svd";
    case BasisMode::kAllSnapshotsSvd: return "all-snapshots-svd";
  }
  return "pod";
}

BasisMode basis_mode_from_string(const std::string& s) {
  if (s == "pod") return BasisMode::kPod;
  if (s == "greedy-direct") return BasisMode::kGreedyDirect;
  if (s == "greedy-then-svd") return BasisMode::kGreedyThenSvd;
  if (s == "all-snapshots-svd") return BasisMode::kAllSnapshotsSvd;
  throw InvalidArgument("unknown basis mode '" + s + "'");
}

Index truncation_rank(const Vector& sigma, double tol) {
  require(sigma.size() > 0, "truncation_rank: empty spectrum");
  const double total = sigma.sum();
  require(total > 0.0, "truncation_rank: all singular values are zero");
  double tail = total;
  for (Index r = 1; r <= sigma.size(); ++r) {
    tail -= sigma[r - 1];
    if (tail / total < tol) return r;
  }
  return sigma.size();
}

ThinSvd thin_svd(const Matrix& X) {
  require(X.size() > 0, "thin_svd: empty matrix");
  require(X.allFinite(), "thin_svd: non-finite entries");
  Eigen::BDCSVD<Matrix> svd(X, Eigen::ComputeThinU);
  return {svd.matrixU(), svd.singularValues()};
}

ReducedBasis pod_basis(const Matrix& X, const Truncation& trunc) {
  require(X.size() > 0, "pod_basis: empty snapshot matrix");
  require(X.allFinite(), "pod_basis: non-finite snapshot entries");
  require(X.norm() > 0.0, "pod_basis: snapshot matrix is zero");
  const Index max_rank = std::min(X.rows(), X.cols());
  if (trunc.rank >= 0) {
    require(trunc.rank >= 1, "pod_basis: rank must be >= 1");
    require(trunc.rank <= max_rank, "pod_basis: rank " + std::to_string(trunc.rank) +
                                        " exceeds available " + std::to_string(max_rank));
  } else {
    require(trunc.tol > 0.0, "pod_basis: need a rank or a positive tolerance");
  }
  ThinSvd svd = thin_svd(X);
  const Index r = trunc.rank >= 0 ? trunc.rank : truncation_rank(svd.sigma, trunc.tol);
  ReducedBasis b;
  b.V = svd.U.leftCols(r);
  b.singular_values = svd.sigma.head(r);
  b.mode = BasisMode::kPod;
  return b;
}

ReducedBasis pod_basis_streamed(const std::vector<std::string>& files, const Truncation& trunc) {
  require(!files.empty(), "pod_basis_streamed: no snapshot files");
  std::vector<Index> offsets{0};
  Index n = -1;
  for (const auto& f : files) {
    const auto t = load_trajectory(f);
    if (n < 0) n = t.states.rows();
    require_dims(t.states.rows() == n, "pod_basis_streamed: inconsistent state dimension");
    offsets.push_back(offsets.back() + t.states.cols());
  }
  const Index N = offsets.back();
  // Gram matrix G = X^T X, block by block.
  Matrix G(N, N);
  for (std::size_t a = 0; a < files.size(); ++a) {
    const Matrix Xa = load_trajectory(files[a]).states;
    G.block(offsets[a], offsets[a], Xa.cols(), Xa.cols()).noalias() = Xa.transpose() * Xa;
    for (std::size_t b = a + 1; b < files.size(); ++b) {
      const Matrix Xb = load_trajectory(files[b]).states;
      Matrix Gab = Xa.transpose() * Xb;
      G.block(offsets[a], offsets[b], Xa.cols(), Xb.cols()) = Gab;
      G.block(offsets[b], offsets[a], Xb.cols(), Xa.cols()) = Gab.transpose();
    }
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(G);
  const Vector lam = eig.eigenvalues().reverse();
  const Matrix W = eig.eigenvectors().rowwise().reverse();
  Vector sigma = lam.cwiseMax(0.0).cwiseSqrt();
  // Drop numerically null directions; they cannot be normalized.
  Index usable = 0;
  while (usable < sigma.size() && sigma[usable] > 1e-12 * sigma[0]) ++usable;
  require(usable > 0, "pod_basis_streamed: snapshot matrix is zero");
  Index r = trunc.rank >= 0 ? trunc.rank : truncation_rank(sigma.head(usable), trunc.tol);
  require(r >= 1 && r <= usable, "pod_basis_streamed: rank exceeds numerical rank");
  Matrix V = Matrix::Zero(n, r);
  for (std::size_t a = 0; a < files.size(); ++a) {
    const Matrix Xa = load_trajectory(files[a]).states;
    V.noalias() += Xa * W.block(offsets[a], 0, Xa.cols(), r);
  }
  for (Index k = 0; k < r; ++k) V.col(k) /= sigma[k];
  ReducedBasis out;
  out.V = append_orthonormal(Matrix(n, 0), V);
  out.singular_values = sigma.head(r);
  out.mode = BasisMode::kAllSnapshotsSvd;
  return out;
}

double orthonormality_error(const Matrix& V) {
  if (V.cols() == 0) return 0.0;
  return (V.transpose() * V - Matrix::Identity(V.cols(), V.cols())).norm();
}

Matrix append_orthonormal(const Matrix& V, const Matrix& W, double drop_tol) {
  require_dims(V.cols() == 0 || V.rows() == W.rows(), "append_orthonormal: row mismatch");
  Matrix out(W.rows(), V.cols() + W.cols());
  if (V.cols() > 0) out.leftCols(V.cols()) = V;
  Index k = V.cols();
  for (Index j = 0; j < W.cols(); ++j) {
    Vector w = W.col(j);
    const double w0 = w.norm();
    if (w0 == 0.0) continue;
    for (int pass = 0; pass < 2; ++pass) {
      if (k > 0) w -= out.leftCols(k) * (out.leftCols(k).transpose() * w);
    }
    const double wn = w.norm();
    if (wn <= drop_tol * w0) continue;
    out.col(k++) = w / wn;
  }
  return out.leftCols(k);
}

void save_basis(const std::string& path, const ReducedBasis& b) {
  io::BinaryWriter w(path, "ROMBASE1");
  w.u64(static_cast<std::uint64_t>(b.V.rows()));
  w.u64(static_cast<std::uint64_t>(b.V.cols()));
  w.u64(static_cast<std::uint64_t>(b.mode));
  w.u64(static_cast<std::uint64_t>(b.singular_values.size()));
  w.f64s(b.singular_values.data(), static_cast<std::size_t>(b.singular_values.size()));
  const std::size_t p = b.selected_parameters.empty() ? 0 : b.selected_parameters.front().size();
  w.u64(b.selected_parameters.size());
  w.u64(p);
  for (const auto& mu : b.selected_parameters) {
    require_dims(mu.size() == p, "save_basis: ragged parameter list");
    for (double v : mu) w.f64(v);
  }
  w.matrix(b.V);
  w.close();
}

ReducedBasis load_basis(const std::string& path) {
  io::BinaryReader r(path, "ROMBASE1");
  ReducedBasis b;
  const auto n = static_cast<Index>(r.u64());
  const auto rank = static_cast<Index>(r.u64());
  const auto mode = r.u64();
  if (mode > 3) throw IoError("ROMBASE1: bad mode in '" + path + "'");
  b.mode = static_cast<BasisMode>(mode);
  const auto k = static_cast<Index>(r.u64());
  b.singular_values.resize(k);
  r.f64s(b.singular_values.data(), static_cast<std::size_t>(k));
  const auto n_sel = r.u64();
  const auto p = r.u64();
  b.selected_parameters.assign(n_sel, Param(p));
  for (auto& mu : b.selected_parameters)
    for (auto& v : mu) v = r.f64();
  b.V = r.matrix(n, rank);
  return b;
}

void export_basis_csv(const std::string& path, const ReducedBasis& b) {
  std::vector<std::string> header;
  for (Index k = 0; k < b.V.cols(); ++k) header.push_back("v" + std::to_string(k));
  io::write_csv(path, b.V, header);
}

}  // namespace romlab
