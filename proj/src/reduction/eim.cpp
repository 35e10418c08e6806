#include "reduction/eim.hpp"

#include "common/binio.hpp"
#include "common/error.hpp"
#include "fom/model.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace romlab {

namespace {

Index argmax_abs(const Eigen::Ref<const Vector>& v) {
  Index best = 0;
  double bv = -1.0;
  for (Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(v[i]);
    if (a > bv) {
      bv = a;
      best = i;
    }
  }
  return best;
}

}  // namespace

void eim_refactor(EimData& eim) {
  const Index m = eim.size();
  Matrix PtU(m, m);
  for (Index k = 0; k < m; ++k) PtU.row(k) = eim.U.row(eim.indices[k]);
  eim.interp.compute(PtU);
  if (m == 0) {
    eim.condition = 1.0;
    return;
  }
  Eigen::BDCSVD<Matrix> svd(PtU);
  const Vector s = svd.singularValues();
  if (s[m - 1] == 0.0) throw SingularMatrix("eim: P^T U is singular");
  eim.condition = s[0] / s[m - 1];
}

EimData eim_build(const Matrix& F, const EimOptions& opts, const FomModel* model) {
  require(F.size() > 0, "eim_build: empty snapshot matrix");
  require(F.allFinite(), "eim_build: non-finite snapshots");
  require(opts.tol >= 0.0, "eim_build: negative tolerance");
  const Index n = F.rows();
  Index cap = std::min(n, F.cols() * n);  // at most n distinct rows
  if (opts.max_size >= 0) cap = std::min(cap, opts.max_size);

  Matrix R = F;  // interpolation residual of every training column
  EimData eim;
  std::vector<Vector> basis;
  std::vector<bool> taken(static_cast<std::size_t>(n), false);
  const double scale = F.cwiseAbs().maxCoeff();

  while (true) {
    // Column with the largest max-norm residual; ties go to the lowest index.
    Index jstar = 0;
    double err = -1.0;
    for (Index j = 0; j < R.cols(); ++j) {
      const double e = R.col(j).cwiseAbs().maxCoeff();
      if (e > err) {
        err = e;
        jstar = j;
      }
    }
    eim.residual_history.push_back(err);
    const Index m = static_cast<Index>(basis.size());
    if (err < opts.tol && eim.tolerance_size == 0 && m > 0) eim.tolerance_size = m;
    const bool tol_met = err < opts.tol && m >= opts.min_size;
    if (tol_met || m >= cap || err <= 1e-14 * scale) break;

    const Index p = argmax_abs(R.col(jstar));
    if (taken[static_cast<std::size_t>(p)]) {
      std::ostringstream os;
      os << "eim_build: interpolation row " << p << " selected twice (P^T U singular)";
      throw SingularMatrix(os.str());
    }
    taken[static_cast<std::size_t>(p)] = true;
    Vector q = R.col(jstar) / R(p, jstar);
    const Eigen::RowVectorXd rp = R.row(p);
    R.noalias() -= q * rp;
    R.row(p).setZero();  // exact interpolation at p
    basis.push_back(std::move(q));
    eim.indices.push_back(p);
  }
  const Index m = static_cast<Index>(basis.size());
  if (eim.tolerance_size == 0) eim.tolerance_size = m;
  eim.U.resize(n, m);
  for (Index k = 0; k < m; ++k) eim.U.col(k) = basis[static_cast<std::size_t>(k)];
  eim_refactor(eim);
  if (model) eim_attach_closure(eim, *model);
  return eim;
}

EimData eim_identity(Index n, const FomModel* model) {
  require(n >= 1, "eim_identity: n must be positive");
  EimData eim;
  eim.U = Matrix::Identity(n, n);
  eim.indices.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) eim.indices[static_cast<std::size_t>(i)] = i;
  eim.tolerance_size = n;
  eim.residual_history = {0.0};
  eim_refactor(eim);
  if (model) eim_attach_closure(eim, *model);
  return eim;
}

void eim_attach_closure(EimData& eim, const FomModel& model) {
  require_dims(model.dim() == eim.dim(), "eim: model dimension mismatch");
  std::set<Index> rows;
  std::vector<Index> cols(static_cast<std::size_t>(model.max_stencil()));
  for (Index p : eim.indices) {
    const int k = model.stencil(p, cols.data());
    rows.insert(p);
    for (int s = 0; s < k; ++s) rows.insert(cols[static_cast<std::size_t>(s)]);
  }
  eim.closure.assign(rows.begin(), rows.end());
}

Vector eim_coefficients(const EimData& eim, const Vector& f_at_indices) {
  require_dims(f_at_indices.size() == eim.size(), "eim_coefficients: length mismatch");
  return eim.interp.solve(f_at_indices);
}

Vector eim_interpolate(const EimData& eim, const Vector& f) {
  require_dims(f.size() == eim.dim(), "eim_interpolate: length mismatch");
  Vector ft(eim.size());
  for (Index k = 0; k < eim.size(); ++k) ft[k] = f[eim.indices[static_cast<std::size_t>(k)]];
  return eim.U * eim_coefficients(eim, ft);
}

void save_eim(const std::string& path, const EimData& eim) {
  io::BinaryWriter w(path, "ROMEIM1");
  w.u64(static_cast<std::uint64_t>(eim.dim()));
  w.u64(static_cast<std::uint64_t>(eim.size()));
  w.u64(static_cast<std::uint64_t>(eim.tolerance_size));
  for (Index p : eim.indices) w.u64(static_cast<std::uint64_t>(p));
  w.u64(eim.closure.size());
  for (Index c : eim.closure) w.u64(static_cast<std::uint64_t>(c));
  w.matrix(eim.U);
  w.close();
}

EimData load_eim(const std::string& path) {
  io::BinaryReader r(path, "ROMEIM1");
  EimData eim;
  const auto n = static_cast<Index>(r.u64());
  const auto m = static_cast<Index>(r.u64());
  eim.tolerance_size = static_cast<Index>(r.u64());
  eim.indices.resize(static_cast<std::size_t>(m));
  for (auto& p : eim.indices) p = static_cast<Index>(r.u64());
  const auto c = r.u64();
  eim.closure.resize(c);
  for (auto& v : eim.closure) v = static_cast<Index>(r.u64());
  eim.U = r.matrix(n, m);
  for (Index p : eim.indices) {
    if (p < 0 || p >= n) throw IoError("ROMEIM1: index out of range in '" + path + "'");
  }
  eim_refactor(eim);
  return eim;
}

void export_eim_csv(const std::string& path, const EimData& eim) {
  Matrix t(eim.size(), 1);
  for (Index k = 0; k < eim.size(); ++k) t(k, 0) = static_cast<double>(eim.indices[static_cast<std::size_t>(k)]);
  io::write_csv(path, t, {"index"});
}

}  // namespace romlab
