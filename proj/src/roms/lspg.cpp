#include "roms/lspg.hpp"

#include "common/error.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

namespace romlab {

std::vector<Index> lspg_sample_rows(const EimData& eim, const Matrix& V, double oversample) {
  require(oversample >= 1.0, "lspg: oversampling factor must be >= 1");
  const Index n = V.rows();
  const Index want = std::min<Index>(
      n, std::max<Index>(eim.tolerance_size,
                         static_cast<Index>(std::ceil(oversample * static_cast<double>(V.cols())))));
  std::vector<Index> rows(eim.indices.begin(),
                          eim.indices.begin() + std::min<Index>(want, eim.size()));
  if (static_cast<Index>(rows.size()) < want) {
    std::vector<bool> used(static_cast<std::size_t>(n), false);
    for (Index r : rows) used[static_cast<std::size_t>(r)] = true;
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    const Vector lev = V.rowwise().squaredNorm();
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return lev[a] > lev[b]; });
    for (Index r : order) {
      if (static_cast<Index>(rows.size()) >= want) break;
      if (!used[static_cast<std::size_t>(r)]) rows.push_back(r);
    }
  }
  std::sort(rows.begin(), rows.end());
  return rows;
}

LspgRom::LspgRom(const FomModel& model, const Matrix& V, std::vector<Index> sample_rows)
    : model_(&model), V_(V), gappy_(model, std::move(sample_rows)) {
  require_dims(V.rows() == model.dim(), "lspg: basis rows do not match model");
  require(V.cols() >= 1, "lspg: empty basis");
  require(gappy_.size() >= V.cols(), "lspg: need at least r sample rows (got " +
                                         std::to_string(gappy_.size()) + " for r = " +
                                         std::to_string(V.cols()) + ")");
  Vc_ = gappy_.restrict(V);
  const Matrix EV = model.mass() * V;
  const Matrix AV = model.linear() * V;
  EVs_.resize(gappy_.size(), V.cols());
  AVs_.resize(gappy_.size(), V.cols());
  for (Index k = 0; k < gappy_.size(); ++k) {
    EVs_.row(k) = EV.row(gappy_.rows()[static_cast<std::size_t>(k)]);
    AVs_.row(k) = AV.row(gappy_.rows()[static_cast<std::size_t>(k)]);
  }
}

LspgRom::StepResult LspgRom::step(const Vector& z_prev, double, double dt, const Param& mu,
                                  const Vector& B_s, const NewtonOptions& opts) const {
  StepResult res;
  res.z = z_prev;
  Vector f;
  Matrix G;
  const Vector Ez_prev = EVs_ * z_prev / dt;
  const Matrix M0 = EVs_ / dt - AVs_;
  while (true) {
    gappy_.eval_with_jacobian(Vc_ * res.z, mu, Vc_, f, G);
    const Vector rs = M0 * res.z - Ez_prev - f - B_s;
    const Matrix JV = M0 - G;
    res.residual = rs.norm();
    res.stationarity = (JV.transpose() * rs).norm();
    if (!std::isfinite(res.residual)) {
      throw NonConvergence("lspg: non-finite residual", res.residual);
    }
    if (res.residual <= opts.tol || res.stationarity <= opts.tol * res.residual) break;
    if (res.iterations >= opts.max_iter) {
      std::ostringstream os;
      os << "lspg: Gauss-Newton did not converge in " << opts.max_iter
         << " iterations, residual " << res.residual << ", stationarity " << res.stationarity;
      throw NonConvergence(os.str(), res.residual);
    }
    Eigen::HouseholderQR<Matrix> qr(JV);
    const Matrix R = qr.matrixQR().topRows(JV.cols()).triangularView<Eigen::Upper>();
    const double rmax = R.diagonal().cwiseAbs().maxCoeff();
    const double rmin = R.diagonal().cwiseAbs().minCoeff();
    if (!(rmin > 1e-13 * rmax)) {
      Eigen::JacobiSVD<Matrix> svd(JV);
      std::ostringstream os;
      os << "lspg: rank-deficient least-squares system, smallest singular value "
         << svd.singularValues()(svd.singularValues().size() - 1);
      throw SingularMatrix(os.str());
    }
    res.z -= qr.solve(rs);
    ++res.iterations;
  }
  return res;
}

ReducedTrajectory LspgRom::simulate(const Param& mu, const TimeGrid& tg,
                                    const NewtonOptions& opts) const {
  model_->check_param(mu);
  const auto start = std::chrono::steady_clock::now();
  ReducedTrajectory out;
  out.mu = mu;
  out.Z.resize(r(), tg.size());
  out.Z.col(0) = V_.transpose() * model_->initial_state(mu);
  const bool const_source = model_->source_time_independent();
  auto sampled_source = [&](double t) {
    const Vector B = model_->eval_B(t, mu);
    Vector Bs(gappy_.size());
    for (Index k = 0; k < gappy_.size(); ++k) Bs[k] = B[gappy_.rows()[static_cast<std::size_t>(k)]];
    return Bs;
  };
  Vector Bs = sampled_source(0.0);
  for (Index i = 1; i < tg.size(); ++i) {
    if (!const_source) Bs = sampled_source(tg.time(i));
    try {
      StepResult res = step(out.Z.col(i - 1), tg.time(i), tg.dt(), mu, Bs, opts);
      out.Z.col(i) = res.z;
      out.iterations += res.iterations;
    } catch (const NonConvergence& e) {
      throw NonConvergence(std::string(e.what()) + " at time step " + std::to_string(i),
                           e.residual_norm(), static_cast<long>(i));
    }
  }
  out.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

ReducedTrajectory lspg_simulate(const FomModel& model, const Matrix& V,
                                const std::vector<Index>& sample_rows, const Param& mu,
                                const TimeGrid& tg, const NewtonOptions& opts) {
  LspgRom rom(model, V, sample_rows);
  return rom.simulate(mu, tg, opts);
}

}  // namespace romlab
