#include "roms/grom.hpp"

#include "common/error.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

namespace romlab {

GRom::GRom(const FomModel& model, const Matrix& V, std::shared_ptr<const EimData> eim)
    : model_(&model), V_(V), eim_(std::move(eim)), gappy_(model, eim_ ? eim_->indices : std::vector<Index>{}) {
  require(eim_ != nullptr, "galerkin_reduce: missing EIM data");
  require_dims(V.rows() == model.dim(), "galerkin_reduce: basis rows do not match model");
  require_dims(eim_->dim() == model.dim(), "galerkin_reduce: EIM basis rows do not match model");
  require(V.cols() >= 1, "galerkin_reduce: empty basis");
  Er_ = V.transpose() * (model.mass() * V);
  Ar_ = V.transpose() * (model.linear() * V);
  // N = V^T U (P^T U)^{-1}  <=>  N^T = (P^T U)^{-T} U^T V
  const Matrix VtU = V.transpose() * eim_->U;
  Matrix PtU(static_cast<Index>(eim_->indices.size()), eim_->U.cols());
  for (std::size_t k = 0; k < eim_->indices.size(); ++k) PtU.row(static_cast<Index>(k)) = eim_->U.row(eim_->indices[k]);
  N_ = Eigen::PartialPivLU<Matrix>(PtU.transpose()).solve(VtU.transpose()).transpose();
  Vc_ = gappy_.restrict(V);
}

Vector GRom::reduced_initial(const Param& mu) const {
  return V_.transpose() * model_->initial_state(mu);
}

Vector GRom::reduced_source(double t, const Param& mu) const {
  return V_.transpose() * model_->eval_B(t, mu);
}

Vector GRom::reduced_residual(const Vector& z, const Vector& z_prev, double dt, const Param& mu,
                              const Vector& b) const {
  Vector f;
  gappy_.eval(Vc_ * z, mu, f);
  Vector R = Er_ * (z - z_prev) / dt - Ar_ * z - N_ * f - b;
  return R;
}

NewtonResult GRom::step(const Vector& z_prev, double dt, const Param& mu, const Vector& b,
                        const NewtonOptions& opts) const {
  NewtonResult res;
  res.u = z_prev;
  Vector f;
  Matrix G;
  const Matrix M0 = Er_ / dt - Ar_;
  while (true) {
    gappy_.eval_with_jacobian(Vc_ * res.u, mu, Vc_, f, G);
    const Vector R = M0 * res.u - Er_ * z_prev / dt - N_ * f - b;
    const double rn = R.norm();
    res.residual_history.push_back(rn);
    if (rn <= opts.tol) break;
    if (!std::isfinite(rn)) throw NonConvergence("grom: non-finite reduced residual", rn);
    if (res.iterations >= opts.max_iter) {
      std::ostringstream os;
      os << "grom: Newton did not converge in " << opts.max_iter << " iterations, residual "
         << rn;
      throw NonConvergence(os.str(), rn);
    }
    const Matrix J = M0 - N_ * G;
    Eigen::PartialPivLU<Matrix> lu(J);
    res.u -= lu.solve(R);
    ++res.iterations;
  }
  return res;
}

ReducedTrajectory GRom::simulate(const Param& mu, const TimeGrid& tg,
                                 const NewtonOptions& opts) const {
  model_->check_param(mu);
  const auto start = std::chrono::steady_clock::now();
  ReducedTrajectory out;
  out.mu = mu;
  out.Z.resize(r(), tg.size());
  out.Z.col(0) = reduced_initial(mu);
  const bool const_source = model_->source_time_independent();
  Vector b = reduced_source(0.0, mu);  // the only O(n) online cost
  for (Index i = 1; i < tg.size(); ++i) {
    if (!const_source) b = reduced_source(tg.time(i), mu);
    try {
      NewtonResult res = step(out.Z.col(i - 1), tg.dt(), mu, b, opts);
      out.Z.col(i) = res.u;
      out.iterations += res.iterations;
    } catch (const NonConvergence& e) {
      throw NonConvergence(std::string(e.what()) + " at time step " + std::to_string(i),
                           e.residual_norm(), static_cast<long>(i));
    }
  }
  out.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

ReducedTrajectory grom_simulate(const GRom& rom, const Param& mu, const TimeGrid& tg,
                                const NewtonOptions& opts) {
  return rom.simulate(mu, tg, opts);
}

}  // namespace romlab
