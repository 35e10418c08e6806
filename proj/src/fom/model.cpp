#include "fom/model.hpp"

#include "common/error.hpp"

#include <Eigen/SparseLU>

#include <chrono>
#include <cmath>
#include <sstream>

namespace romlab {

Vector FomModel::apply_E(const Vector& x) const {
  require_dims(x.size() == n_, "apply_E: dimension mismatch");
  return mass_ * x;
}

Vector FomModel::apply_A(const Vector& x) const {
  require_dims(x.size() == n_, "apply_A: dimension mismatch");
  return linear_ * x;
}

Vector FomModel::eval_f(const Vector& u, const Param& mu) const {
  Vector out(n_);
  eval_f(u, mu, out);
  return out;
}

void FomModel::eval_f(const Vector& u, const Param& mu, Vector& out) const {
  require_dims(u.size() == n_, "eval_f: state dimension mismatch");
  out.resize(n_);
  std::vector<Index> cols(max_stencil());
  std::vector<double> vals(max_stencil());
  for (Index row = 0; row < n_; ++row) {
    const int k = stencil(row, cols.data());
    for (int s = 0; s < k; ++s) vals[s] = u[cols[s]];
    out[row] = f_row(row, vals.data(), mu);
  }
}

SparseMatrix FomModel::jac_f(const Vector& u, const Param& mu) const {
  require_dims(u.size() == n_, "jac_f: state dimension mismatch");
  std::vector<Triplet> trips;
  trips.reserve(static_cast<std::size_t>(n_) * max_stencil());
  std::vector<Index> cols(max_stencil());
  std::vector<double> vals(max_stencil());
  std::vector<double> grad(max_stencil());
  for (Index row = 0; row < n_; ++row) {
    const int k = stencil(row, cols.data());
    for (int s = 0; s < k; ++s) vals[s] = u[cols[s]];
    f_row_grad(row, vals.data(), mu, grad.data());
    for (int s = 0; s < k; ++s) trips.emplace_back(row, cols[s], grad[s]);
  }
  SparseMatrix J(n_, n_);
  J.setFromTriplets(trips.begin(), trips.end());
  return J;
}

SparseMatrix FomModel::jac_pattern() const {
  std::vector<Triplet> trips;
  std::vector<Index> cols(max_stencil());
  for (Index row = 0; row < n_; ++row) {
    const int k = stencil(row, cols.data());
    for (int s = 0; s < k; ++s) trips.emplace_back(row, cols[s], 1.0);
  }
  SparseMatrix P(n_, n_);
  P.setFromTriplets(trips.begin(), trips.end(), [](double a, double) { return a; });
  return P;
}

Vector semidiscrete_residual(const FomModel& model, const Vector& u, const Vector& u_prev,
                             double t, double dt, const Param& mu) {
  require_dims(u.size() == model.dim() && u_prev.size() == model.dim(),
               "semidiscrete_residual: dimension mismatch");
  require(dt > 0.0, "semidiscrete_residual: dt must be positive");
  Vector r = model.mass() * (u - u_prev) / dt;
  r.noalias() -= model.linear() * u;
  r -= model.eval_f(u, mu);
  r -= model.eval_B(t, mu);
  return r;
}

namespace {

using ColSparse = Eigen::SparseMatrix<double, Eigen::ColMajor>;

// Reuses the symbolic factorization across Newton iterations and time steps.
class BackwardEulerSolver {
 public:
  BackwardEulerSolver(const FomModel& model, double dt)
      : model_(model), dt_(dt), order_(model.elimination_order()) {
    if (!order_.empty()) {
      // perm_ sends original index order_[k] to position k
      perm_.resize(static_cast<Index>(order_.size()));
      for (std::size_t k = 0; k < order_.size(); ++k) perm_.indices()[order_[k]] = static_cast<int>(k);
    }
  }

  NewtonResult step(const Vector& u_prev, double t, const Param& mu, const NewtonOptions& opts,
                    const Vector* source = nullptr) {
    NewtonResult res;
    res.u = u_prev;
    const Vector B = source ? *source : model_.eval_B(t, mu);
    Vector r = residual(res.u, u_prev, B, mu);
    double rn = r.norm();
    res.residual_history.push_back(rn);
    while (rn > opts.tol) {
      if (!std::isfinite(rn)) {
        throw NonConvergence("newton_step: non-finite residual", rn);
      }
      if (res.iterations >= opts.max_iter) {
        std::ostringstream os;
        os << "newton_step: no convergence after " << opts.max_iter
           << " iterations, residual norm " << rn;
        throw NonConvergence(os.str(), rn);
      }
      factorize(res.u, mu);
      Vector delta = solve(-r);
      res.u += delta;
      ++res.iterations;
      r = residual(res.u, u_prev, B, mu);
      rn = r.norm();
      res.residual_history.push_back(rn);
    }
    return res;
  }

 private:
  Vector residual(const Vector& u, const Vector& u_prev, const Vector& B, const Param& mu) const {
    Vector r = model_.mass() * (u - u_prev) / dt_;
    r.noalias() -= model_.linear() * u;
    r -= model_.eval_f(u, mu);
    r -= B;
    return r;
  }

  void factorize(const Vector& u, const Param& mu) {
    SparseMatrix M = model_.mass() / dt_ - model_.linear() - model_.jac_f(u, mu);
    ColSparse Mc(M);
    if (!order_.empty()) Mc = ColSparse(perm_ * Mc * perm_.inverse());
    Mc.makeCompressed();
    if (!order_.empty()) {
      factorize_with(natural_lu_, Mc);
    } else {
      factorize_with(colamd_lu_, Mc);
    }
  }

  template <typename Lu>
  void factorize_with(Lu& lu, const ColSparse& Mc) {
    if (!analyzed_ || Mc.nonZeros() != pattern_nnz_) {
      lu.analyzePattern(Mc);
      analyzed_ = true;
      pattern_nnz_ = Mc.nonZeros();
    }
    lu.factorize(Mc);
    if (lu.info() != Eigen::Success) {
      throw SingularMatrix("newton_step: singular Jacobian (" + lu.lastErrorMessage() + ")");
    }
  }

  Vector solve(const Vector& rhs) {
    if (order_.empty()) {
      Vector x = colamd_lu_.solve(rhs);
      if (colamd_lu_.info() != Eigen::Success) throw SingularMatrix("newton_step: solve failed");
      return x;
    }
    Vector y = natural_lu_.solve(perm_ * rhs);
    if (natural_lu_.info() != Eigen::Success) throw SingularMatrix("newton_step: solve failed");
    return perm_.inverse() * y;
  }

  const FomModel& model_;
  double dt_;
  std::vector<int> order_;
  Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> perm_;
  Eigen::SparseLU<ColSparse, Eigen::COLAMDOrdering<int>> colamd_lu_;
  Eigen::SparseLU<ColSparse, Eigen::NaturalOrdering<int>> natural_lu_;
  bool analyzed_ = false;
  Index pattern_nnz_ = 0;
};

}  // namespace

NewtonResult newton_step(const FomModel& model, const Vector& u_prev, double t, double dt,
                         const Param& mu, const NewtonOptions& opts) {
  require_dims(u_prev.size() == model.dim(), "newton_step: dimension mismatch");
  require(opts.tol > 0.0, "newton_step: tolerance must be positive");
  require(dt > 0.0, "newton_step: dt must be positive");
  require(u_prev.allFinite(), "newton_step: non-finite previous state");
  BackwardEulerSolver solver(model, dt);
  return solver.step(u_prev, t, mu, opts);
}

SnapshotTrajectory simulate_fom(const FomModel& model, const Param& mu, const TimeGrid& tg,
                                const NewtonOptions& opts) {
  model.check_param(mu);
  const auto start = std::chrono::steady_clock::now();
  SnapshotTrajectory traj;
  traj.mu = mu;
  traj.time_grid = tg;
  traj.states.resize(model.dim(), tg.size());
  traj.states.col(0) = model.initial_state(mu);
  BackwardEulerSolver solver(model, tg.dt());
  const bool const_source = model.source_time_independent();
  Vector B;
  if (const_source) B = model.eval_B(0.0, mu);
  for (Index i = 1; i < tg.size(); ++i) {
    try {
      NewtonResult res = solver.step(traj.states.col(i - 1), tg.time(i), mu, opts,
                                     const_source ? &B : nullptr);
      traj.states.col(i) = res.u;
      traj.newton_iterations += res.iterations;
    } catch (const NonConvergence& e) {
      throw NonConvergence(std::string(e.what()) + " at time step " + std::to_string(i),
                           e.residual_norm(), static_cast<long>(i));
    }
  }
  traj.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return traj;
}

}  // namespace romlab
