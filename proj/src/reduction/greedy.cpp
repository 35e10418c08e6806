#include "reduction/greedy.hpp"

#include "common/binio.hpp"
#include "common/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace romlab {

const char* to_string(RomKind kind) { return kind == RomKind::kLspg ? "lspg" : "galerkin"; }

RomKind rom_kind_from_string(const std::string& s) {
  if (s == "galerkin" || s == "grom") return RomKind::kGalerkin;
  if (s == "lspg") return RomKind::kLspg;
  throw InvalidArgument("unknown ROM kind '" + s + "'");
}

double residual_estimate(const FomModel& model, const Matrix& V, const ReducedTrajectory& traj,
                         const TimeGrid& tg, bool max_over_time) {
  const Index nt = traj.Z.cols();
  require(nt >= 2, "error_estimator: need at least two time instances");
  auto at = [&](Index i) {
    const Vector u = V * traj.Z.col(i);
    const Vector u_prev = V * traj.Z.col(i - 1);
    return semidiscrete_residual(model, u, u_prev, tg.time(i), tg.dt(), traj.mu).norm();
  };
  if (!max_over_time) return at(nt - 1);
  double eta = 0.0;
  for (Index i = 1; i < nt; ++i) eta = std::max(eta, at(i));
  return eta;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <typename Rom>
double estimate(const Rom& rom, const FomModel& model, const Param& mu, const TimeGrid& tg,
                const NewtonOptions& opts, bool max_over_time) {
  ReducedTrajectory traj;
  try {
    traj = rom.simulate(mu, tg, opts);
  } catch (const NonConvergence&) {
    return kInf;
  } catch (const SingularMatrix&) {
    return kInf;
  }
  const double eta = residual_estimate(model, rom.basis(), traj, tg, max_over_time);
  if (std::isnan(eta)) {
    std::ostringstream os;
    os << "error_estimator: non-finite estimate at mu = (";
    for (std::size_t k = 0; k < mu.size(); ++k) os << (k ? ", " : "") << mu[k];
    os << ")";
    throw NumericError(os.str());
  }
  return eta;
}

}  // namespace

double error_estimator(const GRom& rom, const Param& mu, const TimeGrid& tg,
                       const NewtonOptions& opts, bool max_over_time) {
  return estimate(rom, rom.model(), mu, tg, opts, max_over_time);
}

double error_estimator(const LspgRom& rom, const FomModel& model, const Param& mu,
                       const TimeGrid& tg, const NewtonOptions& opts, bool max_over_time) {
  return estimate(rom, model, mu, tg, opts, max_over_time);
}

GreedyResult pod_greedy(const FomModel& model, const std::vector<Param>& train,
                        const std::vector<Matrix>& snapshots, std::shared_ptr<const EimData> hyper,
                        const TimeGrid& tg, const GreedyOptions& opts) {
  require(!train.empty(), "pod_greedy: empty training set");
  require(train.size() == snapshots.size(), "pod_greedy: one snapshot block per parameter");
  require(hyper != nullptr, "pod_greedy: missing hyper-reduction data");
  require(opts.r_max >= 1, "pod_greedy: r_max must be >= 1");
  require(opts.r_s >= 1 || opts.tol_svd > 0.0, "pod_greedy: need r_s >= 1 or tol_svd > 0");
  for (const auto& X : snapshots) {
    require_dims(X.rows() == model.dim(), "pod_greedy: snapshot rows do not match model");
  }

  GreedyResult out;
  Matrix Vt(model.dim(), 0);
  Index star = 0;
  Index repeat_run = 0;
  double prev_eta = kInf;

  for (Index it = 1;; ++it) {
    // Deflate and enrich.
    Matrix X = snapshots[static_cast<std::size_t>(star)];
    const double x_norm = X.norm();
    if (Vt.cols() > 0) X -= Vt * (Vt.transpose() * X);
    if (X.norm() <= 1e-12 * x_norm) {
      out.report.stopping_reason = "snapshots of the selected parameter are fully captured";
      break;
    }
    const ThinSvd svd = thin_svd(X);
    Index rs = opts.r_s >= 1 ? opts.r_s : truncation_rank(svd.sigma, opts.tol_svd);
    rs = std::min<Index>(rs, svd.U.cols());
    rs = std::min<Index>(rs, opts.r_max - Vt.cols());
    Vt = append_orthonormal(Vt, svd.U.leftCols(rs));
    if (std::find(out.selected_indices.begin(), out.selected_indices.end(), star) ==
        out.selected_indices.end()) {
      out.selected_indices.push_back(star);
    }

    // Rebuild the hyper-reduced ROM and sweep the estimator.
    GreedyIteration rec;
    rec.iteration = it;
    rec.enriched_index = star;
    rec.added = rs;
    rec.basis_size = Vt.cols();
    rec.estimates.resize(train.size());
    if (opts.kind == RomKind::kGalerkin) {
      GRom rom(model, Vt, hyper);
      for (std::size_t k = 0; k < train.size(); ++k) {
        rec.estimates[k] = error_estimator(rom, train[k], tg, opts.newton, opts.max_over_time);
      }
    } else {
      LspgRom rom(model, Vt, lspg_sample_rows(*hyper, Vt, opts.lspg_oversample));
      for (std::size_t k = 0; k < train.size(); ++k) {
        rec.estimates[k] =
            error_estimator(rom, model, train[k], tg, opts.newton, opts.max_over_time);
      }
    }
    Index next = 0;
    for (std::size_t k = 1; k < train.size(); ++k) {
      if (rec.estimates[k] > rec.estimates[static_cast<std::size_t>(next)]) next = static_cast<Index>(k);
    }
    rec.selected_index = next;
    rec.eta_max = rec.estimates[static_cast<std::size_t>(next)];
    out.report.iterations.push_back(rec);

    if (rec.eta_max <= opts.tol_rb) {
      out.report.stopping_reason = "estimator below tolerance";
      break;
    }
    if (Vt.cols() >= opts.r_max) {
      out.report.stopping_reason = "basis size reached r_max";
      break;
    }
    // Convection problems legitimately re-select a parameter; abort only when
    // it keeps coming back while the estimator stops going down.
    if (next == star && rec.eta_max >= prev_eta) {
      ++repeat_run;
    } else {
      repeat_run = 0;
    }
    prev_eta = rec.eta_max;
    if (repeat_run > opts.repeat_limit) {
      std::ostringstream os;
      os << "pod_greedy: parameter index " << next << " selected " << repeat_run
         << " consecutive times without estimator decrease (eta = " << rec.eta_max << ")";
      throw NumericError(os.str());
    }
    star = next;
  }

  out.basis.V = Vt;
  out.basis.mode = BasisMode::kGreedyDirect;
  for (Index k : out.selected_indices) out.basis.selected_parameters.push_back(train[static_cast<std::size_t>(k)]);
  return out;
}

void write_greedy_report_csv(const std::string& path, const GreedyReport& report,
                             const std::vector<Param>& train) {
  const std::size_t p = train.empty() ? 0 : train.front().size();
  std::vector<std::string> header{"iteration", "mu_index"};
  for (std::size_t k = 0; k < p; ++k) header.push_back("mu_" + std::to_string(k));
  header.push_back("eta");
  header.push_back("r_tilde");
  Matrix t(static_cast<Index>(report.iterations.size()), static_cast<Index>(header.size()));
  for (std::size_t i = 0; i < report.iterations.size(); ++i) {
    const auto& it = report.iterations[i];
    Index c = 0;
    const auto row = static_cast<Index>(i);
    t(row, c++) = static_cast<double>(it.iteration);
    t(row, c++) = static_cast<double>(it.selected_index);
    for (std::size_t k = 0; k < p; ++k) t(row, c++) = train[static_cast<std::size_t>(it.selected_index)][k];
    t(row, c++) = it.eta_max;
    t(row, c++) = static_cast<double>(it.basis_size);
  }
  io::write_csv(path, t, header);
}

ReducedBasis build_model_basis(const GreedyResult& greedy, const std::vector<Param>& train,
                               const std::vector<Matrix>& snapshots, BasisMode mode, Index r) {
  require(r >= 1, "build_model_basis: r must be >= 1");
  ReducedBasis out;
  out.mode = mode;
  switch (mode) {
    case BasisMode::kGreedyDirect: {
      require(r <= greedy.basis.rank(), "build_model_basis: r = " + std::to_string(r) +
                                            " exceeds greedy basis size " +
                                            std::to_string(greedy.basis.rank()));
      out.V = greedy.basis.V.leftCols(r);
      out.selected_parameters = greedy.basis.selected_parameters;
      return out;
    }
    case BasisMode::kGreedyThenSvd: {
      require(!greedy.selected_indices.empty(), "build_model_basis: greedy selected nothing");
      std::vector<Index> sel = greedy.selected_indices;
      std::sort(sel.begin(), sel.end());
      Index cols = 0;
      for (Index k : sel) cols += snapshots[static_cast<std::size_t>(k)].cols();
      Matrix Xs(snapshots.front().rows(), cols);
      Index c = 0;
      for (Index k : sel) {
        const auto& X = snapshots[static_cast<std::size_t>(k)];
        Xs.middleCols(c, X.cols()) = X;
        c += X.cols();
        out.selected_parameters.push_back(train[static_cast<std::size_t>(k)]);
      }
      ReducedBasis b = pod_basis(Xs, Truncation::fixed(r));
      out.V = std::move(b.V);
      out.singular_values = std::move(b.singular_values);
      return out;
    }
    case BasisMode::kAllSnapshotsSvd:
    case BasisMode::kPod: {
      Index cols = 0;
      for (const auto& X : snapshots) cols += X.cols();
      Matrix Xa(snapshots.front().rows(), cols);
      Index c = 0;
      for (const auto& X : snapshots) {
        Xa.middleCols(c, X.cols()) = X;
        c += X.cols();
      }
      ReducedBasis b = pod_basis(Xa, Truncation::fixed(r));
      out.V = std::move(b.V);
      out.singular_values = std::move(b.singular_values);
      out.selected_parameters = train;
      out.mode = BasisMode::kAllSnapshotsSvd;
      return out;
    }
  }
  return out;
}

}  // namespace romlab
