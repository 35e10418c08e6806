#include "fom/burgers.hpp"

#include "common/error.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace romlab {

namespace {

SparseMatrix identity(Index n) {
  SparseMatrix I(n, n);
  I.setIdentity();
  return I;
}

}  // namespace

// --- 1D ---------------------------------------------------------------------

Burgers1d::Burgers1d(const Burgers1dConfig& cfg, const TimeGrid& tg) : cfg_(cfg) {
  require(cfg.elements >= 3, "burgers1d: element count must be >= 3");
  require(cfg.boundary == BoundaryKind::kPeriodic, "burgers1d: only periodic boundaries");
  require(cfg.length > 0.0, "burgers1d: domain length must be positive");
  n_ = cfg.elements;  // periodic closure drops the duplicate endpoint
  dx_ = cfg.length / static_cast<double>(cfg.elements);
  grid_.dimensionality = 1;
  grid_.elements = {cfg.elements, 0};
  grid_.points_per_axis = {n_, 0};
  grid_.spacing = {dx_, 0.0};
  grid_.domain_length = {cfg.length, 0.0};
  grid_.boundary = BoundaryKind::kPeriodic;
  time_grid_ = tg;
  mass_ = identity(n_);
  linear_ = SparseMatrix(n_, n_);
}

void Burgers1d::check_param(const Param& mu) const {
  require(mu.size() == 1, "burgers1d: expects one parameter");
  require(std::isfinite(mu[0]), "burgers1d: non-finite parameter");
  if (cfg_.strict_bounds && (mu[0] < 0.9 || mu[0] > 1.1)) {
    throw InvalidArgument("burgers1d: mu outside [0.9, 1.1]");
  }
}

Vector Burgers1d::eval_B(double, const Param&) const { return Vector::Zero(n_); }

Vector Burgers1d::initial_state(const Param& mu) const {
  check_param(mu);
  Vector u0(n_);
  const double pi = std::numbers::pi;
  for (Index i = 0; i < n_; ++i) {
    const double x = static_cast<double>(i) * dx_;
    if (x > 1.0) {
      u0[i] = 1.0;
      continue;
    }
    const double s = std::sin(2.0 * pi * x - pi / 2.0);
    u0[i] = cfg_.ic == InitialCondition::kContinuous ? 1.0 + 0.5 * mu[0] * (s + 1.0)
                                                      : 1.0 + 0.5 * mu[0] * s + 1.0;
  }
  return u0;
}

int Burgers1d::stencil(Index row, Index* cols) const {
  cols[0] = row;
  cols[1] = row == 0 ? n_ - 1 : row - 1;
  return 2;
}

double Burgers1d::f_row(Index, const double* v, const Param&) const {
  return -v[0] * (v[0] - v[1]) / dx_;
}

double Burgers1d::f_row_grad(Index, const double* v, const Param&, double* g) const {
  g[0] = -(2.0 * v[0] - v[1]) / dx_;
  g[1] = v[0] / dx_;
  return -v[0] * (v[0] - v[1]) / dx_;
}

std::unique_ptr<FomModel> build_burgers1d(const Burgers1dConfig& cfg, const TimeGrid& tg) {
  return std::make_unique<Burgers1d>(cfg, tg);
}

// --- 2D ---------------------------------------------------------------------

// Slots: 0 ux_c, 1 ux_w, 2 ux_s, 3 uy_c, 4 uy_w, 5 uy_s (w = x - h, s = y - h).
struct Burgers2d::Local {
  double v[6];
  bool ghost[6];
  bool is_x_row;
};

Burgers2d::Burgers2d(const Burgers2dConfig& cfg, const TimeGrid& tg) : cfg_(cfg) {
  require(cfg.elements >= 3, "burgers2d: element count must be >= 3");
  require(cfg.length > 0.0, "burgers2d: domain length must be positive");
  m_ = cfg.elements - 1;
  h_ = cfg.length / static_cast<double>(cfg.elements);
  n_ = 2 * m_ * m_;
  grid_.dimensionality = 2;
  grid_.elements = {cfg.elements, cfg.elements};
  grid_.points_per_axis = {m_, m_};
  grid_.spacing = {h_, h_};
  grid_.domain_length = {cfg.length, cfg.length};
  grid_.boundary = BoundaryKind::kDirichletGhost;
  time_grid_ = tg;
  mass_ = identity(n_);
  linear_ = SparseMatrix(n_, n_);
}

void Burgers2d::check_param(const Param& mu) const {
  require(mu.size() == 2, "burgers2d: expects two parameters");
  require(std::isfinite(mu[0]) && std::isfinite(mu[1]), "burgers2d: non-finite parameter");
  if (cfg_.strict_bounds &&
      (mu[0] < 4.25 || mu[0] > 5.50 || mu[1] < 0.015 || mu[1] > 0.03)) {
    std::ostringstream os;
    os << "burgers2d: mu = (" << mu[0] << ", " << mu[1]
       << ") outside [4.25, 5.50] x [0.015, 0.03]";
    throw InvalidArgument(os.str());
  }
}

Vector Burgers2d::eval_B(double, const Param& mu) const {
  require(mu.size() == 2, "burgers2d: expects two parameters");
  Vector B = Vector::Zero(n_);
  for (Index j = 0; j < m_; ++j) {
    for (Index i = 0; i < m_; ++i) {
      const double x = static_cast<double>(i + 1) * h_;
      B[j * m_ + i] = cfg_.source_amplitude * std::exp(mu[1] * x);
    }
  }
  return B;
}

Vector Burgers2d::initial_state(const Param& mu) const {
  check_param(mu);
  return Vector::Ones(n_);
}

int Burgers2d::stencil(Index row, Index* cols) const {
  const Index mm = m_ * m_;
  const Index p = row < mm ? row : row - mm;
  const Index i = p % m_;
  const Index j = p / m_;
  int k = 0;
  // ux_c, ux_w, ux_s, uy_c, uy_w, uy_s; ghosts are skipped
  cols[k++] = p;
  if (i > 0) cols[k++] = p - 1;
  if (j > 0) cols[k++] = p - m_;
  cols[k++] = mm + p;
  if (i > 0) cols[k++] = mm + p - 1;
  if (j > 0) cols[k++] = mm + p - m_;
  return k;
}

Burgers2d::Local Burgers2d::gather(Index row, const double* vals, const Param& mu) const {
  const Index mm = m_ * m_;
  const Index p = row < mm ? row : row - mm;
  const bool west_ghost = (p % m_) == 0;
  const bool south_ghost = (p / m_) == 0;
  Local L{};
  L.is_x_row = row < mm;
  L.ghost[0] = false;
  L.ghost[1] = west_ghost;
  L.ghost[2] = south_ghost;
  L.ghost[3] = false;
  L.ghost[4] = west_ghost;
  L.ghost[5] = south_ghost;
  int k = 0;
  for (int s = 0; s < 6; ++s) {
    if (!L.ghost[s]) {
      L.v[s] = vals[k++];
    } else {
      // u_x = mu_1 on the inflow edge x = 0, every other ghost is zero.
      L.v[s] = (s == 1) ? mu[0] : 0.0;
    }
  }
  return L;
}

double Burgers2d::f_row(Index row, const double* vals, const Param& mu) const {
  const Local L = gather(row, vals, mu);
  const double* v = L.v;
  const double h = h_;
  if (cfg_.form == ConvectiveForm::kConservative) {
    if (L.is_x_row) {
      return -((v[0] * v[0] - v[1] * v[1]) + (v[0] * v[3] - v[2] * v[5])) / (2.0 * h);
    }
    return -((v[3] * v[3] - v[5] * v[5]) + (v[0] * v[3] - v[1] * v[4])) / (2.0 * h);
  }
  if (L.is_x_row) return -(v[0] * (v[0] - v[1]) + v[3] * (v[0] - v[2])) / h;
  return -(v[0] * (v[3] - v[4]) + v[3] * (v[3] - v[5])) / h;
}

double Burgers2d::f_row_grad(Index row, const double* vals, const Param& mu,
                             double* grad) const {
  const Local L = gather(row, vals, mu);
  const double* v = L.v;
  const double h = h_;
  double g[6] = {0, 0, 0, 0, 0, 0};
  if (cfg_.form == ConvectiveForm::kConservative) {
    const double c = 1.0 / (2.0 * h);
    if (L.is_x_row) {
      g[0] = -(2.0 * v[0] + v[3]) * c;
      g[1] = 2.0 * v[1] * c;
      g[2] = v[5] * c;
      g[3] = -v[0] * c;
      g[5] = v[2] * c;
    } else {
      g[3] = -(2.0 * v[3] + v[0]) * c;
      g[5] = 2.0 * v[5] * c;
      g[0] = -v[3] * c;
      g[1] = v[4] * c;
      g[4] = v[1] * c;
    }
  } else {
    if (L.is_x_row) {
      g[0] = -((2.0 * v[0] - v[1]) + v[3]) / h;
      g[1] = v[0] / h;
      g[2] = v[3] / h;
      g[3] = -(v[0] - v[2]) / h;
    } else {
      g[3] = -(v[0] + 2.0 * v[3] - v[5]) / h;
      g[4] = v[0] / h;
      g[5] = v[3] / h;
      g[0] = -(v[3] - v[4]) / h;
    }
  }
  int k = 0;
  for (int s = 0; s < 6; ++s) {
    if (!L.ghost[s]) grad[k++] = g[s];
  }
  return f_row(row, vals, mu);
}

std::vector<int> Burgers2d::elimination_order() const {
  const Index mm = m_ * m_;
  std::vector<int> order(static_cast<std::size_t>(n_));
  for (Index p = 0; p < mm; ++p) {
    order[2 * p] = static_cast<int>(p);
    order[2 * p + 1] = static_cast<int>(mm + p);
  }
  return order;
}

std::unique_ptr<FomModel> build_burgers2d(const Burgers2dConfig& cfg, const TimeGrid& tg) {
  return std::make_unique<Burgers2d>(cfg, tg);
}

}  // namespace romlab
