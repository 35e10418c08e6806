#include "fom/burgers.hpp"
#include "fom/trajectory_io.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace romlab {
namespace {

std::unique_ptr<FomModel> small1d(Index n = 64, Index nt = 20) {
  Burgers1dConfig c;
  c.elements = n;
  return build_burgers1d(c, TimeGrid(0.5, nt));
}

std::unique_ptr<FomModel> small2d(Index elements = 9, Index nt = 10) {
  Burgers2dConfig c;
  c.elements = elements;
  return build_burgers2d(c, TimeGrid(25.0, nt));
}

// Central-difference Jacobian of f, column by column.
Matrix fd_jacobian(const FomModel& m, const Vector& u, const Param& mu) {
  const Index n = m.dim();
  Matrix J(n, n);
  for (Index j = 0; j < n; ++j) {
    const double h = 1e-6 * std::max(1.0, std::abs(u[j]));
    Vector up = u, um = u;
    up[j] += h;
    um[j] -= h;
    J.col(j) = (m.eval_f(up, mu) - m.eval_f(um, mu)) / (2 * h);
  }
  return J;
}

TEST(TimeGrid, UniformInstances) {
  TimeGrid tg(0.5, 500);
  EXPECT_DOUBLE_EQ(tg.dt(), 0.001);
  EXPECT_DOUBLE_EQ(tg.time(0), 0.0);
  EXPECT_NEAR(tg.time(499), 0.499, 1e-15);
  EXPECT_EQ(tg.size(), 500);
}

TEST(Burgers1d, InitialConditionProfile) {
  auto m = small1d(1000);
  const Vector u0 = m->initial_state({1.0});
  // x = 0: sin(-pi/2) = -1 -> 1; x = 0.5: sin(pi/2) = 1 -> 2; x > 1 -> 1
  EXPECT_NEAR(u0[0], 1.0, 1e-14);
  EXPECT_NEAR(u0[250], 2.0, 1e-14);
  EXPECT_NEAR(u0[750], 1.0, 1e-14);
  EXPECT_EQ(m->dim(), 1000);
}

TEST(Burgers1d, NonlinearityMatchesUpwindFormula) {
  auto m = small1d(16);
  const Vector u = test::random_matrix(16, 1, 3).col(0).array() + 2.0;
  const Vector f = m->eval_f(u, {1.0});
  const double dx = 2.0 / 16;
  for (Index i = 0; i < 16; ++i) {
    const double um = u[(i + 15) % 16];
    EXPECT_NEAR(f[i], -u[i] * (u[i] - um) / dx, 1e-12);
  }
}

TEST(Burgers1d, JacobianMatchesFiniteDifferences) {
  auto m = small1d(32);
  const Vector u = test::random_matrix(32, 1, 5).col(0).array() + 1.5;
  const Matrix J = Matrix(m->jac_f(u, {1.0}));
  EXPECT_LT((J - fd_jacobian(*m, u, {1.0})).norm() / J.norm(), 1e-8);
}

TEST(Burgers2d, JacobianMatchesFiniteDifferences) {
  for (auto form : {ConvectiveForm::kConservative, ConvectiveForm::kNonconservative}) {
    Burgers2dConfig c;
    c.elements = 7;
    c.form = form;
    auto m = build_burgers2d(c, TimeGrid(25.0, 10));
    const Param mu{4.5, 0.02};
    const Vector u = test::random_matrix(m->dim(), 1, 9).col(0).array() + 2.0;
    const Matrix J = Matrix(m->jac_f(u, mu));
    EXPECT_LT((J - fd_jacobian(*m, u, mu)).norm() / J.norm(), 1e-8);
  }
}

TEST(Burgers2d, StateLayoutAndBounds) {
  auto m = small2d(9);
  EXPECT_EQ(m->dim(), 8 * 8 * 2);
  EXPECT_THROW(m->check_param({6.0, 0.02}), InvalidArgument);
  EXPECT_THROW(m->check_param({4.5}), Error);
  EXPECT_NO_THROW(m->check_param({4.25, 0.03}));
}

TEST(Newton, StepReachesTolerance) {
  auto m = small1d(64);
  const Param mu{1.0};
  const TimeGrid tg(0.5, 20);
  const Vector u0 = m->initial_state(mu);
  const NewtonResult r = newton_step(*m, u0, tg.time(1), tg.dt(), mu);
  const Vector res = semidiscrete_residual(*m, r.u, u0, tg.time(1), tg.dt(), mu);
  EXPECT_LE(res.norm(), 1e-8);
  EXPECT_GE(r.iterations, 1);
}

TEST(Newton, TwoDimensionalStep) {
  auto m = small2d(11);
  const Param mu{5.0, 0.02};
  const TimeGrid tg(25.0, 10);
  const Vector u0 = m->initial_state(mu);
  const NewtonResult r = newton_step(*m, u0, tg.time(1), tg.dt(), mu);
  EXPECT_LE(semidiscrete_residual(*m, r.u, u0, tg.time(1), tg.dt(), mu).norm(), 1e-8);
}

TEST(Simulate, TrajectoryShapeAndInitialColumn) {
  auto m = small1d(64, 20);
  const TimeGrid tg(0.5, 20);
  const auto tr = simulate_fom(*m, {1.05}, tg);
  EXPECT_EQ(tr.states.rows(), 64);
  EXPECT_EQ(tr.states.cols(), 20);
  EXPECT_EQ((tr.states.col(0) - m->initial_state({1.05})).norm(), 0.0);
  EXPECT_GT(tr.wall_time, 0.0);
}

TEST(Simulate, SingleInstanceIsInitialState) {
  auto m = small1d(64, 1);
  const auto tr = simulate_fom(*m, {1.0}, TimeGrid(0.5, 1));
  ASSERT_EQ(tr.states.cols(), 1);
  EXPECT_EQ((tr.states.col(0) - m->initial_state({1.0})).norm(), 0.0);
}

TEST(Simulate, PeriodicUpwindConservesMassApproximately) {
  // Conservative flux would conserve sum(u) exactly; the non-conservative
  // upwind form conserves it up to O(dx) smooth-profile drift.
  auto m = small1d(200, 50);
  const auto tr = simulate_fom(*m, {1.0}, TimeGrid(0.5, 50));
  const double s0 = tr.states.col(0).sum(), s1 = tr.states.col(49).sum();
  EXPECT_LT(std::abs(s1 - s0) / s0, 0.05);
  EXPECT_TRUE(tr.states.allFinite());
}

TEST(TrajectoryIo, RoundTrip) {
  const std::string dir = test::scratch_dir("traj");
  const Matrix X = test::random_matrix(13, 7, 1);
  save_trajectory(dir + "/t.romsnap", X, {1.0, 2.0});
  const auto t = load_trajectory(dir + "/t.romsnap");
  EXPECT_EQ((t.states - X).norm(), 0.0);
  EXPECT_EQ(t.mu, (Param{1.0, 2.0}));
  EXPECT_THROW(load_trajectory(dir + "/missing.romsnap"), IoError);
}

}  // namespace
}  // namespace romlab
