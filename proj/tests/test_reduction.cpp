#include "fom/burgers.hpp"
#include "reduction/eim.hpp"
#include "reduction/greedy.hpp"
#include "reduction/pod.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace romlab {
namespace {

// Matrix of exact rank k with decaying spectrum.
Matrix low_rank(Index n, Index m, Index k, std::uint64_t seed) {
  const Matrix A = test::random_matrix(n, k, seed);
  const Matrix B = test::random_matrix(k, m, seed + 1);
  Matrix D = Matrix::Zero(k, k);
  for (Index i = 0; i < k; ++i) D(i, i) = std::pow(0.5, static_cast<double>(i));
  return A * D * B;
}

TEST(Pod, TailIdentity) {
  for (auto [n, m, r] : {std::tuple{50, 30, 5}, std::tuple{120, 200, 17}, std::tuple{300, 40, 40}}) {
    const Matrix X = test::random_matrix(n, m, static_cast<std::uint64_t>(n));
    const ThinSvd s = thin_svd(X);
    const ReducedBasis b = pod_basis(X, Truncation::fixed(r));
    const double lhs = (X - b.V * (b.V.transpose() * X)).squaredNorm();
    const double rhs = s.sigma.tail(s.sigma.size() - r).squaredNorm();
    EXPECT_NEAR(lhs, rhs, 1e-8 * std::max(rhs, 1e-14 * X.squaredNorm())) << n << "x" << m << " r=" << r;
    EXPECT_LT(orthonormality_error(b.V), 1e-12);
  }
}

TEST(Pod, SingularValuesDescendingAndReconstruct) {
  const Matrix X = test::random_matrix(40, 25, 11);
  const ThinSvd s = thin_svd(X);
  for (Index i = 1; i < s.sigma.size(); ++i) EXPECT_GE(s.sigma[i - 1], s.sigma[i]);
  EXPECT_NEAR(s.sigma.squaredNorm(), X.squaredNorm(), 1e-10 * X.squaredNorm());
}

TEST(Pod, ToleranceTruncation) {
  Vector sigma(4);
  sigma << 10, 5, 1, 0.5;  // total 16.5
  EXPECT_EQ(truncation_rank(sigma, 0.5), 1);   // tail 6.5/16.5 = 0.39
  EXPECT_EQ(truncation_rank(sigma, 0.1), 2);   // 1.5/16.5 = 0.09
  EXPECT_EQ(truncation_rank(sigma, 0.01), 4);  // 0.5/16.5 = 0.03 still too big at r=3
  const Matrix X = low_rank(60, 20, 3, 4);
  EXPECT_LE(pod_basis(X, Truncation::tolerance(1e-8)).rank(), 3);
}

TEST(Pod, AppendOrthonormalDropsDependentColumns) {
  const Matrix V = pod_basis(test::random_matrix(30, 4, 2), Truncation::fixed(4)).V;
  Matrix W(30, 3);
  W.col(0) = V.col(1);  // already in span
  W.rightCols(2) = test::random_matrix(30, 2, 3);
  const Matrix U = append_orthonormal(V, W);
  EXPECT_EQ(U.cols(), 6);
  EXPECT_LT(orthonormality_error(U), 1e-12);
}

TEST(Pod, BasisRoundTrip) {
  const std::string dir = test::scratch_dir("basis");
  ReducedBasis b = pod_basis(test::random_matrix(20, 10, 8), Truncation::fixed(4));
  b.selected_parameters = {{0.9}, {1.1}};
  save_basis(dir + "/b.rombase", b);
  const ReducedBasis c = load_basis(dir + "/b.rombase");
  EXPECT_EQ((c.V - b.V).norm(), 0.0);
  EXPECT_EQ((c.singular_values - b.singular_values).norm(), 0.0);
  EXPECT_EQ(c.selected_parameters, b.selected_parameters);
}

TEST(Eim, ExactRankRecovery) {
  for (Index k : {1, 4, 9}) {
    const Matrix F = low_rank(80, 40, k, static_cast<std::uint64_t>(10 + k));
    EimOptions o;
    o.tol = 1e-10;
    const EimData e = eim_build(F, o);
    EXPECT_EQ(e.size(), k);
    double worst = 0;
    for (Index j = 0; j < F.cols(); ++j)
      worst = std::max(worst, (eim_interpolate(e, F.col(j)) - F.col(j)).cwiseAbs().maxCoeff());
    EXPECT_LT(worst, 1e-10);
  }
}

TEST(Eim, InterpolatesExactlyAtSelectedIndices) {
  const Matrix F = test::random_matrix(50, 30, 21);
  EimOptions o;
  o.tol = 1e-3;
  o.max_size = 12;
  const EimData e = eim_build(F, o);
  ASSERT_EQ(e.size(), 12);
  const Vector g = test::random_matrix(50, 1, 22).col(0);
  const Vector ig = eim_interpolate(e, g);
  for (Index i : e.indices) EXPECT_LT(std::abs(ig[i] - g[i]), 1e-12);
  // indices are distinct
  std::vector<Index> s = e.indices;
  std::sort(s.begin(), s.end());
  EXPECT_EQ(std::unique(s.begin(), s.end()), s.end());
}

TEST(Eim, RoundTripAndIdentity) {
  const std::string dir = test::scratch_dir("eim");
  const EimData e = eim_build(low_rank(40, 20, 5, 3), EimOptions{1e-10, 0, -1});
  save_eim(dir + "/e.romeim", e);
  const EimData f = load_eim(dir + "/e.romeim");
  EXPECT_EQ(f.indices, e.indices);
  EXPECT_EQ((f.U - e.U).norm(), 0.0);
  const EimData id = eim_identity(7);
  const Vector v = test::random_matrix(7, 1, 1).col(0);
  EXPECT_LT((eim_interpolate(id, v) - v).norm(), 1e-14);
}

TEST(Greedy, SmallOneDimensionalRun) {
  Burgers1dConfig c;
  c.elements = 100;
  const TimeGrid tg(0.5, 30);
  auto m = build_burgers1d(c, tg);
  const std::vector<Param> train{{0.9}, {1.0}, {1.1}};
  std::vector<Matrix> snaps;
  Matrix F(100, 90);
  for (std::size_t j = 0; j < train.size(); ++j) {
    snaps.push_back(simulate_fom(*m, train[j], tg).states);
    for (Index i = 0; i < 30; ++i) F.col(static_cast<Index>(j) * 30 + i) = m->eval_f(snaps[j].col(i), train[j]);
  }
  auto eim = std::make_shared<EimData>(eim_build(F, EimOptions{1e-6, 0, -1}, m.get()));
  GreedyOptions o;
  o.tol_rb = 1e-2;
  o.r_max = 40;
  const GreedyResult g = pod_greedy(*m, train, snaps, eim, tg, o);
  ASSERT_FALSE(g.report.iterations.empty());
  EXPECT_LE(g.basis.rank(), 40);
  EXPECT_LT(orthonormality_error(g.basis.V), 1e-10);
  Index prev = 0;
  for (const auto& it : g.report.iterations) {
    EXPECT_GT(it.basis_size, prev);
    prev = it.basis_size;
    EXPECT_EQ(it.estimates.size(), train.size());
  }
  const auto& last = g.report.iterations.back();
  EXPECT_TRUE(last.eta_max <= o.tol_rb || last.basis_size >= o.r_max ||
              !g.report.stopping_reason.empty());
  // Basis modes for the hybrid model component.
  const ReducedBasis v = build_model_basis(g, train, snaps, BasisMode::kGreedyDirect, 3);
  EXPECT_EQ((v.V - g.basis.V.leftCols(3)).norm(), 0.0);
  const ReducedBasis w = build_model_basis(g, train, snaps, BasisMode::kAllSnapshotsSvd, 3);
  EXPECT_LT(orthonormality_error(w.V), 1e-12);
}

}  // namespace
}  // namespace romlab
