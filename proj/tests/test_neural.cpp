#include "gradcheck.hpp"
#include "test_util.hpp"

#include "neural/normalize.hpp"
#include "neural/train.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

using namespace romlab;
using namespace romlab::nn;

namespace {

Tensor make(Shape s, std::vector<double> v) {
  Tensor t(std::move(s));
  t.data.assign(v.begin(), v.end());
  return t;
}

std::vector<double> vec(const Buffer& b) { return {b.begin(), b.end()}; }

std::vector<Parameter*> params_of(Module& m) {
  std::vector<Parameter*> p;
  m.collect(p);
  return p;
}

}  // namespace

class GradCheckTest : public ::testing::TestWithParam<std::size_t> {};

TEST_P(GradCheckTest, MatchesCentralDifferences) {
  const auto cases = test::grad_cases();
  const auto& c = cases.at(GetParam());
  auto m = c.make();
  const auto r = test::grad_check(*m, c.sample, c.batch, 1000 + GetParam());
  EXPECT_LT(r.input_error, 1e-5) << c.name;
  EXPECT_LT(r.param_error, 1e-5) << c.name;
}

INSTANTIATE_TEST_SUITE_P(AllModules, GradCheckTest,
                         ::testing::Range<std::size_t>(0, test::grad_cases().size()),
                         [](const auto& info) {
                           std::string n = test::grad_cases()[info.param].name;
                           for (char& ch : n)
                             if (!std::isalnum(static_cast<unsigned char>(ch))) ch = '_';
                           return n;
                         });

TEST(Conv, HandComputedCrossCorrelation) {
  Conv c(1, 1, 1, 3);
  c.weight().value.data = {1, 0, -1};
  c.bias().value.fill(0.0);
  const Tensor y = c.apply(make({1, 1, 3}, {1, 2, 3}));
  ASSERT_EQ(y.shape, (Shape{1, 1, 3}));
  EXPECT_DOUBLE_EQ(y.data[0], -2);
  EXPECT_DOUBLE_EQ(y.data[1], -2);
  EXPECT_DOUBLE_EQ(y.data[2], 2);
}

TEST(Conv, UnitKernelIsIdentity) {
  Conv c(1, 1, 1, 1);
  c.weight().value.data = {1};
  c.bias().value.fill(0.0);
  const Tensor x = make({2, 1, 4}, {1, -2, 3, 0.5, 7, 8, -9, 1});
  EXPECT_EQ(vec(c.apply(x).data), vec(x.data));
}

TEST(Conv, ChannelMismatchThrows) {
  Conv c(1, 2, 1, 3);
  EXPECT_THROW(c.apply(Tensor({1, 3, 5})), Error);
  Conv c2(2, 2, 1, 3);
  EXPECT_THROW(c2.apply(Tensor({1, 1, 4, 4})), Error);
}

TEST(Upsample, NearestDuplicates) {
  UpsampleNearest u(2);
  const Tensor y = u.apply(make({1, 1, 2}, {3.5, -1}));
  EXPECT_EQ(y.shape, (Shape{1, 1, 4}));
  EXPECT_EQ(vec(y.data), (std::vector<double>{3.5, 3.5, -1, -1}));
  const Tensor y2 = u.apply(make({1, 1, 1, 2}, {1, 2}));
  EXPECT_EQ(y2.shape, (Shape{1, 1, 2, 4}));
  EXPECT_EQ(vec(y2.data), (std::vector<double>{1, 1, 2, 2, 1, 1, 2, 2}));
}

TEST(ConvTranspose, DeltaReproducesKernelFootprint) {
  // Without padding the full k x k kernel is scattered.
  ConvTranspose2d full(1, 1, 4, 2, 0);
  std::vector<double> w(16);
  for (int i = 0; i < 16; ++i) w[static_cast<std::size_t>(i)] = i + 1;
  full.weight().value.data.assign(w.begin(), w.end());
  full.bias().value.fill(0.0);
  const Tensor y = full.apply(make({1, 1, 1, 1}, {1}));
  EXPECT_EQ(y.shape, (Shape{1, 1, 4, 4}));
  EXPECT_EQ(vec(y.data), w);

  // Default k=4, stride 2, pad 1 doubles the side and keeps the central 2x2.
  ConvTranspose2d half(1, 1);
  half.weight().value.data.assign(w.begin(), w.end());
  half.bias().value.fill(0.0);
  const Tensor z = half.apply(make({1, 1, 1, 1}, {1}));
  EXPECT_EQ(z.shape, (Shape{1, 1, 2, 2}));
  EXPECT_EQ(vec(z.data), (std::vector<double>{6, 7, 10, 11}));
}

TEST(ConvTranspose, DoublesSpatialAxes) {
  ConvTranspose2d t(3, 2);
  EXPECT_EQ(t.output_shape({3, 31, 31}), (Shape{2, 62, 62}));
}

TEST(ResiBlock, ZeroKernelsGiveRelu) {
  auto b = make_resiblock(1, 2);
  for (auto* p : params_of(*b)) p->value.fill(0.0);
  const Tensor x = make({1, 2, 3}, {-1, 2, -3, 4, 0, -0.5});
  const Tensor y = b->apply(x);
  for (std::size_t i = 0; i < x.data.size(); ++i) EXPECT_DOUBLE_EQ(y.data[i], std::max(0.0, x.data[i]));
}

TEST(ResiBlock, OutputNonnegative) {
  for (int dims : {1, 2}) {
    auto b = make_resiblock(dims, 3);
    Rng rng(5);
    b->init(rng);
    Tensor x(dims == 1 ? Shape{4, 3, 10} : Shape{2, 3, 5, 6});
    for (double& v : x.data) v = rng.uniform(-3, 3);
    for (double v : b->apply(x).data) EXPECT_GE(v, 0.0);
  }
}

TEST(ProjResiBlock, IdentityProjectionReducesToResiBlock) {
  auto plain = make_resiblock(1, 3);
  auto proj = make_projresiblock(1, 3, 3);
  Rng rng(9);
  plain->init(rng);
  auto& pr = dynamic_cast<ResidualBlock&>(*proj);
  auto& pl = dynamic_cast<ResidualBlock&>(*plain);
  auto src = params_of(pl.main());
  auto dst = params_of(pr.main());
  ASSERT_EQ(src.size(), dst.size());
  for (std::size_t k = 0; k < src.size(); ++k) dst[k]->value = src[k]->value;
  auto& skip = dynamic_cast<Conv&>(*pr.skip());
  skip.weight().value.fill(0.0);
  for (Index c = 0; c < 3; ++c) skip.weight().value.data[static_cast<std::size_t>(c * 3 + c)] = 1.0;
  skip.bias().value.fill(0.0);

  Tensor x({2, 3, 7});
  for (double& v : x.data) v = rng.uniform(-1, 1);
  const Tensor a = plain->apply(x), b = proj->apply(x);
  for (std::size_t i = 0; i < a.data.size(); ++i) EXPECT_NEAR(a.data[i], b.data[i], 1e-14);
}

TEST(ProjResiBlock, ChangesChannelCount) {
  auto b = make_projresiblock(1, 4, 2);
  EXPECT_EQ(b->output_shape({4, 9}), (Shape{2, 9}));
  auto b2 = make_projresiblock(2, 3, 5);
  EXPECT_EQ(b2->output_shape({3, 4, 4}), (Shape{5, 4, 4}));
}

TEST(Builders, Cnn1dResiShapes) {
  Network n = build_1dcnnresi(5, 1000);
  EXPECT_EQ(n.input_shape(), (Shape{5}));
  EXPECT_EQ(n.output_size(), 1000);
  n.init(1);
  Tensor x({3, 5}, 0.3);
  const Tensor y = n.apply(x);
  EXPECT_EQ(y.batch(), 3);
  EXPECT_EQ(y.sample_size(), 1000);
  EXPECT_THROW(build_1dcnnresi(5, 1025), Error);
  EXPECT_THROW(build_1dcnnresi(0, 1000), Error);
}

TEST(Builders, Cnn2dResiShapes) {
  Network n = build_2dcnnresi(10, 248, 248, 1);
  EXPECT_EQ(n.output_shape(), (Shape{1, 248, 248}));
  Network two = build_2dcnnresi(10, 248, 248, 2);
  EXPECT_EQ(two.output_shape(), (Shape{2, 248, 248}));
  // Only the head conv changes: one extra 4 x 3 x 3 kernel plus one bias.
  const Index last = Cnn2dOptions{}.channels.back();
  EXPECT_EQ(two.parameter_count() - n.parameter_count(), last * 3 * 3 + 1);
  EXPECT_THROW(build_2dcnnresi(10, 250, 248, 1), Error);
}

TEST(Builders, PodHeadShapes) {
  Network n = build_pod_head_network(10, 1024);
  EXPECT_EQ(n.output_size(), 1024);
  EXPECT_EQ(n.input_shape(), (Shape{10}));
  EXPECT_THROW(build_pod_head_network(10, 1000), Error);
}

TEST(Builders, FfnnZeroWeightsGiveBias) {
  Network n = build_ffnn(2, 5);
  EXPECT_EQ(n.output_size(), 5);
  auto ps = n.parameters();
  for (auto* p : ps) p->value.fill(0.0);
  auto& bias = ps.back()->value.data;
  ASSERT_EQ(bias.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) bias[i] = 0.5 * static_cast<double>(i) - 1.0;
  Matrix X(2, 3);
  X << 0.1, 0.5, 0.9, -1, 0, 2;
  const Matrix Y = n.predict(X);
  for (Index j = 0; j < 3; ++j)
    for (Index i = 0; i < 5; ++i) EXPECT_DOUBLE_EQ(Y(i, j), bias[static_cast<std::size_t>(i)]);
}

TEST(Builders, InitZeroesOutputLayer) {
  Network n = build_ffnn(2, 3, {8});
  n.init(4);
  Matrix X = Matrix::Random(2, 4);
  EXPECT_EQ(n.predict(X).norm(), 0.0);
}

TEST(Network, SaveLoadRoundTrip) {
  Network n = build_pod_head_network(4, 64, Cnn2dOptions{3, {2, 2}, 3});
  Rng rng(3);
  for (auto* p : n.parameters())
    for (double& v : p->value.data) v = rng.uniform(-1, 1);
  const auto path = test::scratch_dir("net") + "/net.romnet";
  save_network(path, n);
  Network m = load_network(path);
  EXPECT_EQ(m.arch(), n.arch());
  Matrix X = Matrix::Random(4, 3);
  EXPECT_EQ((m.predict(X) - n.predict(X)).norm(), 0.0);
}

TEST(Loss, MseBasics) {
  const Tensor a = make({2, 2}, {1, 2, 3, 4});
  EXPECT_EQ(mse(a, a), 0.0);
  const Tensor b = make({2, 2}, {1, 2, 3, 6});
  Tensor g;
  EXPECT_DOUBLE_EQ(mse(b, a, &g), 1.0);
  EXPECT_DOUBLE_EQ(g.data[3], 1.0);  // 2 (b - a) / N
  EXPECT_THROW(mse(a, make({4}, {1, 2, 3, 4})), Error);
}

TEST(Loss, CompositeIsWeightedSumWithMatchingGradient) {
  Rng rng(2);
  Tensor zp({3, 2}), z({3, 2}), ep({3, 4}), e({3, 4});
  for (Tensor* t : {&zp, &z, &ep, &e})
    for (double& v : t->data) v = rng.uniform(-1, 1);
  const double a1 = 0.7, a2 = 1.3;
  Tensor gz, ge;
  const auto L = composite_loss(zp, z, ep, e, a1, a2, &gz, &ge);
  EXPECT_NEAR(L.total, a1 * mse(zp, z) + a2 * mse(ep, e), 1e-15);

  const double h = 1e-6;
  auto total = [&] { return composite_loss(zp, z, ep, e, a1, a2).total; };
  for (auto [t, g] : {std::pair{&zp, &gz}, std::pair{&ep, &ge}}) {
    for (std::size_t i = 0; i < t->data.size(); ++i) {
      const double o = t->data[i];
      t->data[i] = o + h;
      const double p = total();
      t->data[i] = o - h;
      const double m = total();
      t->data[i] = o;
      EXPECT_NEAR((p - m) / (2 * h), g->data[i], 1e-8);
    }
  }

  const auto R = composite_loss(zp, z, ep, e, 1.0, 0.0, &gz, &ge);
  EXPECT_DOUBLE_EQ(R.total, mse(zp, z));
  for (double v : ge.data) EXPECT_EQ(v, 0.0);
}

TEST(Adam, ZeroGradientLeavesParameters) {
  Parameter p{"p", make({3}, {1, -2, 3}), Tensor({3})};
  Adam opt({&p}, {});
  for (int i = 0; i < 10; ++i) opt.step();
  EXPECT_EQ(vec(p.value.data), (std::vector<double>{1, -2, 3}));
}

TEST(Adam, ConstantGradientStepTendsToLearningRate) {
  Parameter p{"p", make({3}, {0, 0, 0}), make({3}, {0.5, -2.0, 1e-3})};
  AdamConfig cfg;
  cfg.learning_rate = 1e-3;
  Adam opt({&p}, cfg);
  Buffer prev = p.value.data;
  for (int i = 0; i < 2000; ++i) {
    prev = p.value.data;
    opt.step();
  }
  for (std::size_t i = 0; i < 3; ++i) {
    const double step = prev[i] - p.value.data[i];
    EXPECT_NEAR(std::abs(step), 1e-3, 1e-5 + 1e-3 * 1e-8 / std::abs(p.grad.data[i]));
    EXPECT_GT(step * p.grad.data[i], 0.0);
  }
}

TEST(Adam, QuadraticBowlDecreasesAfterWarmup) {
  Parameter p{"p", make({4}, {3, -2, 2.5, -4}), Tensor({4})};
  Adam opt({&p}, {});
  std::vector<double> loss;
  for (int it = 0; it < 1000; ++it) {
    double l = 0;
    for (std::size_t i = 0; i < 4; ++i) {
      p.grad.data[i] = p.value.data[i];
      l += 0.5 * p.value.data[i] * p.value.data[i];
    }
    loss.push_back(l);
    opt.step();
  }
  for (std::size_t i = 10; i < loss.size(); ++i) EXPECT_LT(loss[i], loss[i - 1]);
}

TEST(Adam, NonFiniteGradientAbortsUntouched) {
  Parameter p{"p", make({2}, {1, 2}), make({2}, {0.1, std::nan("")})};
  Adam opt({&p}, {});
  EXPECT_THROW(opt.step(), NumericError);
  EXPECT_EQ(vec(p.value.data), (std::vector<double>{1, 2}));
  EXPECT_EQ(opt.steps(), 0);
}

TEST(Train, OverfitsSingleSample) {
  Network n = build_ffnn(2, 3, {16, 16});
  n.init(7);
  Matrix X(2, 1), Y(3, 1);
  X << 0.3, -0.6;
  Y << 0.2, -0.5, 0.9;
  TrainConfig cfg;
  cfg.epochs = 3000;
  cfg.batch_size = 1;
  cfg.validation_fraction = 0.0;
  const auto h = train_regression(n, X, Y, cfg);
  EXPECT_LT(h.total.back(), 1e-6);
}

TEST(Train, FixedSeedIsBitIdentical) {
  Matrix X = test::random_matrix(2, 40, 1), Y = test::random_matrix(3, 40, 2);
  TrainConfig cfg;
  cfg.epochs = 20;
  cfg.batch_size = 8;
  cfg.seed = 11;
  auto run = [&] {
    Network n = build_ffnn(2, 3, {8, 8});
    n.init(3);
    return train_regression(n, X, Y, cfg);
  };
  const auto a = run(), b = run();
  EXPECT_EQ(a.total, b.total);
  EXPECT_EQ(a.validation.size(), b.validation.size());
  for (std::size_t i = 0; i < a.validation.size(); ++i) EXPECT_EQ(a.validation[i], b.validation[i]);
}

TEST(Train, JointAlpha2ZeroMatchesRegressionLoss1) {
  Matrix X = test::random_matrix(2, 16, 4), Z = test::random_matrix(3, 16, 5), E = test::random_matrix(6, 16, 6);
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.batch_size = 4;
  cfg.alpha2 = 0.0;
  cfg.validation_fraction = 0.0;
  Network f1 = build_ffnn(2, 3, {8}), f2 = build_ffnn(2, 3, {8}), d = build_ffnn(3, 6, {4});
  f1.init(1);
  f2.init(1);
  d.init(2);
  const auto joint = train_joint(f1, d, X, Z, E, cfg);
  const auto reg = train_regression(f2, X, Z, cfg);
  for (std::size_t i = 0; i < reg.total.size(); ++i) EXPECT_NEAR(joint.total[i], reg.total[i], 1e-12);
  EXPECT_EQ((f1.predict(X) - f2.predict(X)).norm(), 0.0);
}

TEST(Train, DivergenceAborts) {
  Matrix X = test::random_matrix(2, 8, 1), Y = test::random_matrix(3, 8, 2);
  TrainConfig cfg;
  cfg.epochs = 50;
  cfg.adam.learning_rate = 10.0;
  cfg.divergence_factor = 1.5;
  Network n = build_ffnn(2, 3, {32, 32});
  n.init(1);
  EXPECT_THROW(train_regression(n, X, Y * 100.0, cfg), NumericError);
}

TEST(Normalize, RoundTrip) {
  Matrix X = test::random_matrix(4, 30, 8) * 5.0;
  X.row(2).setConstant(1.5);  // constant row must not divide by zero
  for (auto kind : {ScaleKind::kIdentity, ScaleKind::kStandardize, ScaleKind::kMinMax, ScaleKind::kMaxAbs}) {
    const Scaler s = Scaler::fit(X, kind);
    const Matrix Xn = s.normalize(X);
    EXPECT_TRUE(Xn.allFinite());
    EXPECT_LT((s.denormalize(Xn) - X).cwiseAbs().maxCoeff(), 1e-12);
  }
  const Scaler mm = Scaler::fit(X, ScaleKind::kMinMax);
  const Matrix Xm = mm.normalize(X);
  EXPECT_NEAR(Xm.row(0).minCoeff(), 0.0, 1e-15);
  EXPECT_NEAR(Xm.row(0).maxCoeff(), 1.0, 1e-15);
  const Scaler ma = Scaler::fit(X, ScaleKind::kMaxAbs);
  EXPECT_NEAR(ma.normalize(X).cwiseAbs().maxCoeff(), 1.0, 1e-15);
}
