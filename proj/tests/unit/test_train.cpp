#include <gtest/gtest.h>

#include <cmath>

#include "sympcae/architecture.hpp"
#include "sympcae/pde.hpp"
#include "sympcae/train.hpp"
#include "test_util.hpp"

using namespace sympcae;

namespace {

// Textbook Adam on one coordinate, kept separate from the library code.
double adam_oracle(double theta, double lr, int steps, const std::function<double(double)>& grad) {
  double m = 0, v = 0;
  for (int t = 1; t <= steps; ++t) {
    const double g = grad(theta);
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    const double mh = m / (1 - std::pow(0.9, t));
    const double vh = v / (1 - std::pow(0.999, t));
    theta -= lr * mh / (std::sqrt(vh) + 1e-8);
  }
  return theta;
}

ArchitectureSpec tiny_arch(Index n) {
  ArchitectureSpec a;
  a.n1 = n;
  a.l1 = 3;
  a.channels = {2, 4, 4};
  a.activation_every = 2;
  a.latent = 1;
  a.init_scale = 0.2;
  a.init_a = 0.2;
  return a;
}

}  // namespace

TEST(Adam, ZeroGradientLeavesParameters) {
  Vec theta(3);
  theta << 1, -2, 3;
  const Vec before = theta;
  AdamState s(3);
  adam_step(theta, Vec::Zero(3), s, 0.1);
  EXPECT_EQ(theta, before);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  Vec theta = Vec::Zero(4);
  Vec g(4);
  g << 3.0, -0.01, 200.0, -7.0;
  AdamState s(4);
  adam_step(theta, g, s, 0.05);
  // m_hat / (sqrt(v_hat) + eps) = g / (|g| + eps) on the first step.
  for (Index i = 0; i < 4; ++i) EXPECT_NEAR(std::abs(theta[i]), 0.05 * std::abs(g[i]) / (std::abs(g[i]) + 1e-8), 1e-15);
  EXPECT_LT(theta[0], 0);
  EXPECT_GT(theta[1], 0);
}

TEST(Adam, QuadraticBowlMatchesScalarRecursion) {
  Vec theta(1);
  theta << 1.0;
  AdamState s(1);
  for (int t = 0; t < 100; ++t) adam_step(theta, Vec(2.0 * theta), s, 0.1);
  const double oracle = adam_oracle(1.0, 0.1, 100, [](double x) { return 2 * x; });
  EXPECT_NEAR(theta[0], oracle, 1e-14);
  // Frozen from the recursion: 100 steps reach 2.9367e-3, not below 1e-3.
  EXPECT_NEAR(std::abs(theta[0]), 2.9367e-3, 5e-8);
}

TEST(Adam, CoupledWeightDecayAddsToGradient) {
  Vec a(1), b(1);
  a << 0.7;
  b << 0.7;
  AdamState sa(1, 0.3), sb(1);
  for (int t = 0; t < 5; ++t) {
    adam_step(a, Vec::Constant(1, 0.5), sa, 0.01);
    adam_step(b, Vec::Constant(1, 0.5 + 0.3 * b[0]), sb, 0.01);
  }
  EXPECT_DOUBLE_EQ(a[0], b[0]);
}

TEST(LrSchedule, StepDecay) {
  EXPECT_EQ(lr_schedule_step(0.1, 99, 100, 0.5), 0.1);
  EXPECT_EQ(lr_schedule_step(0.1, 5000, 100, 1.0), 0.1);
  EXPECT_DOUBLE_EQ(lr_schedule_step(0.1, 250, 100, 0.5), 0.025);
  EXPECT_EQ(lr_schedule_step(0.3, 1000, 0, 0.5), 0.3);
}

TEST(LossAutoencoder, ZeroPenaltyCases) {
  ArchitectureSpec a = tiny_arch(8);
  a.pool_kernel = 1;
  a.latent = 16;
  Rng rng(1);
  Autoencoder ae = build_autoencoder(a, rng);
  Vec theta = ae.params();
  theta.setZero();
  ae.set_params(theta);
  for (auto* g : {&ae.encoder, &ae.decoder})
    for (Index i = 0; i < g->size(); ++i)
      if (g->layer(i).kind() == ModuleKind::PsdReduce || g->layer(i).kind() == ModuleKind::PsdLift) {
        Mat raw = Mat::Identity(16, 16);
        g->layer(i).set_params(Eigen::Map<Vec>(raw.data(), raw.size()));
      }
  ae.freeze_pooling(Vec::Zero(16));
  const Mat X = rng.normal_mat(16, 5);
  EXPECT_LT(loss_autoencoder(ae, X, 0.0, false, nullptr), 1e-25);
}

TEST(LossAutoencoder, ZeroOutputGivesSquaredNorm) {
  ArchitectureSpec a = tiny_arch(8);
  a.pool_kernel = 1;
  Rng rng(21);
  Autoencoder ae = build_autoencoder(a, rng);
  Vec theta = ae.params();
  theta.setZero();
  ae.set_params(theta);
  for (auto* g : {&ae.encoder, &ae.decoder})
    for (Index i = 0; i < g->size(); ++i)
      if (g->layer(i).kind() == ModuleKind::PsdReduce || g->layer(i).kind() == ModuleKind::PsdLift) {
        Vec raw = Vec::Zero(g->layer(i).num_params());
        raw[0] = 1.0;
        g->layer(i).set_params(raw);
      }
  ae.freeze_pooling(Vec::Zero(16));
  // Zero kernels copy q[0] and p[0] into the only retained PSD direction.
  Mat X = rng.normal_mat(16, 4);
  X.row(0).setZero();
  X.row(8).setZero();
  EXPECT_LT(ae.reconstruct(X.col(1)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_NEAR(loss_autoencoder(ae, X, 0.0, false, nullptr), X.squaredNorm(), 1e-12);
}

TEST(LossAutoencoder, PenaltyAndResidualSum) {
  ArchitectureSpec a = tiny_arch(8);
  Rng rng(2);
  Autoencoder ae = build_autoencoder(a, rng);
  const Mat X = rng.normal_mat(16, 4);
  ae.freeze_pooling(X.col(0));
  const double base = loss_autoencoder(ae, X, 0.0, false, nullptr);
  double norms = 0.0, squares = 0.0;
  const Vec theta = ae.params();
  for (const auto& t : ae.param_tensors()) {
    norms += theta.segment(t.offset, t.size).norm();
    squares += theta.segment(t.offset, t.size).squaredNorm();
  }
  EXPECT_NEAR(loss_autoencoder(ae, X, 0.5, false, nullptr), base + 0.5 * norms, 1e-10 * (1 + base));
  EXPECT_NEAR(loss_autoencoder(ae, X, 0.5, true, nullptr), base + 0.5 * squares, 1e-10 * (1 + base));
  double direct = 0.0;
  for (Index j = 0; j < 4; ++j) direct += (ae.reconstruct(X.col(j)) - X.col(j)).squaredNorm();
  EXPECT_NEAR(base, direct, 1e-12 * (1 + direct));
}

TEST(LossAutoencoder, GradientMatchesFiniteDifferences) {
  Rng rng(3);
  for (bool squared : {false, true}) {
    Autoencoder ae = build_autoencoder(tiny_arch(8), rng);
    const Mat X = rng.normal_mat(16, 3);
    ae.freeze_pooling(X.col(0));
    Vec g = Vec::Zero(ae.num_params());
    loss_autoencoder(ae, X, 1e-2, squared, &g);
    Autoencoder probe = ae;
    const Vec fd = testutil::fd_gradient(
        [&](const Vec& t) {
          probe.set_params(t);
          return loss_autoencoder(probe, X, 1e-2, squared, nullptr);
        },
        ae.params(), 1e-6);
    EXPECT_LT(testutil::rel_err(g, fd), 1e-5);
  }
}

TEST(LossAutoencoder, ZeroTensorSubgradient) {
  Rng rng(4);
  Autoencoder ae = build_autoencoder(tiny_arch(8), rng);
  const Mat X = rng.normal_mat(16, 2);
  ae.freeze_pooling(X.col(0));
  Vec theta = ae.params();
  const auto tensors = ae.param_tensors();
  theta.segment(tensors[0].offset, tensors[0].size).setZero();
  ae.set_params(theta);
  Vec g0 = Vec::Zero(ae.num_params()), g1 = Vec::Zero(ae.num_params());
  loss_autoencoder(ae, X, 0.0, false, &g0);
  loss_autoencoder(ae, X, 1.0, false, &g1);
  EXPECT_EQ(Vec(g0.segment(tensors[0].offset, tensors[0].size)), Vec(g1.segment(tensors[0].offset, tensors[0].size)));
  EXPECT_TRUE(g1.allFinite());
}

TEST(LossSympNet, IdentityAndGradient) {
  SympNetSpec s;
  s.half_dim = 2;
  s.layers = 3;
  s.sublayers = 2;
  Rng rng(5);
  ModelGraph phi = build_sympnet(s, rng);
  Vec zero = phi.params();
  zero.setZero();
  phi.set_params(zero);
  const Mat X = rng.normal_mat(4, 6);
  EXPECT_EQ(loss_sympnet(phi, X, X, nullptr), 0.0);
  const Mat D = rng.normal_mat(4, 6);
  EXPECT_NEAR(loss_sympnet(phi, X, X + D, nullptr), D.squaredNorm(), 1e-12);

  phi.set_params(rng.uniform_vec(phi.num_params(), -0.5, 0.5));
  Vec g = Vec::Zero(phi.num_params());
  loss_sympnet(phi, X, X + D, &g);
  ModelGraph probe = phi;
  const Vec fd = testutil::fd_gradient(
      [&](const Vec& t) {
        probe.set_params(t);
        return loss_sympnet(probe, X, X + D, nullptr);
      },
      phi.params());
  EXPECT_LT(testutil::rel_err(g, fd), 1e-5);
  EXPECT_THROW(loss_sympnet(phi, X, Mat::Zero(4, 5), nullptr), ShapeError);
}

namespace {

Mat tiny_wave(Index n, Index nt) {
  PdeConfig c;
  c.n = n;
  c.nt = nt;
  c.substeps = (n + nt - 1) / nt;  // keep dt <= dx
  return generate(c).states.leftCols(nt);
}

}  // namespace

TEST(TrainAutoencoder, ZeroEpochsAndUnfrozenPooling) {
  Rng rng(6);
  Autoencoder ae = build_autoencoder(tiny_arch(16), rng);
  const Mat X = tiny_wave(16, 8);
  TrainConfig tc;
  tc.epochs = 3;
  EXPECT_THROW(train_autoencoder(ae, X, tc), StateError);
  ae.freeze_pooling(X.col(0));
  const Vec before = ae.params();
  tc.epochs = 0;
  EXPECT_TRUE(train_autoencoder(ae, X, tc).empty());
  EXPECT_EQ(ae.params(), before);
}

TEST(TrainAutoencoder, TinyWaveLossDecreasesAndIsDeterministic) {
  const Mat X = tiny_wave(64, 64);
  ArchitectureSpec a = tiny_arch(64);
  a.l1 = 5;
  a.init_scale = 0.01;
  a.init_a = 0.01;
  TrainConfig tc;
  tc.epochs = 200;
  tc.seed = 42;
  auto run = [&] {
    Rng rng(7);
    Autoencoder ae = build_autoencoder(a, rng);
    ae.freeze_pooling(X.col(0));
    return train_autoencoder(ae, X, tc);
  };
  const auto h1 = run();
  const auto h2 = run();
  ASSERT_EQ(h1.size(), 200u);
  double first = 0, last = 0;
  for (int i = 0; i < 10; ++i) {
    first += h1[static_cast<std::size_t>(i)].loss;
    last += h1[h1.size() - 1 - static_cast<std::size_t>(i)].loss;
  }
  EXPECT_LT(last, first);
  for (std::size_t i = 0; i < h1.size(); ++i) EXPECT_EQ(h1[i].loss, h2[i].loss);
}

TEST(TrainAutoencoder, ConstraintsSurviveTraining) {
  const Mat X = tiny_wave(16, 16);
  Rng rng(8);
  Autoencoder ae = build_autoencoder(tiny_arch(16), rng);
  ae.freeze_pooling(X.col(0));
  TrainConfig tc;
  tc.epochs = 20;
  tc.learning_rate = 0.05;
  train_autoencoder(ae, X, tc);
  for (Index i = 0; i < ae.encoder.size(); ++i) {
    const Module& m = ae.encoder.layer(i);
    if (m.in_dim() != m.out_dim()) continue;
    const Vec x = rng.normal_vec(m.in_dim());
    Mat J(m.out_dim(), m.in_dim());
    for (Index j = 0; j < m.in_dim(); ++j) J.col(j) = m.jvp(x, Vec::Unit(m.in_dim(), j), Vec());
    EXPECT_LT(testutil::symplectic_residual(J), 1e-8);
  }
}

TEST(TrainAutoencoder, DivergenceReportsEpochAndKeepsLastGoodParameters) {
  const Mat X = tiny_wave(16, 8);
  Rng rng(9);
  Autoencoder ae = build_autoencoder(tiny_arch(16), rng);
  ae.freeze_pooling(X.col(0));
  TrainConfig tc;
  tc.epochs = 4;
  Mat nan = X;
  nan(3, 2) = std::numeric_limits<double>::infinity();
  const Vec before = ae.params();
  try {
    train_autoencoder(ae, nan, tc);
    FAIL();
  } catch (const NumericError& e) {
    EXPECT_EQ(e.index(), 1);
  }
  EXPECT_EQ(ae.params(), before);
}
