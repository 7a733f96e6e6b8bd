#include <gtest/gtest.h>

#include <cmath>

#include "sympcae/architecture.hpp"
#include "sympcae/conv.hpp"
#include "sympcae/pooling.hpp"
#include "sympcae/psd_module.hpp"
#include "sympcae/sympnet_modules.hpp"
#include "sympcae/verify.hpp"
#include "test_util.hpp"

using namespace sympcae;
using testutil::direct_conv_1d;
using testutil::direct_conv_2d;
using testutil::symplectic_residual;

namespace {

Mat jac(const Module& m, const Vec& x) {
  return testutil::fd_jacobian([&](const Vec& v) { return m.forward(v); }, x);
}

}  // namespace

TEST(LinearModule, ZeroIsIdentityAndUnitShear) {
  LinearModule zero(3, 2, Orientation::Up);
  Rng rng(1);
  const Vec x = rng.normal_vec(6);
  EXPECT_EQ(zero.forward(x), x);

  LinearModule m(2, 1, Orientation::Up);
  // S = I: upper triangle rows (1, 0 | 1).
  Vec s(3);
  s << 1, 0, 1;
  m.set_params(s);
  Vec z(4), expected(4);
  z << 1, 2, 3, 4;
  expected << 4, 6, 3, 4;
  EXPECT_EQ(m.forward(z), expected);
}

TEST(LinearModule, JacobianIsSymplectic) {
  Rng rng(2);
  LinearModule m(4, 2, Orientation::Low);
  m.set_params(rng.normal_vec(m.num_params()));
  for (Index i = 0; i < 2; ++i) EXPECT_EQ(m.block(i), Mat(m.block(i).transpose()));
  EXPECT_LT(symplectic_residual(m.dense_matrix()), 1e-12);
  const Vec x = rng.normal_vec(8);
  EXPECT_LT((m.dense_matrix() * x - m.forward(x)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ActivationModule, Definition) {
  ActivationModule zero(2, Orientation::Up);
  Rng rng(3);
  const Vec x = rng.normal_vec(4);
  EXPECT_EQ(zero.forward(x), x);

  ActivationModule m(3, Orientation::Up);
  Vec ab(6);
  ab << 1, 1, 1, 0, 0, 0;
  m.set_params(ab);
  Vec z(6);
  z << 0, 0, 0, 0.5, 0.5, 0.5;
  const Vec y = m.forward(z);
  for (Index i = 0; i < 3; ++i) {
    EXPECT_DOUBLE_EQ(y[i], std::tanh(0.5));
    EXPECT_EQ(y[3 + i], 0.5);
  }

  ActivationModule low(2, Orientation::Low, ActivationFn::Sigmoid);
  Vec p(4);
  p << 2, -1, 0.3, 0.7;
  low.set_params(p);
  Vec w(4);
  w << 0.1, 0.2, 0.3, 0.4;
  const Vec v = low.forward(w);
  EXPECT_EQ(v[0], 0.1);
  EXPECT_DOUBLE_EQ(v[2], 0.3 + 2.0 / (1.0 + std::exp(-(0.1 + 0.3))));
  EXPECT_DOUBLE_EQ(v[3], 0.4 - 1.0 / (1.0 + std::exp(-(0.2 + 0.7))));
}

TEST(ActivationModule, InputJvpIsChainRule) {
  Rng rng(4);
  ActivationModule m(3, Orientation::Up);
  m.set_params(rng.normal_vec(6));
  const Vec x = rng.normal_vec(6), v = rng.normal_vec(6);
  Vec expected = v;
  for (Index i = 0; i < 3; ++i) {
    const double t = std::tanh(x[3 + i] + m.b()[i]);
    expected[i] += m.a()[i] * (1 - t * t) * v[3 + i];
  }
  EXPECT_LT((m.jvp(x, v, Vec()) - expected).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT(symplectic_residual(jac(m, x)), 1e-9);
}

TEST(ActivationFunctions, AntiderivativeMatchesQuadrature) {
  for (auto f : {ActivationFn::Tanh, ActivationFn::Sigmoid}) {
    for (double x : {-30.0, -1.5, 0.0, 0.4, 2.0, 40.0}) {
      const double h = 1e-5;
      const double d = (activation_antiderivative(f, x + h) - activation_antiderivative(f, x - h)) / (2 * h);
      EXPECT_NEAR(d, activation_value(f, x), 1e-8);
    }
  }
  EXPECT_EQ(activation_from_string("tanh"), ActivationFn::Tanh);
  EXPECT_THROW(activation_from_string("relu"), ConfigError);
}

TEST(ConvLift, ZeroKernelsCopyWithScale) {
  const ConvGeometry g{1, 5, 1, 3, 1};
  ConvLift same(g, 2, 2, Orientation::Up);
  Rng rng(5);
  const Vec x = rng.normal_vec(10);
  EXPECT_EQ(same.forward(x), x);
  EXPECT_EQ(same.copy_scale(), 1.0);

  ConvLift lift(g, 2, 4, Orientation::Up);
  const Vec y = lift.forward(x);
  const double c = 1.0 / std::sqrt(2.0);
  EXPECT_DOUBLE_EQ(lift.copy_scale() * lift.copy_scale() * lift.groups(), 1.0);
  for (Index i = 0; i < 5; ++i) {
    EXPECT_DOUBLE_EQ(y[i], c * x[i]);
    EXPECT_DOUBLE_EQ(y[5 + i], c * x[i]);
    EXPECT_DOUBLE_EQ(y[10 + i], c * x[5 + i]);
    EXPECT_DOUBLE_EQ(y[15 + i], c * x[5 + i]);
  }
}

TEST(ConvLift, ParameterCount) {
  for (Index d : {1, 2, 3}) {
    for (Index l : {1, 3, 7, 21}) {
      ConvLift m(ConvGeometry{1, 32, 1, l, 1}, 2, 2 * d, Orientation::Up);
      EXPECT_EQ(m.num_params(), d * (l + 1) / 2);
    }
  }
  ConvLift m2(ConvGeometry{2, 8, 8, 7, 5}, 2, 4, Orientation::Low);
  EXPECT_EQ(m2.num_params(), 2 * 4 * 3);
}

TEST(ConvLift, ForwardMatchesDirectDefinition) {
  Rng rng(6);
  const Index n = 8;
  for (auto o : {Orientation::Up, Orientation::Low}) {
    for (auto [cin, cout] : {std::pair<Index, Index>{2, 4}, {4, 4}, {4, 8}, {2, 6}}) {
      ConvLift m(ConvGeometry{1, n, 1, 5, 1}, cin, cout, o);
      m.set_params(rng.normal_vec(m.num_params()));
      const Index b = cin / 2, d = cout / cin;
      const double c = std::sqrt(1.0 / static_cast<double>(d));
      const Vec x = rng.normal_vec(cin * n);
      // Oracle: c-copy of every narrow channel into each group plus the
      // block-symmetric convolution of the opposite half.
      Vec y = Vec::Zero(cout * n);
      const Index nh = b * n, wh = b * d * n;
      for (int half = 0; half < 2; ++half)
        for (Index g = 0; g < d; ++g) y.segment(half * wh + g * nh, nh) = c * x.segment(half * nh, nh);
      const Index src = o == Orientation::Up ? nh : 0;
      const Index dst = o == Orientation::Up ? 0 : wh;
      for (Index g = 0; g < d; ++g)
        for (Index i = 0; i < b; ++i)
          for (Index j = 0; j < b; ++j)
            y.segment(dst + (g * b + i) * n, n) +=
                direct_conv_1d(m.kernel_1d(g, std::abs(i - j)), x.segment(src + j * n, n));
      EXPECT_LT((m.forward(x) - y).cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_LT((m.dense_matrix() * x - y).cwiseAbs().maxCoeff(), 1e-12);
      // Kernels are palindromes.
      const Vec k = m.kernel_1d(0, 0);
      EXPECT_EQ(k, Vec(k.reverse()));
    }
  }
}

TEST(ConvLift, TwoDimensionalForwardMatchesDirectDefinition) {
  Rng rng(7);
  const Index n1 = 5, n2 = 4;
  ConvLift m(ConvGeometry{2, n1, n2, 3, 3}, 2, 4, Orientation::Low);
  m.set_params(rng.normal_vec(m.num_params()));
  const Index L = n1 * n2;
  const Vec x = rng.normal_vec(2 * L);
  const double c = 1 / std::sqrt(2.0);
  Vec y(4 * L);
  y << c * x.head(L), c * x.head(L), c * x.tail(L), c * x.tail(L);
  for (Index g = 0; g < 2; ++g) y.segment(2 * L + g * L, L) += direct_conv_2d(m.kernel_2d(g, 0), x.head(L), n1, n2);
  EXPECT_LT((m.forward(x) - y).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((m.dense_matrix() * x - y).cwiseAbs().maxCoeff(), 1e-12);
  const Mat k = m.kernel_2d(1, 0);
  EXPECT_EQ(k, Mat(k.colwise().reverse()));
  EXPECT_EQ(k, Mat(k.rowwise().reverse()));
}

TEST(ConvProj, ZeroKernelsAndInverseOfLift) {
  const ConvGeometry g{1, 6, 1, 3, 1};
  ConvProj same(g, 2, 2, Orientation::Low);
  Rng rng(8);
  const Vec x = rng.normal_vec(12);
  EXPECT_EQ(same.forward(x), x);
  ConvLift lift(g, 2, 4, Orientation::Up);
  ConvProj proj(g, 4, 2, Orientation::Up);
  EXPECT_LT((proj.forward(lift.forward(x)) - x).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ConvProj, DenseOracleAndSymplecticInverse) {
  Rng rng(9);
  for (auto o : {Orientation::Up, Orientation::Low}) {
    const ConvGeometry g{1, 8, 1, 5, 1};
    ConvProj m(g, 4, 2, o);
    m.set_params(rng.normal_vec(m.num_params()));
    const Mat P = m.dense_matrix();
    const Vec x = rng.normal_vec(32);
    EXPECT_LT((m.forward(x) - P * x).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT(symplectic_residual(P), 1e-12);
    // Its symplectic inverse is a lifting.
    EXPECT_LT(symplectic_residual(symplectic_inverse(Mat(P.transpose())).transpose()), 1e-12);
  }
  ConvProj m2(ConvGeometry{2, 4, 4, 3, 3}, 8, 4, Orientation::Up);
  m2.set_params(rng.normal_vec(m2.num_params()));
  const Vec x2 = rng.normal_vec(m2.in_dim());
  EXPECT_LT((m2.forward(x2) - m2.dense_matrix() * x2).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ConvBlock, RejectsBadChannels) {
  const ConvGeometry g{1, 6, 1, 3, 1};
  EXPECT_THROW(ConvLift(g, 3, 6, Orientation::Up), ShapeError);
  EXPECT_THROW(ConvLift(g, 4, 6, Orientation::Up), ShapeError);
  EXPECT_THROW(ConvProj(g, 6, 4, Orientation::Up), ShapeError);
  EXPECT_THROW(ConvLift(ConvGeometry{1, 6, 1, 4, 1}, 2, 2, Orientation::Up), ShapeError);
  ConvLift m(g, 2, 4, Orientation::Up);
  EXPECT_THROW(m.forward(Vec::Zero(11)), ShapeError);
}

TEST(PsdModule, IdentityProjectionAndSymplecticity) {
  PsdModule id(4, 4, PsdDirection::Reduce);
  Rng rng(10);
  const Vec x8 = rng.normal_vec(8);
  EXPECT_LT((id.forward(x8) - x8).cwiseAbs().maxCoeff(), 1e-15);
  const Vec x = rng.normal_vec(12);

  PsdModule red(6, 2, PsdDirection::Reduce);
  red.set_params(rng.normal_vec(12));
  PsdModule lift(6, 2, PsdDirection::Lift);
  lift.set_params(red.params());
  EXPECT_LT((red.basis().transpose() * red.basis() - Mat::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-12);
  const Vec once = lift.forward(red.forward(x));
  const Vec twice = lift.forward(red.forward(once));
  EXPECT_LT((once - twice).cwiseAbs().maxCoeff(), 1e-12);
  Mat P = Mat::Zero(12, 12);
  const Mat Q = red.basis();
  P.topLeftCorner(6, 6) = Q * Q.transpose();
  P.bottomRightCorner(6, 6) = Q * Q.transpose();
  EXPECT_LT((once - P * x).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT(symplectic_residual(lift.dense_matrix()), 1e-12);
  EXPECT_LT(symplectic_residual(red.dense_matrix()), 1e-12);
  EXPECT_LT((symplectic_inverse(lift.dense_matrix()) - red.dense_matrix()).cwiseAbs().maxCoeff(), 1e-14);
  // R has a positive diagonal, so the basis is the Gram-Schmidt one.
  const Eigen::Map<const Mat> raw(red.params().data(), 6, 2);
  const Vec q0 = raw.col(0).normalized();
  EXPECT_LT((Q.col(0) - q0).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(PsdModule, RejectsBadShapes) {
  EXPECT_THROW(PsdModule(2, 3, PsdDirection::Reduce), ShapeError);
  PsdModule m(4, 2, PsdDirection::Lift);
  EXPECT_THROW(m.forward(Vec::Zero(8)), ShapeError);
}

TEST(Pooling, WorkedExample) {
  Vec ref(8);
  ref << 2, 1, 3, 5, 2, 1, 3, 5;
  const PoolState st = pool_freeze(ref, 2, PoolSource::Up);
  EXPECT_EQ(st.index_map, (std::vector<Index>{0, 3}));
  Mat phi(2, 4);
  phi << 1, 0, 0, 0, 0, 0, 0, 1;
  EXPECT_EQ(st.phi(), phi);
  PoolModule pool(4, 2, PoolSource::Up);
  UnpoolModule unpool(4, 2, PoolSource::Up);
  pool.set_state(st);
  unpool.set_state(st);
  Vec pooled(4), back(8);
  pooled << 2, 5, 2, 5;
  back << 2, 0, 0, 5, 2, 0, 0, 5;
  EXPECT_EQ(pool.forward(ref), pooled);
  EXPECT_EQ(unpool.forward(pool.forward(ref)), back);
}

TEST(Pooling, TiesGoLeftAndSourceChannel) {
  const PoolState st = pool_freeze(Vec::Constant(12, 1.5), 3, PoolSource::Low);
  EXPECT_EQ(st.index_map, (std::vector<Index>{0, 3}));
  Vec ref(8);
  ref << 9, 0, 0, 9, 0, 4, 7, 1;
  EXPECT_EQ(pool_freeze(ref, 2, PoolSource::Low).index_map, (std::vector<Index>{1, 2}));
  EXPECT_EQ(pool_freeze(ref, 2, PoolSource::Up).index_map, (std::vector<Index>{0, 3}));
  EXPECT_THROW(pool_freeze(Vec::Zero(10), 2, PoolSource::Up), ShapeError);
}

TEST(Pooling, SelectionIsOrthonormalAndLinear) {
  Rng rng(11);
  for (int t = 0; t < 100; ++t) {
    const Index k = 1 + static_cast<Index>(rng.below(4));
    const Vec ref = rng.normal_vec(2 * 12 * k);
    const Mat P = pool_freeze(ref, k, PoolSource::Up).phi();
    EXPECT_EQ(Mat(P * P.transpose()), Mat(Mat::Identity(12, 12)));
  }
  PoolModule pool(8, 2, PoolSource::Up);
  UnpoolModule unpool(8, 2, PoolSource::Up);
  EXPECT_THROW(pool.forward(Vec::Zero(16)), StateError);
  const PoolState st = pool_freeze(rng.normal_vec(16), 2, PoolSource::Up);
  pool.set_state(st);
  unpool.set_state(st);
  const Vec x = rng.normal_vec(16), y = rng.normal_vec(16);
  EXPECT_LT((pool.forward(2.0 * x - 3.0 * y) - (2.0 * pool.forward(x) - 3.0 * pool.forward(y))).norm(), 1e-14);
  const Vec u = unpool.forward(pool.forward(x));
  EXPECT_EQ(unpool.forward(pool.forward(u)), u);
  EXPECT_LT(symplectic_residual(module_jacobian(unpool, pool.forward(x))), 1e-15);
  EXPECT_LT(symplectic_residual(module_jacobian(pool, x)), 1e-15);
}

TEST(AllLayers, JacobiansAreSymplecticAtRandomPoints) {
  Rng rng(12);
  for (int draw = 0; draw < 3; ++draw) {
    for (auto& m : sample_modules(rng)) {
      for (int k = 0; k < 3; ++k) {
        const Vec x = rng.normal_vec(m->in_dim());
        const Mat J = module_jacobian(*m, x);
        EXPECT_LT(symplectic_residual(J), 1e-8) << to_string(m->kind());
        EXPECT_LT((J - jac(*m, x)).cwiseAbs().maxCoeff(), 1e-6) << to_string(m->kind());
      }
    }
  }
}

TEST(AllLayers, VjpMatchesFiniteDifferences) {
  Rng rng(13);
  for (auto& m : sample_modules(rng)) {
    const Vec x = rng.normal_vec(m->in_dim());
    const Vec w = rng.normal_vec(m->out_dim());
    Vec gt = Vec::Zero(m->num_params());
    const Vec gx = m->vjp(x, w, &gt);
    const Vec fdx = jac(*m, x).transpose() * w;
    EXPECT_LT(testutil::rel_err(gx, fdx), 1e-6) << to_string(m->kind());
    if (m->num_params() == 0) continue;
    const Vec theta = m->params();
    auto clone = m->clone();
    const Vec fdt = testutil::fd_gradient(
        [&](const Vec& t) {
          clone->set_params(t);
          return w.dot(clone->forward(x));
        },
        theta);
    EXPECT_LT(testutil::rel_err(gt, fdt), 1e-6) << to_string(m->kind());
    // Parameter JVP agrees with the parameter VJP.
    const Vec dt = rng.normal_vec(theta.size());
    EXPECT_NEAR(w.dot(m->jvp(x, Vec::Zero(x.size()), dt)), gt.dot(dt), 1e-8 * (1 + std::abs(gt.dot(dt))));
  }
}

TEST(Composition, RandomSquareStacksStaySymplectic) {
  Rng rng(14);
  ModelGraph g;
  g.add(std::make_unique<LinearModule>(4, 2, Orientation::Up));
  g.add(std::make_unique<ActivationModule>(4, Orientation::Low));
  g.add(std::make_unique<ConvLift>(ConvGeometry{1, 2, 1, 3, 1}, 4, 4, Orientation::Up));
  g.validate();
  for (Index i = 0; i < g.size(); ++i) g.layer(i).set_params(rng.normal_vec(g.layer(i).num_params()));
  for (int k = 0; k < 5; ++k) EXPECT_LT(symplectic_residual(g.jacobian(rng.normal_vec(8))), 1e-10);
}

TEST(Composition, IdentityAutoencoder) {
  ArchitectureSpec a;
  a.n1 = 8;
  a.l1 = 3;
  a.channels = {2, 4, 2};
  a.activation_every = 4;
  a.pool_kernel = 1;
  a.latent = 8;
  Rng rng(15);
  Autoencoder ae = build_autoencoder(a, rng);
  Vec theta = ae.params();
  theta.setZero();
  ae.set_params(theta);
  // Zeroed PSD raw would be rank deficient; restore identity columns.
  for (auto* g : {&ae.encoder, &ae.decoder}) {
    for (Index i = 0; i < g->size(); ++i) {
      if (auto* p = dynamic_cast<PsdModule*>(&g->layer(i))) {
        Mat raw = Mat::Identity(p->n(), p->k());
        p->set_params(Eigen::Map<Vec>(raw.data(), raw.size()));
      }
    }
  }
  ae.freeze_pooling(Vec::Zero(16));
  const Vec x = rng.normal_vec(16);
  EXPECT_LT((ae.reconstruct(x) - x).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Composition, WaveEncoderShapeAndOrdering) {
  ArchitectureSpec a;
  a.n1 = 1024;
  a.latent = 2;
  Rng rng(16);
  Autoencoder ae = build_autoencoder(a, rng);
  EXPECT_EQ(ae.encoder.in_dim(), 2048);
  EXPECT_EQ(ae.encoder.out_dim(), 4);
  EXPECT_EQ(ae.decoder.in_dim(), 4);
  EXPECT_EQ(ae.decoder.out_dim(), 2048);
  Index convs = 0, acts = 0;
  for (Index i = 0; i < ae.encoder.size(); ++i) {
    const auto k = ae.encoder.layer(i).kind();
    convs += k == ModuleKind::ConvLift || k == ModuleKind::ConvProj;
    acts += k == ModuleKind::Activation;
  }
  EXPECT_EQ(convs, 12);
  EXPECT_EQ(acts, 6);
  EXPECT_EQ(ae.encoder.layer(ae.encoder.size() - 1).kind(), ModuleKind::PsdReduce);
  EXPECT_EQ(ae.encoder.layer(ae.encoder.size() - 2).kind(), ModuleKind::Pool);
  EXPECT_EQ(ae.decoder.layer(0).kind(), ModuleKind::PsdLift);
  EXPECT_EQ(ae.decoder.layer(1).kind(), ModuleKind::Unpool);
  EXPECT_THROW(ae.encode(Vec::Zero(2048)), StateError);
}

// A channel-changing lift followed by a projection is not symplectic in
// either the tall or the wide sense, so the composite check needs a square
// conv body.
TEST(Composition, TinyEncoderAndDecoderAreSymplectic) {
  ArchitectureSpec a;
  a.n1 = 8;
  a.l1 = 3;
  a.channels = {2};
  a.activation_every = 1;
  a.latent = 2;
  a.init_scale = 0.4;
  a.init_a = 0.4;
  Rng rng(17);
  Autoencoder ae = build_autoencoder(a, rng);
  ae.freeze_pooling(rng.normal_vec(16));
  for (int k = 0; k < 5; ++k) {
    const Vec x = rng.normal_vec(16);
    const Mat D = testutil::fd_jacobian([&](const Vec& v) { return ae.encode(v); }, x);
    EXPECT_LT(symplectic_residual(D), 1e-8);
    EXPECT_LT(symplectic_residual(ae.encoder.jacobian(x)), 1e-12);
    const Vec z = rng.normal_vec(4);
    EXPECT_LT(symplectic_residual(ae.decoder.jacobian(z)), 1e-12);
  }
}

TEST(ModelGraph, ValidationRejectsBadOrdering) {
  ModelGraph enc(GraphRole::Encoder);
  enc.add(std::make_unique<PsdModule>(4, 2, PsdDirection::Reduce));
  enc.add(std::make_unique<LinearModule>(2, 1, Orientation::Up));
  EXPECT_THROW(enc.validate(), ConfigError);
  ModelGraph g;
  g.add(std::make_unique<LinearModule>(3, 1, Orientation::Up));
  g.add(std::make_unique<LinearModule>(2, 1, Orientation::Up));
  EXPECT_THROW(g.validate(), ShapeError);
  ModelGraph sn(GraphRole::SympNet);
  sn.add(std::make_unique<PsdModule>(4, 2, PsdDirection::Reduce));
  EXPECT_THROW(sn.validate(), ConfigError);
  ModelGraph un;
  un.add(std::make_unique<LinearModule>(2, 1, Orientation::Up));
  EXPECT_THROW(un.forward(Vec::Zero(4)), StateError);
}

TEST(ModuleFactory, RebuildsFromSpec) {
  Rng rng(18);
  for (auto& m : sample_modules(rng)) {
    auto r = make_module(m->spec());
    EXPECT_EQ(r->kind(), m->kind());
    EXPECT_EQ(r->in_dim(), m->in_dim());
    EXPECT_EQ(r->out_dim(), m->out_dim());
    EXPECT_EQ(r->num_params(), m->num_params());
  }
}
