#include "sympcae/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <ostream>

#include "sympcae/architecture.hpp"
#include "sympcae/conv.hpp"
#include "sympcae/io.hpp"
#include "sympcae/pde.hpp"
#include "sympcae/pooling.hpp"
#include "sympcae/psd_module.hpp"
#include "sympcae/sympnet_modules.hpp"
#include "sympcae/train.hpp"

namespace sympcae {

Mat module_jacobian(const Module& m, const Vec& x) {
  Mat J(m.out_dim(), m.in_dim());
  Vec e = Vec::Zero(m.in_dim());
  for (Index j = 0; j < m.in_dim(); ++j) {
    e[j] = 1.0;
    J.col(j) = m.jvp(x, e, Vec());
    e[j] = 0.0;
  }
  return J;
}

namespace {

std::unique_ptr<Module> randomized(std::unique_ptr<Module> m, Rng& rng) {
  init_module(*m, rng, 0.5, 0.5);
  if (m->kind() == ModuleKind::Activation) m->set_params(rng.uniform_vec(m->num_params(), -1.0, 1.0));
  return m;
}

}  // namespace

std::vector<std::unique_ptr<Module>> sample_modules(Rng& rng) {
  std::vector<std::unique_ptr<Module>> out;
  out.push_back(randomized(std::make_unique<LinearModule>(3, 2, Orientation::Up), rng));
  out.push_back(randomized(std::make_unique<LinearModule>(3, 3, Orientation::Low), rng));
  out.push_back(randomized(std::make_unique<ActivationModule>(3, Orientation::Up), rng));
  out.push_back(randomized(std::make_unique<ActivationModule>(3, Orientation::Low, ActivationFn::Sigmoid), rng));
  const ConvGeometry g1{1, 6, 1, 3, 1};
  const ConvGeometry g2{2, 3, 3, 3, 3};
  out.push_back(randomized(std::make_unique<ConvLift>(g1, 2, 4, Orientation::Up), rng));
  out.push_back(randomized(std::make_unique<ConvLift>(g1, 4, 4, Orientation::Low), rng));
  out.push_back(randomized(std::make_unique<ConvProj>(g1, 4, 2, Orientation::Low), rng));
  out.push_back(randomized(std::make_unique<ConvLift>(g2, 2, 4, Orientation::Low), rng));
  out.push_back(randomized(std::make_unique<ConvProj>(g2, 4, 2, Orientation::Up), rng));
  out.push_back(randomized(std::make_unique<PsdModule>(6, 2, PsdDirection::Reduce), rng));
  out.push_back(randomized(std::make_unique<PsdModule>(6, 2, PsdDirection::Lift), rng));
  const PoolState st = pool_freeze(rng.normal_vec(16), 2, PoolSource::Up);
  auto pool = std::make_unique<PoolModule>(8, 2, PoolSource::Up);
  pool->set_state(st);
  auto unpool = std::make_unique<UnpoolModule>(8, 2, PoolSource::Up);
  unpool->set_state(st);
  out.push_back(std::move(pool));
  out.push_back(std::move(unpool));
  return out;
}

namespace {

using Clock = std::chrono::steady_clock;

CheckResult timed(const std::string& name, double tol, const std::function<double()>& body) {
  const auto t0 = Clock::now();
  CheckResult r{name, false, 0.0, tol, 0.0};
  r.worst = body();
  r.ok = std::isfinite(r.worst) && r.worst < tol;
  r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return r;
}

double symplectic_residual(const Module& m, const Vec& x) {
  const Mat J = module_jacobian(m, x);
  if (J.rows() >= J.cols()) return is_symplectic(J, 0.0).residual;
  return is_symplectic_reduction(J, 0.0).residual;
}

double rel_diff(const Vec& a, const Vec& b) { return (a - b).norm() / std::max(1.0, b.norm()); }

// Gradient of <w, f(x)> from vjp against central differences, in both x and theta.
double gradient_error(Module& m, const Vec& x, Rng& rng) {
  const Vec w = rng.normal_vec(m.out_dim());
  Vec gtheta = Vec::Zero(m.num_params());
  const Vec gx = m.vjp(x, w, &gtheta);
  const double h = 1e-6;
  Vec fdx(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    Vec xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    fdx[i] = (w.dot(m.forward(xp)) - w.dot(m.forward(xm))) / (2 * h);
  }
  double err = rel_diff(gx, fdx);
  if (m.num_params() > 0) {
    const Vec theta = m.params();
    Vec fdt(theta.size());
    for (Index i = 0; i < theta.size(); ++i) {
      Vec tp = theta, tm = theta;
      tp[i] += h;
      tm[i] -= h;
      m.set_params(tp);
      const double fp = w.dot(m.forward(x));
      m.set_params(tm);
      const double fm = w.dot(m.forward(x));
      fdt[i] = (fp - fm) / (2 * h);
    }
    m.set_params(theta);
    err = std::max(err, rel_diff(gtheta, fdt));
  }
  return err;
}

ArchitectureSpec tiny_arch() {
  ArchitectureSpec a;
  a.n1 = 8;
  a.l1 = 3;
  a.channels = {2, 4, 4};
  a.activation_every = 2;
  a.latent = 1;
  a.init_scale = 0.3;
  a.init_a = 0.3;
  return a;
}

}  // namespace

std::vector<CheckResult> run_verify(std::uint64_t seed, std::ostream& log) {
  std::vector<CheckResult> out;
  Rng rng(seed);

  out.push_back(timed("layer Jacobians are symplectic", 1e-8, [&] {
    double worst = 0.0;
    for (int draw = 0; draw < 10; ++draw) {
      for (auto& m : sample_modules(rng)) {
        for (int k = 0; k < 10; ++k) worst = std::max(worst, symplectic_residual(*m, rng.normal_vec(m->in_dim())));
      }
    }
    return worst;
  }));

  out.push_back(timed("convolution matches dense Toeplitz form", 1e-12, [&] {
    double worst = 0.0;
    for (auto& m : sample_modules(rng)) {
      auto* c = dynamic_cast<ConvBlock*>(m.get());
      if (!c) continue;
      const Mat A = c->dense_matrix();
      for (int k = 0; k < 5; ++k) {
        const Vec x = rng.normal_vec(c->in_dim());
        worst = std::max(worst, (c->forward(x) - A * x).cwiseAbs().maxCoeff());
      }
    }
    return worst;
  }));

  out.push_back(timed("reverse-mode gradients match finite differences", 1e-5, [&] {
    double worst = 0.0;
    for (auto& m : sample_modules(rng)) worst = std::max(worst, gradient_error(*m, rng.normal_vec(m->in_dim()), rng));
    return worst;
  }));

  out.push_back(timed("autoencoder loss gradient matches finite differences", 1e-5, [&] {
    Rng local(seed + 1);
    Autoencoder ae = build_autoencoder(tiny_arch(), local);
    const Mat X = local.normal_mat(ae.encoder.in_dim(), 3);
    ae.freeze_pooling(X.col(0));
    Vec g = Vec::Zero(ae.num_params());
    loss_autoencoder(ae, X, 1e-3, false, &g);
    const Vec theta = ae.params();
    double worst = 0.0;
    const double h = 1e-6;
    for (Index i = 0; i < theta.size(); i += std::max<Index>(1, theta.size() / 40)) {
      Vec tp = theta, tm = theta;
      tp[i] += h;
      tm[i] -= h;
      ae.set_params(tp);
      const double fp = loss_autoencoder(ae, X, 1e-3, false, nullptr);
      ae.set_params(tm);
      const double fm = loss_autoencoder(ae, X, 1e-3, false, nullptr);
      worst = std::max(worst, std::abs((fp - fm) / (2 * h) - g[i]) / std::max(1.0, std::abs(g[i])));
    }
    ae.set_params(theta);
    return worst;
  }));

  out.push_back(timed("pooling worked example and selection orthogonality", 1e-15, [&] {
    Vec ref(8);
    ref << 2, 1, 3, 5, 0, 0, 0, 0;
    PoolModule pool(4, 2, PoolSource::Up);
    UnpoolModule unpool(4, 2, PoolSource::Up);
    const PoolState st = pool_freeze(ref, 2, PoolSource::Up);
    pool.set_state(st);
    unpool.set_state(st);
    Vec pooled(4), back(8);
    pooled << 2, 5, 0, 0;
    back << 2, 0, 0, 5, 0, 0, 0, 0;
    double worst = std::max((pool.forward(ref) - pooled).cwiseAbs().maxCoeff(),
                            (unpool.forward(pool.forward(ref)) - back).cwiseAbs().maxCoeff());
    for (int k = 0; k < 100; ++k) {
      const Mat P = pool_freeze(rng.normal_vec(32), 4, PoolSource::Low).phi();
      worst = std::max(worst, (P * P.transpose() - Mat::Identity(P.rows(), P.rows())).cwiseAbs().maxCoeff());
    }
    return worst;
  }));

  out.push_back(timed("wave step matrix is symplectic", 1e-12, [&] {
    return is_symplectic(wave_step_matrix(16, 0.01, 1.0, 5.0 / 16.0), 0.0).residual;
  }));

  out.push_back(timed("checkpoint round trip is exact", 1e-300, [&] {
    Rng local(seed + 2);
    Autoencoder ae = build_autoencoder(tiny_arch(), local);
    ae.freeze_pooling(local.normal_vec(ae.encoder.in_dim()));
    const std::string bytes = encode_checkpoint(make_checkpoint(ae));
    const Autoencoder back = autoencoder_from(decode_checkpoint(bytes));
    const Vec x = local.normal_vec(ae.encoder.in_dim());
    double worst = (back.params() - ae.params()).cwiseAbs().maxCoeff();
    worst = std::max(worst, (back.reconstruct(x) - ae.reconstruct(x)).cwiseAbs().maxCoeff());
    if (encode_checkpoint(make_checkpoint(back)) != bytes) worst = 1.0;
    return worst;
  }));

  for (const auto& r : out) {
    log << (r.ok ? "PASS " : "FAIL ") << r.name << " (worst " << format_number(r.worst) << ", tol "
        << format_number(r.tolerance) << ", " << format_number(r.seconds) << " s)\n";
  }
  return out;
}

}  // namespace sympcae
