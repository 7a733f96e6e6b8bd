#include "sympcae/pde.hpp"

#include <cmath>
#include <memory>
#include <string>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>

namespace sympcae {

std::string to_string(PdeKind k) {
  switch (k) {
    case PdeKind::Wave: return "wave";
    case PdeKind::Nls: return "nls";
    case PdeKind::SineGordon: return "sg";
  }
  return "wave";
}

PdeKind pde_kind_from_string(const std::string& s) {
  if (s == "wave") return PdeKind::Wave;
  if (s == "nls") return PdeKind::Nls;
  if (s == "sg") return PdeKind::SineGordon;
  throw ConfigError("unknown pde '" + s + "' (expected wave, nls or sg)");
}

Vec Grid1D::points() const {
  Vec x(n);
  for (Index i = 0; i < n; ++i) x[i] = lo + static_cast<double>(i) * dx();
  return x;
}

void PdeConfig::validate() const {
  if (n < 3) throw ConfigError("pde: grid needs at least 3 points");
  if (kind == PdeKind::SineGordon && n2 < 3) throw ConfigError("pde: sine-Gordon grid needs at least 3 points per axis");
  if (kind != PdeKind::SineGordon && n2 != 1) throw ConfigError("pde: 1D problems need n2 = 1");
  if (!(hi > lo)) throw ConfigError("pde: empty domain");
  if (!(t_end > 0.0)) throw ConfigError("pde: final time must be positive");
  if (nt < 1 || substeps < 1) throw ConfigError("pde: nt and substeps must be positive");
  if (!(newton_tol > 0.0) || newton_max_iter < 1) throw ConfigError("pde: invalid Newton settings");
  if (alpha < 0.0) throw ConfigError("pde: alpha must be non-negative");
  if (kind == PdeKind::Wave) {
    if (!(wave_speed > 0.0)) throw ConfigError("pde: wave speed must be positive");
    // Symplectic Euler is stable for dt * omega_max <= 2, omega_max = 2 sqrt(c) / dx.
    const double limit = grid().dx() / std::sqrt(wave_speed);
    if (step_dt() > limit * (1.0 + 1e-12)) {
      throw ConfigError("pde: wave time step " + std::to_string(step_dt()) + " exceeds the stability limit " +
                        std::to_string(limit) + "; raise nt or substeps");
    }
  }
}

double Trajectory::max_relative_drift() const {
  if (hamiltonian.empty()) return 0.0;
  const double h0 = hamiltonian.front();
  double worst = 0.0;
  for (double h : hamiltonian) worst = std::max(worst, std::abs(h - h0));
  return h0 != 0.0 ? worst / std::abs(h0) : worst;
}

Vec dxx_periodic(const Vec& q, double dx) {
  const Index n = q.size();
  if (n < 3) throw ShapeError("dxx_periodic: need at least 3 points");
  const double s = 1.0 / (dx * dx);
  Vec out(n);
  for (Index i = 0; i < n; ++i) {
    const double left = q[i == 0 ? n - 1 : i - 1];
    const double right = q[i == n - 1 ? 0 : i + 1];
    out[i] = (right - 2.0 * q[i] + left) * s;
  }
  return out;
}

Vec dxx_periodic_2d(const Vec& q, Index nx, Index ny, double dx) {
  if (q.size() != nx * ny) throw ShapeError("dxx_periodic_2d: size does not match the grid");
  Vec out(q.size());
  for (Index j = 0; j < ny; ++j) out.segment(j * nx, nx) = dxx_periodic(q.segment(j * nx, nx), dx);
  return out;
}

Vec dyy_periodic_2d(const Vec& q, Index nx, Index ny, double dy) {
  if (q.size() != nx * ny) throw ShapeError("dyy_periodic_2d: size does not match the grid");
  if (ny < 3) throw ShapeError("dyy_periodic_2d: need at least 3 points");
  const double s = 1.0 / (dy * dy);
  Vec out(q.size());
  for (Index j = 0; j < ny; ++j) {
    const Index jm = j == 0 ? ny - 1 : j - 1;
    const Index jp = j == ny - 1 ? 0 : j + 1;
    for (Index i = 0; i < nx; ++i) out[i + nx * j] = (q[i + nx * jp] - 2.0 * q[i + nx * j] + q[i + nx * jm]) * s;
  }
  return out;
}

SparseMat dxx_matrix(Index n, double dx) {
  const double s = 1.0 / (dx * dx);
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(3 * n));
  for (Index i = 0; i < n; ++i) {
    t.emplace_back(i, i, -2.0 * s);
    t.emplace_back(i, (i + 1) % n, s);
    t.emplace_back(i, (i + n - 1) % n, s);
  }
  SparseMat D(n, n);
  D.setFromTriplets(t.begin(), t.end());
  return D;
}

SparseMat laplacian_matrix(const Grid2D& g) {
  const Index nx = g.nx;
  const Index ny = g.ny;
  const double sx = 1.0 / (g.dx() * g.dx());
  const double sy = 1.0 / (g.dy() * g.dy());
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(5 * nx * ny));
  for (Index j = 0; j < ny; ++j) {
    for (Index i = 0; i < nx; ++i) {
      const Index k = i + nx * j;
      t.emplace_back(k, k, -2.0 * sx - 2.0 * sy);
      t.emplace_back(k, (i + 1) % nx + nx * j, sx);
      t.emplace_back(k, (i + nx - 1) % nx + nx * j, sx);
      t.emplace_back(k, i + nx * ((j + 1) % ny), sy);
      t.emplace_back(k, i + nx * ((j + ny - 1) % ny), sy);
    }
  }
  SparseMat L(nx * ny, nx * ny);
  L.setFromTriplets(t.begin(), t.end());
  return L;
}

Vec wave_step(const Vec& z, double dt, double c, double dx) {
  if (z.size() % 2 != 0) throw ShapeError("wave_step: state must have even length");
  const Index n = z.size() / 2;
  Vec out = z;
  out.tail(n) += (c * dt) * dxx_periodic(z.head(n), dx);
  out.head(n) += dt * out.tail(n);
  return out;
}

Mat wave_step_matrix(Index n, double dt, double c, double dx) {
  const Mat D = Mat(dxx_matrix(n, dx));
  Mat upper = Mat::Identity(2 * n, 2 * n);
  upper.topRightCorner(n, n) = dt * Mat::Identity(n, n);
  Mat lower = Mat::Identity(2 * n, 2 * n);
  lower.bottomLeftCorner(n, n) = c * dt * D;
  return upper * lower;
}

double wave_hamiltonian(const Vec& z, double c, double dx) {
  if (z.size() % 2 != 0) throw ShapeError("wave_hamiltonian: state must have even length");
  const Index n = z.size() / 2;
  const auto q = z.head(n);
  const auto p = z.tail(n);
  double h = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double fwd = q[(i + 1) % n] - q[i];
    const double bwd = q[i] - q[(i + n - 1) % n];
    h += dx * (0.5 * p[i] * p[i] + c * fwd * fwd / (2.0 * dx * dx) + c * bwd * bwd / (2.0 * dx * dx));
  }
  return h;
}

double wave_energy(const Vec& z, double c, double dx) {
  if (z.size() % 2 != 0) throw ShapeError("wave_energy: state must have even length");
  const Index n = z.size() / 2;
  double h = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double fwd = z[(i + 1) % n] - z[i];
    h += dx * (0.5 * z[n + i] * z[n + i] + c * fwd * fwd / (2.0 * dx * dx));
  }
  return h;
}

Vec nls_rhs(const Vec& z, double alpha, double beta, double dx, bool printed_sign) {
  if (z.size() % 2 != 0) throw ShapeError("nls_rhs: state must have even length");
  const Index n = z.size() / 2;
  const Vec q = z.head(n);
  const Vec p = z.tail(n);
  const Vec s = q.cwiseProduct(q) + p.cwiseProduct(p);
  Vec out(2 * n);
  out.head(n) = alpha * dxx_periodic(p, dx) + beta * s.cwiseProduct(p);
  const double sign = printed_sign ? 1.0 : -1.0;
  out.tail(n) = -alpha * dxx_periodic(q, dx) + sign * beta * s.cwiseProduct(q);
  return out;
}

double nls_hamiltonian(const Vec& z, double alpha, double beta, double dx) {
  if (z.size() % 2 != 0) throw ShapeError("nls_hamiltonian: state must have even length");
  const Index n = z.size() / 2;
  double h = 0.0;
  for (Index i = 0; i < n; ++i) {
    const Index j = (i + 1) % n;
    const double dq = z[j] - z[i];
    const double dp = z[n + j] - z[n + i];
    const double s = z[i] * z[i] + z[n + i] * z[n + i];
    h += dx * (-alpha * (dq * dq + dp * dp) / (2.0 * dx * dx) + 0.25 * beta * s * s);
  }
  return h;
}

double nls_mass(const Vec& z, double dx) { return dx * z.squaredNorm(); }

namespace {

void check_sg(const Vec& z, const Grid2D& g) {
  if (z.size() != 2 * g.size()) throw ShapeError("sine-Gordon: state size does not match the grid");
}

Vec laplacian_apply(const Vec& q, const Grid2D& g) {
  return dxx_periodic_2d(q, g.nx, g.ny, g.dx()) + dyy_periodic_2d(q, g.nx, g.ny, g.dy());
}

}  // namespace

Vec sg_rhs(const Vec& z, const Grid2D& g) {
  check_sg(z, g);
  const Index n = g.size();
  Vec out(2 * n);
  out.head(n) = z.tail(n);
  out.tail(n) = laplacian_apply(z.head(n), g) - z.head(n).array().sin().matrix();
  return out;
}

double sg_hamiltonian(const Vec& z, const Grid2D& g) {
  check_sg(z, g);
  const Index n = g.size();
  const Vec q = z.head(n);
  const auto p = z.tail(n);
  return 0.5 * (p.squaredNorm() - q.dot(laplacian_apply(q, g))) + (1.0 - q.array().cos()).sum();
}

double sg_hamiltonian_weighted(const Vec& z, const Grid2D& g) { return g.dx() * g.dy() * sg_hamiltonian(z, g); }

NlsField::NlsField(Index n, double alpha, double beta, double dx, bool printed_sign)
    : n_(n), alpha_(alpha), beta_(beta), dx_(dx), printed_(printed_sign), D_(dxx_matrix(n, dx)) {}

Vec NlsField::eval(const Vec& z) const { return nls_rhs(z, alpha_, beta_, dx_, printed_); }

SparseMat NlsField::jacobian(const Vec& z) const {
  const Index n = n_;
  const double sign = printed_ ? 1.0 : -1.0;
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(10 * n));
  for (int k = 0; k < D_.outerSize(); ++k) {
    for (SparseMat::InnerIterator it(D_, k); it; ++it) {
      t.emplace_back(it.row(), n + it.col(), alpha_ * it.value());
      t.emplace_back(n + it.row(), it.col(), -alpha_ * it.value());
    }
  }
  for (Index i = 0; i < n; ++i) {
    const double q = z[i];
    const double p = z[n + i];
    const double s = q * q + p * p;
    t.emplace_back(i, i, 2.0 * beta_ * q * p);
    t.emplace_back(i, n + i, beta_ * (s + 2.0 * p * p));
    t.emplace_back(n + i, i, sign * beta_ * (s + 2.0 * q * q));
    t.emplace_back(n + i, n + i, sign * 2.0 * beta_ * q * p);
  }
  SparseMat J(2 * n, 2 * n);
  J.setFromTriplets(t.begin(), t.end());
  return J;
}

SineGordonField::SineGordonField(const Grid2D& g) : g_(g), L_(laplacian_matrix(g)) {}

Vec SineGordonField::eval(const Vec& z) const {
  check_sg(z, g_);
  const Index n = g_.size();
  Vec out(2 * n);
  out.head(n) = z.tail(n);
  out.tail(n) = L_ * z.head(n) - z.head(n).array().sin().matrix();
  return out;
}

SparseMat SineGordonField::jacobian(const Vec& z) const {
  const Index n = g_.size();
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(7 * n));
  for (Index i = 0; i < n; ++i) t.emplace_back(i, n + i, 1.0);
  for (int k = 0; k < L_.outerSize(); ++k) {
    for (SparseMat::InnerIterator it(L_, k); it; ++it) t.emplace_back(n + it.row(), it.col(), it.value());
  }
  for (Index i = 0; i < n; ++i) t.emplace_back(n + i, i, -std::cos(z[i]));
  SparseMat J(2 * n, 2 * n);
  J.setFromTriplets(t.begin(), t.end());
  return J;
}

Vec implicit_midpoint_step(const VectorField& f, const Vec& z0, double dt, double tol, Index max_iter,
                           MidpointStats* stats, NewtonSolver solver) {
  if (z0.size() != f.dim()) throw ShapeError("implicit_midpoint_step: state size does not match the field");
  const Index n = z0.size();
  if (solver == NewtonSolver::Auto) solver = n <= kDirectSolveLimit ? NewtonSolver::SparseLu : NewtonSolver::BiCgStab;
  SparseMat I(n, n);
  I.setIdentity();
  Vec z1 = z0 + dt * f.eval(z0);
  Eigen::SparseLU<SparseMat> lu;
  Eigen::BiCGSTAB<SparseMat, Eigen::DiagonalPreconditioner<double>> krylov;
  krylov.setTolerance(1e-15);
  bool analyzed = false;
  double res = 0.0;
  for (Index it = 0; it <= max_iter; ++it) {
    const Vec mid = 0.5 * (z0 + z1);
    const Vec r = z1 - z0 - dt * f.eval(mid);
    res = r.lpNorm<Eigen::Infinity>();
    if (!std::isfinite(res)) throw NumericError("implicit midpoint: non-finite residual");
    if (res <= tol) {
      if (stats) *stats = {it, res};
      return z1;
    }
    if (it == max_iter) break;
    SparseMat A = I - (0.5 * dt) * f.jacobian(mid);
    A.makeCompressed();
    if (solver == NewtonSolver::SparseLu) {
      if (!analyzed) {
        lu.analyzePattern(A);
        analyzed = true;
      }
      lu.factorize(A);
      if (lu.info() != Eigen::Success) throw NumericError("implicit midpoint: singular Newton matrix");
      z1 -= lu.solve(r);
    } else {
      krylov.compute(A);
      const Vec delta = krylov.solve(r);
      if (!delta.allFinite()) throw NumericError("implicit midpoint: Krylov solve failed");
      z1 -= delta;
    }
  }
  throw NumericError("implicit midpoint: Newton did not converge, residual " + std::to_string(res) + " after " +
                     std::to_string(max_iter) + " iterations");
}

Vec initial_state(const PdeConfig& cfg) {
  cfg.validate();
  switch (cfg.kind) {
    case PdeKind::Wave: {
      const Vec x = cfg.grid().points();
      Vec z = Vec::Zero(2 * cfg.n);
      for (Index i = 0; i < cfg.n; ++i) z[i] = std::exp(-(x[i] - 2.5) * (x[i] - 2.5));
      return z;
    }
    case PdeKind::Nls: {
      // u = p + i q with u0 = sqrt(2) sech(x): real initial data sits in p.
      const Vec x = cfg.grid().points();
      Vec z = Vec::Zero(2 * cfg.n);
      for (Index i = 0; i < cfg.n; ++i) z[cfg.n + i] = std::sqrt(2.0) / std::cosh(x[i]);
      return z;
    }
    case PdeKind::SineGordon: {
      const Grid2D g = cfg.grid2d();
      Vec z = Vec::Zero(2 * g.size());
      for (Index j = 0; j < g.ny; ++j) {
        const double y = g.lo + static_cast<double>(j) * g.dy();
        for (Index i = 0; i < g.nx; ++i) {
          const double x = g.lo + static_cast<double>(i) * g.dx();
          z[i + g.nx * j] = 4.0 * std::atan(std::exp(3.0 - std::sqrt(x * x + y * y)));
        }
      }
      return z;
    }
  }
  return {};
}

double hamiltonian(const PdeConfig& cfg, const Vec& z) {
  switch (cfg.kind) {
    case PdeKind::Wave: return wave_energy(z, cfg.wave_speed, cfg.grid().dx());
    case PdeKind::Nls: return nls_hamiltonian(z, cfg.alpha, cfg.beta, cfg.grid().dx());
    case PdeKind::SineGordon: return sg_hamiltonian(z, cfg.grid2d());
  }
  return 0.0;
}

Trajectory generate(const PdeConfig& cfg) {
  cfg.validate();
  Trajectory tr;
  tr.kind = cfg.kind;
  tr.n1 = cfg.n;
  tr.n2 = cfg.kind == PdeKind::SineGordon ? cfg.n2 : 1;
  tr.dt = cfg.record_dt();
  const Index dim = 2 * cfg.half_dim();
  tr.states.resize(dim, cfg.nt + 1);
  Vec z = initial_state(cfg);
  const double h = cfg.step_dt();

  std::unique_ptr<VectorField> field;
  if (cfg.kind == PdeKind::Nls) {
    field = std::make_unique<NlsField>(cfg.n, cfg.alpha, cfg.beta, cfg.grid().dx(), cfg.nls_printed_sign);
  } else if (cfg.kind == PdeKind::SineGordon) {
    field = std::make_unique<SineGordonField>(cfg.grid2d());
  }

  for (Index k = 0; k <= cfg.nt; ++k) {
    if (k > 0) {
      for (Index s = 0; s < cfg.substeps; ++s) {
        if (cfg.kind == PdeKind::Wave) {
          z = wave_step(z, h, cfg.wave_speed, cfg.grid().dx());
        } else {
          z = implicit_midpoint_step(*field, z, h, cfg.newton_tol, cfg.newton_max_iter);
        }
      }
      if (!z.allFinite()) throw NumericError("generate: non-finite state at step " + std::to_string(k), static_cast<long>(k));
    }
    tr.states.col(k) = z;
    tr.times.push_back(static_cast<double>(k) * tr.dt);
    tr.hamiltonian.push_back(hamiltonian(cfg, z));
  }
  return tr;
}

}  // namespace sympcae
