#pragma once

#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "sympcae/numcore.hpp"

namespace sympcae {

using SparseMat = Eigen::SparseMatrix<double>;

enum class PdeKind { Wave, Nls, SineGordon };

std::string to_string(PdeKind k);
PdeKind pde_kind_from_string(const std::string& s);

// Periodic uniform grid, points x_i = lo + i*dx with dx = (hi - lo)/n.
struct Grid1D {
  double lo = 0.0;
  double hi = 1.0;
  Index n = 0;

  double dx() const { return (hi - lo) / static_cast<double>(n); }
  Vec points() const;
};

// Square periodic grid flattened with x fastest.
struct Grid2D {
  double lo = 0.0;
  double hi = 1.0;
  Index nx = 0;
  Index ny = 0;

  double dx() const { return (hi - lo) / static_cast<double>(nx); }
  double dy() const { return (hi - lo) / static_cast<double>(ny); }
  Index size() const { return nx * ny; }
};

struct PdeConfig {
  PdeKind kind = PdeKind::Wave;
  double lo = 0.0;
  double hi = 5.0;
  Index n = 256;
  // Second grid axis, used by the sine-Gordon problem only.
  Index n2 = 1;
  double t_end = 5.0;
  // Number of recorded steps; the trajectory holds nt + 1 states.
  Index nt = 256;
  // Integrator steps per recorded step.
  Index substeps = 1;
  double wave_speed = 1.0;
  double alpha = 1.0;
  double beta = 1.5;
  // Use the nonlinear sign of the momentum equation exactly as printed
  // (+beta), which is inconsistent with the continuous equation.
  bool nls_printed_sign = false;
  double newton_tol = 1e-12;
  Index newton_max_iter = 50;

  void validate() const;
  double record_dt() const { return t_end / static_cast<double>(nt); }
  double step_dt() const { return record_dt() / static_cast<double>(substeps); }
  Index half_dim() const { return kind == PdeKind::SineGordon ? n * n2 : n; }
  Grid1D grid() const { return {lo, hi, n}; }
  Grid2D grid2d() const { return {lo, hi, n, n2}; }
};

struct Trajectory {
  PdeKind kind = PdeKind::Wave;
  Index n1 = 0;
  Index n2 = 1;
  double dt = 0.0;
  std::vector<double> times;
  // One state per column, (q, p) stacked.
  Mat states;
  std::vector<double> hamiltonian;

  Index steps() const { return states.cols(); }
  double max_relative_drift() const;
};

// (q_{i+1} - 2 q_i + q_{i-1}) / dx^2 with wraparound.
Vec dxx_periodic(const Vec& q, double dx);
// Second difference along the first (x) or second (y) axis of a flattened grid.
Vec dxx_periodic_2d(const Vec& q, Index nx, Index ny, double dx);
Vec dyy_periodic_2d(const Vec& q, Index nx, Index ny, double dy);
SparseMat dxx_matrix(Index n, double dx);
SparseMat laplacian_matrix(const Grid2D& g);

// Symplectic Euler: p += c dt D q, then q += dt p.
Vec wave_step(const Vec& z, double dt, double c, double dx);
Mat wave_step_matrix(Index n, double dt, double c, double dx);
// Discrete Hamiltonian with both forward and backward difference sums, as
// printed for the scheme; its gradient part is twice the energy below.
double wave_hamiltonian(const Vec& z, double c, double dx);
// dx * (|p|^2 / 2 + c/2 sum (q_{i+1} - q_i)^2 / dx^2), the energy whose
// gradient generates p' = c D q, q' = p. Used as the drift monitor.
double wave_energy(const Vec& z, double c, double dx);

Vec nls_rhs(const Vec& z, double alpha, double beta, double dx, bool printed_sign = false);
// Delta-x weighted discrete energy conserved by nls_rhs:
// sum dx [ -((dq)^2 + (dp)^2) / (2 dx^2) + beta/4 (q^2 + p^2)^2 ],
// forward differences, with alpha scaling the gradient term.
double nls_hamiltonian(const Vec& z, double alpha, double beta, double dx);
double nls_mass(const Vec& z, double dx);

Vec sg_rhs(const Vec& z, const Grid2D& g);
// 1/2 (p^T p - q^T D q) + sum (1 - cos q), unweighted.
double sg_hamiltonian(const Vec& z, const Grid2D& g);
// The same energy times dx*dy, a quadrature of the continuous one.
double sg_hamiltonian_weighted(const Vec& z, const Grid2D& g);

// Vector field with an analytic sparse Jacobian.
class VectorField {
 public:
  virtual ~VectorField() = default;
  virtual Index dim() const = 0;
  virtual Vec eval(const Vec& z) const = 0;
  virtual SparseMat jacobian(const Vec& z) const = 0;
};

class NlsField final : public VectorField {
 public:
  NlsField(Index n, double alpha, double beta, double dx, bool printed_sign = false);
  Index dim() const override { return 2 * n_; }
  Vec eval(const Vec& z) const override;
  SparseMat jacobian(const Vec& z) const override;

 private:
  Index n_;
  double alpha_, beta_, dx_;
  bool printed_;
  SparseMat D_;
};

class SineGordonField final : public VectorField {
 public:
  explicit SineGordonField(const Grid2D& g);
  Index dim() const override { return 2 * g_.size(); }
  Vec eval(const Vec& z) const override;
  SparseMat jacobian(const Vec& z) const override;

 private:
  Grid2D g_;
  SparseMat L_;
};

// z' = A z.
class LinearField final : public VectorField {
 public:
  explicit LinearField(SparseMat A) : A_(std::move(A)) {}
  Index dim() const override { return A_.rows(); }
  Vec eval(const Vec& z) const override { return A_ * z; }
  SparseMat jacobian(const Vec&) const override { return A_; }

 private:
  SparseMat A_;
};

struct MidpointStats {
  Index iterations = 0;
  double residual = 0.0;
};

// Linear solver for the Newton systems. Auto picks sparse LU up to
// kDirectSolveLimit unknowns and BiCGSTAB above.
enum class NewtonSolver { Auto, SparseLu, BiCgStab };
inline constexpr Index kDirectSolveLimit = 4096;

// Solves z1 = z0 + dt f((z0 + z1)/2) by Newton iteration on
// I - dt/2 Df((z0 + z1)/2). Throws NumericError when the infinity-norm
// residual is still above tol after max_iter iterations.
Vec implicit_midpoint_step(const VectorField& f, const Vec& z0, double dt, double tol, Index max_iter,
                           MidpointStats* stats = nullptr, NewtonSolver solver = NewtonSolver::Auto);

Vec initial_state(const PdeConfig& cfg);
double hamiltonian(const PdeConfig& cfg, const Vec& z);

// Integrates the configured problem and records nt + 1 states.
Trajectory generate(const PdeConfig& cfg);

}  // namespace sympcae
