#pragma once

#include "sympcae/module.hpp"

namespace sympcae {

enum class ActivationFn { Tanh, Sigmoid };

std::string to_string(ActivationFn f);
ActivationFn activation_from_string(const std::string& s);

double activation_value(ActivationFn f, double x);
double activation_derivative(ActivationFn f, double x);
// Antiderivative used as the shear potential, a^T (int sigma)(x + b).
double activation_antiderivative(ActivationFn f, double x);

// Product of m unit-triangular shears with symmetric blocks S_1..S_m,
// alternating between the upper and lower block starting from `first`.
// Each S_i is stored by its upper triangle, row by row.
class LinearModule final : public Module {
 public:
  LinearModule(Index half_dim, Index sublayers, Orientation first);

  ModuleKind kind() const override { return ModuleKind::Linear; }
  Index in_dim() const override { return 2 * n_; }
  Index out_dim() const override { return 2 * n_; }

  Vec forward(const Vec& x) const override;
  Vec jvp(const Vec& x, const Vec& dx, const Vec& dtheta) const override;
  Vec vjp(const Vec& x, const Vec& ybar, Vec* theta_bar) const override;

  ModuleSpec spec() const override;
  std::unique_ptr<Module> clone() const override { return std::make_unique<LinearModule>(*this); }
  std::vector<TensorSlot> tensors() const override;

  Index half_dim() const { return n_; }
  Index sublayers() const { return m_; }
  Orientation first() const { return first_; }
  // Materialized symmetric block of sublayer i.
  Mat block(Index i) const;
  Mat dense_matrix() const;

 private:
  Index tri_size() const { return n_ * (n_ + 1) / 2; }
  bool acts_on_q(Index sublayer) const;

  Index n_;
  Index m_;
  Orientation first_;
};

// Nonlinear shear (q, p) -> (q + diag(a) sigma(p + b), p) for Up and
// (q, p) -> (q, p + diag(a) sigma(q + b)) for Low. Parameters are [a; b].
class ActivationModule final : public Module {
 public:
  ActivationModule(Index half_dim, Orientation o, ActivationFn fn = ActivationFn::Tanh);

  ModuleKind kind() const override { return ModuleKind::Activation; }
  Index in_dim() const override { return 2 * n_; }
  Index out_dim() const override { return 2 * n_; }

  Vec forward(const Vec& x) const override;
  Vec jvp(const Vec& x, const Vec& dx, const Vec& dtheta) const override;
  Vec vjp(const Vec& x, const Vec& ybar, Vec* theta_bar) const override;

  ModuleSpec spec() const override;
  std::unique_ptr<Module> clone() const override { return std::make_unique<ActivationModule>(*this); }
  std::vector<TensorSlot> tensors() const override;

  Index half_dim() const { return n_; }
  Orientation orientation() const { return orientation_; }
  ActivationFn function() const { return fn_; }
  auto a() const { return params_.head(n_); }
  auto b() const { return params_.tail(n_); }

 private:
  Index n_;
  Orientation orientation_;
  ActivationFn fn_;
};

}  // namespace sympcae
