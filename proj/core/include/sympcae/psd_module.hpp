#pragma once

#include "sympcae/module.hpp"

namespace sympcae {

enum class PsdDirection { Reduce, Lift };

// Cotangent-lift style map blkdiag(Psi, Psi) with Psi = Q^T, where Q R = raw
// is the thin QR factorization of the n x k raw parameter matrix with a
// positive diagonal in R. Reduce maps R^{2n} -> R^{2k}, Lift maps back with
// blkdiag(Q, Q).
class PsdModule final : public Module {
 public:
  PsdModule(Index n, Index k, PsdDirection dir);

  ModuleKind kind() const override {
    return dir_ == PsdDirection::Reduce ? ModuleKind::PsdReduce : ModuleKind::PsdLift;
  }
  Index in_dim() const override { return dir_ == PsdDirection::Reduce ? 2 * n_ : 2 * k_; }
  Index out_dim() const override { return dir_ == PsdDirection::Reduce ? 2 * k_ : 2 * n_; }

  Vec forward(const Vec& x) const override;
  Vec jvp(const Vec& x, const Vec& dx, const Vec& dtheta) const override;
  Vec vjp(const Vec& x, const Vec& ybar, Vec* theta_bar) const override;

  ModuleSpec spec() const override;
  std::unique_ptr<Module> clone() const override { return std::make_unique<PsdModule>(*this); }
  std::vector<TensorSlot> tensors() const override;

  Index n() const { return n_; }
  Index k() const { return k_; }
  PsdDirection direction() const { return dir_; }
  // Column-orthonormal n x k factor; Psi = basis().transpose().
  const Mat& basis() const { return Q_; }
  Mat dense_matrix() const;

 protected:
  void sync() override;

 private:
  // Q-cotangent to raw-cotangent through the QR factorization.
  Mat qr_backward(const Mat& Qbar) const;

  Index n_;
  Index k_;
  PsdDirection dir_;
  Mat Q_;
  Mat R_;
};

}  // namespace sympcae
