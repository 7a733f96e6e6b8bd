#pragma once

#include "sympcae/module.hpp"

namespace sympcae {

// Spatial layout shared by every channel. 1D signals use n2 = l2 = 1.
// 2D grids are flattened with the first axis fastest.
struct ConvGeometry {
  int spatial_dims = 1;
  Index n1 = 0;
  Index n2 = 1;
  Index l1 = 1;
  Index l2 = 1;

  Index channel_len() const { return n1 * n2; }
  // Free weights of one doubly symmetric kernel.
  Index free_per_kernel() const { return ((l1 + 1) / 2) * ((l2 + 1) / 2); }
  void validate() const;
};

// Symplectic convolutional block between a narrow side with 2b channels and
// a wide side with 2bd channels. The narrow-to-wide map copies each channel
// d times scaled by c = sqrt(1/d) and adds, on one phase half, the
// block-symmetric Toeplitz convolution built from kernels K[g][o]
// (g < d, o < b), where block (i, j) of group g uses K[g][|i - j|].
// Wide channel (g, i) sits at position g*b + i inside its half.
class ConvBlock : public Module {
 public:
  Index in_dim() const override;
  Index out_dim() const override;

  Vec forward(const Vec& x) const override;
  Vec jvp(const Vec& x, const Vec& dx, const Vec& dtheta) const override;
  Vec vjp(const Vec& x, const Vec& ybar, Vec* theta_bar) const override;

  ModuleSpec spec() const override;
  std::vector<TensorSlot> tensors() const override;

  const ConvGeometry& geometry() const { return geom_; }
  Index c_in() const { return c_in_; }
  Index c_out() const { return c_out_; }
  Orientation orientation() const { return orientation_; }
  Index groups() const { return d_; }
  Index half_channels() const { return b_; }
  double copy_scale() const { return c_; }

  // Expanded kernel K[g][o]: length l1 (1D) or l1 x l2 (2D).
  Vec kernel_1d(Index g, Index o) const;
  Mat kernel_2d(Index g, Index o) const;
  Index kernel_offset(Index g, Index o) const { return (g * b_ + o) * geom_.free_per_kernel(); }

  Mat dense_matrix() const;

 protected:
  ConvBlock(const ConvGeometry& g, Index c_in, Index c_out, Orientation o, bool lift);
  void sync() override;

 private:
  void apply(const std::vector<Vec>& full, const Vec& x, bool with_copy, Vec& y) const;
  std::vector<Vec> expand_all(const Vec& theta) const;

  ConvGeometry geom_;
  Index c_in_;
  Index c_out_;
  Orientation orientation_;
  bool lift_;
  Index b_;
  Index d_;
  double c_;
  std::vector<Vec> full_;  // expanded kernels, index g*b + o, column-major for 2D
};

class ConvLift final : public ConvBlock {
 public:
  ConvLift(const ConvGeometry& g, Index c_in, Index c_out, Orientation o);
  ModuleKind kind() const override { return ModuleKind::ConvLift; }
  std::unique_ptr<Module> clone() const override { return std::make_unique<ConvLift>(*this); }
};

class ConvProj final : public ConvBlock {
 public:
  ConvProj(const ConvGeometry& g, Index c_in, Index c_out, Orientation o);
  ModuleKind kind() const override { return ModuleKind::ConvProj; }
  std::unique_ptr<Module> clone() const override { return std::make_unique<ConvProj>(*this); }
};

// y += w * x as a zero-padded cross-correlation on the geometry's grid.
void correlate_add(const ConvGeometry& g, const double* w, const double* x, double* y);
// Accumulates into the expanded-kernel gradient gw the derivative of
// <ybar, w * x> with respect to w.
void correlate_grad(const ConvGeometry& g, const double* ybar, const double* x, double* gw);

}  // namespace sympcae
