#include "sympcae/conv.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sympcae {

void ConvGeometry::validate() const {
  if (spatial_dims != 1 && spatial_dims != 2) throw ShapeError("conv: spatial_dims must be 1 or 2");
  if (n1 < 1 || n2 < 1) throw ShapeError("conv: grid sizes must be positive");
  if (l1 < 1 || l1 % 2 == 0 || l2 < 1 || l2 % 2 == 0) throw ShapeError("conv: kernel length must be odd");
  if (spatial_dims == 1 && (n2 != 1 || l2 != 1)) throw ShapeError("conv: 1D geometry needs n2 = l2 = 1");
  if (l1 > 2 * n1 - 1 || l2 > 2 * n2 - 1) throw ShapeError("conv: kernel longer than 2n-1");
}

void correlate_add(const ConvGeometry& g, const double* w, const double* x, double* y) {
  const Index h1 = (g.l1 - 1) / 2;
  const Index h2 = (g.l2 - 1) / 2;
  const Index n1 = g.n1;
  const Index n2 = g.n2;
  for (Index s2 = -h2; s2 <= h2; ++s2) {
    const Index a2 = std::max<Index>(0, -s2);
    const Index b2 = std::min(n2, n2 - s2);
    for (Index s1 = -h1; s1 <= h1; ++s1) {
      const double wv = w[(h1 + s1) + g.l1 * (h2 + s2)];
      if (wv == 0.0) continue;
      const Index a1 = std::max<Index>(0, -s1);
      const Index b1 = std::min(n1, n1 - s1);
      for (Index i2 = a2; i2 < b2; ++i2) {
        double* yr = y + n1 * i2;
        const double* xr = x + n1 * (i2 + s2) + s1;
        for (Index i1 = a1; i1 < b1; ++i1) yr[i1] += wv * xr[i1];
      }
    }
  }
}

void correlate_grad(const ConvGeometry& g, const double* ybar, const double* x, double* gw) {
  using CMap = Eigen::Map<const Vec>;
  const Index h1 = (g.l1 - 1) / 2;
  const Index h2 = (g.l2 - 1) / 2;
  const Index n1 = g.n1;
  const Index n2 = g.n2;
  for (Index s2 = -h2; s2 <= h2; ++s2) {
    const Index a2 = std::max<Index>(0, -s2);
    const Index b2 = std::min(n2, n2 - s2);
    for (Index s1 = -h1; s1 <= h1; ++s1) {
      const Index a1 = std::max<Index>(0, -s1);
      const Index len = std::min(n1, n1 - s1) - a1;
      double acc = 0.0;
      for (Index i2 = a2; i2 < b2; ++i2) {
        acc += CMap(ybar + n1 * i2 + a1, len).dot(CMap(x + n1 * (i2 + s2) + s1 + a1, len));
      }
      gw[(h1 + s1) + g.l1 * (h2 + s2)] += acc;
    }
  }
}

namespace {

Vec expand_kernel(const ConvGeometry& g, const double* free) {
  const Index m1 = (g.l1 + 1) / 2;
  const Index h1 = m1 - 1;
  const Index h2 = (g.l2 - 1) / 2;
  Vec w(g.l1 * g.l2);
  for (Index s2 = -h2; s2 <= h2; ++s2) {
    for (Index s1 = -h1; s1 <= h1; ++s1) {
      w[(h1 + s1) + g.l1 * (h2 + s2)] = free[std::abs(s1) + m1 * std::abs(s2)];
    }
  }
  return w;
}

// Adjoint of expand_kernel: every tap adds into its free weight.
void fold_kernel_grad(const ConvGeometry& g, const Vec& gw, double* free) {
  const Index m1 = (g.l1 + 1) / 2;
  const Index h1 = m1 - 1;
  const Index h2 = (g.l2 - 1) / 2;
  for (Index s2 = -h2; s2 <= h2; ++s2) {
    for (Index s1 = -h1; s1 <= h1; ++s1) {
      free[std::abs(s1) + m1 * std::abs(s2)] += gw[(h1 + s1) + g.l1 * (h2 + s2)];
    }
  }
}

}  // namespace

ConvBlock::ConvBlock(const ConvGeometry& g, Index c_in, Index c_out, Orientation o, bool lift)
    : geom_(g), c_in_(c_in), c_out_(c_out), orientation_(o), lift_(lift) {
  geom_.validate();
  const Index narrow = lift ? c_in : c_out;
  const Index wide = lift ? c_out : c_in;
  const char* name = lift ? "conv lift" : "conv projection";
  if (narrow < 2 || narrow % 2 != 0) {
    throw ShapeError(std::string(name) + ": " + (lift ? "c_in" : "c_out") + " must be even and positive, got " +
                     std::to_string(narrow));
  }
  if (wide % narrow != 0) {
    throw ShapeError(std::string(name) + ": " + std::to_string(narrow) + " does not divide " +
                     std::to_string(wide));
  }
  b_ = narrow / 2;
  d_ = wide / narrow;
  c_ = std::sqrt(1.0 / static_cast<double>(d_));
  params_ = Vec::Zero(d_ * b_ * geom_.free_per_kernel());
  sync();
}

Index ConvBlock::in_dim() const { return c_in_ * geom_.channel_len(); }
Index ConvBlock::out_dim() const { return c_out_ * geom_.channel_len(); }

std::vector<Vec> ConvBlock::expand_all(const Vec& theta) const {
  std::vector<Vec> full;
  full.reserve(static_cast<std::size_t>(d_ * b_));
  for (Index k = 0; k < d_ * b_; ++k) full.push_back(expand_kernel(geom_, theta.data() + k * geom_.free_per_kernel()));
  return full;
}

void ConvBlock::sync() { full_ = expand_all(params_); }

// y = (c-copy part if requested) + (convolution part) applied to x.
void ConvBlock::apply(const std::vector<Vec>& full, const Vec& x, bool with_copy, Vec& y) const {
  const Index L = geom_.channel_len();
  const Index nh = b_ * L;       // narrow half length
  const Index wh = b_ * d_ * L;  // wide half length
  const Index in_half = lift_ ? nh : wh;
  const Index out_half = lift_ ? wh : nh;
  y.setZero(2 * out_half);
  if (with_copy) {
    for (int half = 0; half < 2; ++half) {
      const double* xs = x.data() + half * in_half;
      double* ys = y.data() + half * out_half;
      for (Index g = 0; g < d_; ++g) {
        for (Index t = 0; t < nh; ++t) {
          if (lift_) {
            ys[g * nh + t] = c_ * xs[t];
          } else {
            ys[t] += c_ * xs[g * nh + t];
          }
        }
      }
    }
  }
  const bool up = orientation_ == Orientation::Up;
  const double* src = x.data() + (up ? in_half : 0);
  double* dst = y.data() + (up ? 0 : out_half);
  for (Index g = 0; g < d_; ++g) {
    for (Index i = 0; i < b_; ++i) {
      for (Index j = 0; j < b_; ++j) {
        const double* w = full[static_cast<std::size_t>(g * b_ + std::abs(i - j))].data();
        if (lift_) {
          correlate_add(geom_, w, src + j * L, dst + (g * b_ + i) * L);
        } else {
          correlate_add(geom_, w, src + (g * b_ + j) * L, dst + i * L);
        }
      }
    }
  }
}

Vec ConvBlock::forward(const Vec& x) const {
  check_input(x);
  Vec y;
  apply(full_, x, true, y);
  return y;
}

Vec ConvBlock::jvp(const Vec& x, const Vec& dx, const Vec& dtheta) const {
  check_input(x);
  check_input(dx);
  Vec dy;
  apply(full_, dx, true, dy);
  if (dtheta.size() > 0) {
    if (dtheta.size() != params_.size()) throw ShapeError("conv: parameter tangent size");
    Vec extra;
    apply(expand_all(dtheta), x, false, extra);
    dy += extra;
  }
  return dy;
}

Vec ConvBlock::vjp(const Vec& x, const Vec& ybar, Vec* theta_bar) const {
  check_input(x);
  check_output_cotangent(ybar);
  const Index L = geom_.channel_len();
  const Index nh = b_ * L;
  const Index wh = b_ * d_ * L;
  const Index in_half = lift_ ? nh : wh;
  const Index out_half = lift_ ? wh : nh;
  Vec xbar = Vec::Zero(2 * in_half);
  // Transpose of the copy part.
  for (int half = 0; half < 2; ++half) {
    const double* ys = ybar.data() + half * out_half;
    double* xs = xbar.data() + half * in_half;
    for (Index g = 0; g < d_; ++g) {
      for (Index t = 0; t < nh; ++t) {
        if (lift_) {
          xs[t] += c_ * ys[g * nh + t];
        } else {
          xs[g * nh + t] = c_ * ys[t];
        }
      }
    }
  }
  // Transpose of the convolution part; symmetric kernels make each
  // correlation self-adjoint, so only the channel roles swap.
  const bool up = orientation_ == Orientation::Up;
  const Index src_off = up ? in_half : 0;
  const Index dst_off = up ? 0 : out_half;
  const double* dst_bar = ybar.data() + dst_off;
  double* src_bar = xbar.data() + src_off;
  const double* src = x.data() + src_off;
  std::vector<Vec> gfull;
  if (theta_bar) gfull.assign(static_cast<std::size_t>(d_ * b_), Vec::Zero(geom_.l1 * geom_.l2));
  for (Index g = 0; g < d_; ++g) {
    for (Index i = 0; i < b_; ++i) {
      for (Index j = 0; j < b_; ++j) {
        const std::size_t k = static_cast<std::size_t>(g * b_ + std::abs(i - j));
        const double* w = full_[k].data();
        if (lift_) {
          correlate_add(geom_, w, dst_bar + (g * b_ + i) * L, src_bar + j * L);
          if (theta_bar) correlate_grad(geom_, dst_bar + (g * b_ + i) * L, src + j * L, gfull[k].data());
        } else {
          correlate_add(geom_, w, dst_bar + i * L, src_bar + (g * b_ + j) * L);
          if (theta_bar) correlate_grad(geom_, dst_bar + i * L, src + (g * b_ + j) * L, gfull[k].data());
        }
      }
    }
  }
  if (theta_bar) {
    for (Index k = 0; k < d_ * b_; ++k) {
      fold_kernel_grad(geom_, gfull[static_cast<std::size_t>(k)], theta_bar->data() + k * geom_.free_per_kernel());
    }
  }
  return xbar;
}

Vec ConvBlock::kernel_1d(Index g, Index o) const {
  if (geom_.spatial_dims != 1) throw ShapeError("conv: kernel_1d on a 2D block");
  return full_.at(static_cast<std::size_t>(g * b_ + o));
}

Mat ConvBlock::kernel_2d(Index g, Index o) const {
  const Vec& w = full_.at(static_cast<std::size_t>(g * b_ + o));
  return Eigen::Map<const Mat>(w.data(), geom_.l1, geom_.l2);
}

Mat ConvBlock::dense_matrix() const {
  const Index L = geom_.channel_len();
  const Index nh = b_ * L;
  const Index wh = b_ * d_ * L;
  // Narrow-to-wide pieces: E copies, T convolves.
  Mat E = Mat::Zero(wh, nh);
  Mat T = Mat::Zero(wh, nh);
  for (Index g = 0; g < d_; ++g) {
    for (Index i = 0; i < b_; ++i) {
      E.block((g * b_ + i) * L, i * L, L, L) = c_ * Mat::Identity(L, L);
      for (Index j = 0; j < b_; ++j) {
        const Index k = std::abs(i - j);
        Mat block = geom_.spatial_dims == 1 ? toeplitz_1d(kernel_1d(g, k), geom_.n1)
                                            : toeplitz_2d(kernel_2d(g, k), geom_.n1, geom_.n2);
        T.block((g * b_ + i) * L, j * L, L, L) = block;
      }
    }
  }
  const bool up = orientation_ == Orientation::Up;
  if (lift_) {
    Mat A = Mat::Zero(2 * wh, 2 * nh);
    A.topLeftCorner(wh, nh) = E;
    A.bottomRightCorner(wh, nh) = E;
    if (up) {
      A.topRightCorner(wh, nh) = T;
    } else {
      A.bottomLeftCorner(wh, nh) = T;
    }
    return A;
  }
  Mat A = Mat::Zero(2 * nh, 2 * wh);
  A.topLeftCorner(nh, wh) = E.transpose();
  A.bottomRightCorner(nh, wh) = E.transpose();
  if (up) {
    A.topRightCorner(nh, wh) = T.transpose();
  } else {
    A.bottomLeftCorner(nh, wh) = T.transpose();
  }
  return A;
}

ModuleSpec ConvBlock::spec() const {
  ModuleSpec s;
  s.kind = kind();
  s.attrs = {{"spatial_dims", std::to_string(geom_.spatial_dims)},
             {"n1", std::to_string(geom_.n1)},
             {"n2", std::to_string(geom_.n2)},
             {"l1", std::to_string(geom_.l1)},
             {"l2", std::to_string(geom_.l2)},
             {"c_in", std::to_string(c_in_)},
             {"c_out", std::to_string(c_out_)},
             {"orientation", to_string(orientation_)}};
  return s;
}

std::vector<TensorSlot> ConvBlock::tensors() const {
  std::vector<TensorSlot> out;
  const Index f = geom_.free_per_kernel();
  std::vector<Index> shape = {(geom_.l1 + 1) / 2};
  if (geom_.spatial_dims == 2) shape.push_back((geom_.l2 + 1) / 2);
  for (Index g = 0; g < d_; ++g) {
    for (Index o = 0; o < b_; ++o) {
      out.push_back({"K" + std::to_string(g) + "_" + std::to_string(o), shape, kernel_offset(g, o), f});
    }
  }
  return out;
}

ConvLift::ConvLift(const ConvGeometry& g, Index c_in, Index c_out, Orientation o)
    : ConvBlock(g, c_in, c_out, o, true) {}

ConvProj::ConvProj(const ConvGeometry& g, Index c_in, Index c_out, Orientation o)
    : ConvBlock(g, c_in, c_out, o, false) {}

}  // namespace sympcae
