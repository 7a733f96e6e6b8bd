#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "sympcae/numcore.hpp"
#include "sympcae/random.hpp"

namespace testutil {

using sympcae::Index;
using sympcae::Mat;
using sympcae::Vec;

// Zero-padded stride-1 cross-correlation written out directly:
// y[i] = sum_t w[h + t] x[i + t].
inline Vec direct_conv_1d(const Vec& w, const Vec& x) {
  const Index n = x.size();
  const Index h = (w.size() - 1) / 2;
  Vec y = Vec::Zero(n);
  for (Index i = 0; i < n; ++i)
    for (Index t = -h; t <= h; ++t)
      if (i + t >= 0 && i + t < n) y[i] += w[h + t] * x[i + t];
  return y;
}

// Same on an n1 x n2 grid flattened with the first axis fastest; w is l1 x l2.
inline Vec direct_conv_2d(const Mat& w, const Vec& x, Index n1, Index n2) {
  const Index h1 = (w.rows() - 1) / 2;
  const Index h2 = (w.cols() - 1) / 2;
  Vec y = Vec::Zero(n1 * n2);
  for (Index i2 = 0; i2 < n2; ++i2)
    for (Index i1 = 0; i1 < n1; ++i1)
      for (Index t2 = -h2; t2 <= h2; ++t2)
        for (Index t1 = -h1; t1 <= h1; ++t1) {
          const Index j1 = i1 + t1, j2 = i2 + t2;
          if (j1 < 0 || j1 >= n1 || j2 < 0 || j2 >= n2) continue;
          y[i1 + n1 * i2] += w(h1 + t1, h2 + t2) * x[j1 + n1 * j2];
        }
  return y;
}

inline Mat poisson(Index n) {
  Mat J = Mat::Zero(2 * n, 2 * n);
  J.topRightCorner(n, n).setIdentity();
  J.bottomLeftCorner(n, n) = -Mat::Identity(n, n);
  return J;
}

// max |A^T J A - J| for tall A, max |A J A^T - J| for wide A.
inline double symplectic_residual(const Mat& A) {
  if (A.rows() >= A.cols())
    return (A.transpose() * poisson(A.rows() / 2) * A - poisson(A.cols() / 2)).cwiseAbs().maxCoeff();
  return (A * poisson(A.cols() / 2) * A.transpose() - poisson(A.rows() / 2)).cwiseAbs().maxCoeff();
}

inline Mat fd_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& x, double h = 1e-6) {
  const Index m = f(x).size();
  Mat J(m, x.size());
  for (Index j = 0; j < x.size(); ++j) {
    Vec a = x, b = x;
    a[j] += h;
    b[j] -= h;
    J.col(j) = (f(a) - f(b)) / (2 * h);
  }
  return J;
}

inline Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x, double h = 1e-6) {
  Vec g(x.size());
  for (Index j = 0; j < x.size(); ++j) {
    Vec a = x, b = x;
    a[j] += h;
    b[j] -= h;
    g[j] = (f(a) - f(b)) / (2 * h);
  }
  return g;
}

inline double rel_err(const Vec& a, const Vec& b) { return (a - b).norm() / std::max(1e-300, b.norm()); }

// Palindromic kernel of odd length l.
inline Vec symmetric_kernel(sympcae::Rng& rng, Index l) {
  Vec w(l);
  for (Index i = 0; i <= l / 2; ++i) w[i] = w[l - 1 - i] = rng.uniform(-1, 1);
  return w;
}

}  // namespace testutil
