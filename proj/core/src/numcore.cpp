#include "sympcae/numcore.hpp"

#include <cmath>
#include <string>

namespace sympcae {

namespace {

void guard_dense(Index rows, Index cols) {
  if (rows > kMaxDenseDim || cols > kMaxDenseDim) {
    throw ShapeError("dense materialization of " + std::to_string(rows) + "x" +
                     std::to_string(cols) + " exceeds the oracle size limit");
  }
}

void require_odd(Index l, const char* what) {
  if (l <= 0 || l % 2 == 0) throw ShapeError(std::string(what) + ": kernel length must be odd");
}

void require_even_dims(const Mat& A) {
  if (A.rows() % 2 != 0 || A.cols() % 2 != 0) {
    throw ShapeError("symplectic check needs even row and column counts, got " +
                     std::to_string(A.rows()) + "x" + std::to_string(A.cols()));
  }
}

}  // namespace

void require_finite(const Vec& v, const char* what) {
  for (Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      throw NumericError(std::string(what) + ": non-finite entry at index " + std::to_string(i), i);
    }
  }
}

Mat poisson_matrix(Index half_dim) {
  guard_dense(2 * half_dim, 2 * half_dim);
  Mat J = Mat::Zero(2 * half_dim, 2 * half_dim);
  J.topRightCorner(half_dim, half_dim).setIdentity();
  J.bottomLeftCorner(half_dim, half_dim) = -Mat::Identity(half_dim, half_dim);
  return J;
}

SymmetricKernel::SymmetricKernel(Vec half) : half_(std::move(half)) {
  if (half_.size() == 0) throw ShapeError("symmetric kernel needs at least one free weight");
}

SymmetricKernel SymmetricKernel::zeros(Index length) {
  require_odd(length, "SymmetricKernel");
  return SymmetricKernel(Vec::Zero((length + 1) / 2));
}

Vec SymmetricKernel::expand() const {
  const Index m = half_.size();
  Vec w(2 * m - 1);
  for (Index j = 0; j < m; ++j) {
    w[m - 1 + j] = half_[j];
    w[m - 1 - j] = half_[j];
  }
  return w;
}

SymmetricKernel2D::SymmetricKernel2D(Mat quarter) : quarter_(std::move(quarter)) {
  if (quarter_.size() == 0) throw ShapeError("symmetric 2D kernel needs at least one free weight");
}

SymmetricKernel2D SymmetricKernel2D::zeros(Index l1, Index l2) {
  require_odd(l1, "SymmetricKernel2D");
  require_odd(l2, "SymmetricKernel2D");
  return SymmetricKernel2D(Mat::Zero((l1 + 1) / 2, (l2 + 1) / 2));
}

Mat SymmetricKernel2D::expand() const {
  const Index m1 = quarter_.rows();
  const Index m2 = quarter_.cols();
  Mat w(2 * m1 - 1, 2 * m2 - 1);
  for (Index a = 0; a < m1; ++a) {
    for (Index b = 0; b < m2; ++b) {
      const double v = quarter_(a, b);
      w(m1 - 1 + a, m2 - 1 + b) = v;
      w(m1 - 1 - a, m2 - 1 + b) = v;
      w(m1 - 1 + a, m2 - 1 - b) = v;
      w(m1 - 1 - a, m2 - 1 - b) = v;
    }
  }
  return w;
}

Mat toeplitz_1d(const Vec& kernel, Index n) {
  const Index l = kernel.size();
  require_odd(l, "toeplitz_1d");
  if (n <= 0 || l > 2 * n - 1) throw ShapeError("toeplitz_1d: kernel longer than 2n-1");
  guard_dense(n, n);
  const Index h = (l - 1) / 2;
  Mat T = Mat::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index s = -h; s <= h; ++s) {
      const Index j = i + s;
      if (j >= 0 && j < n) T(i, j) = kernel[h + s];
    }
  }
  return T;
}

Mat toeplitz_2d(const Mat& kernel, Index n1, Index n2) {
  require_odd(kernel.rows(), "toeplitz_2d");
  require_odd(kernel.cols(), "toeplitz_2d");
  if (kernel.cols() > 2 * n2 - 1) throw ShapeError("toeplitz_2d: kernel wider than 2*n2-1");
  guard_dense(n1 * n2, n1 * n2);
  const Index h2 = (kernel.cols() - 1) / 2;
  Mat T = Mat::Zero(n1 * n2, n1 * n2);
  for (Index a = 0; a < n2; ++a) {
    for (Index s = -h2; s <= h2; ++s) {
      const Index b = a + s;
      if (b < 0 || b >= n2) continue;
      T.block(a * n1, b * n1, n1, n1) = toeplitz_1d(kernel.col(h2 + s), n1);
    }
  }
  return T;
}

Mat conv_matrix_1d(const std::vector<std::vector<Vec>>& kernels, Index n) {
  if (kernels.empty() || kernels.front().empty()) throw ShapeError("conv_matrix_1d: empty kernel grid");
  const auto c_out = static_cast<Index>(kernels.size());
  const auto c_in = static_cast<Index>(kernels.front().size());
  const Index l = kernels.front().front().size();
  for (const auto& row : kernels) {
    if (static_cast<Index>(row.size()) != c_in) throw ShapeError("conv_matrix_1d: ragged kernel grid");
    for (const auto& k : row) {
      if (k.size() != l) throw ShapeError("conv_matrix_1d: kernels differ in length");
    }
  }
  guard_dense(c_out * n, c_in * n);
  Mat C(c_out * n, c_in * n);
  for (Index i = 0; i < c_out; ++i) {
    for (Index j = 0; j < c_in; ++j) C.block(i * n, j * n, n, n) = toeplitz_1d(kernels[i][j], n);
  }
  return C;
}

Mat conv_matrix_2d(const std::vector<std::vector<Mat>>& kernels, Index n1, Index n2) {
  if (kernels.empty() || kernels.front().empty()) throw ShapeError("conv_matrix_2d: empty kernel grid");
  const auto c_out = static_cast<Index>(kernels.size());
  const auto c_in = static_cast<Index>(kernels.front().size());
  const Index l1 = kernels.front().front().rows();
  const Index l2 = kernels.front().front().cols();
  for (const auto& row : kernels) {
    if (static_cast<Index>(row.size()) != c_in) throw ShapeError("conv_matrix_2d: ragged kernel grid");
    for (const auto& k : row) {
      if (k.rows() != l1 || k.cols() != l2) throw ShapeError("conv_matrix_2d: kernels differ in shape");
    }
  }
  const Index s = n1 * n2;
  guard_dense(c_out * s, c_in * s);
  Mat C(c_out * s, c_in * s);
  for (Index i = 0; i < c_out; ++i) {
    for (Index j = 0; j < c_in; ++j) C.block(i * s, j * s, s, s) = toeplitz_2d(kernels[i][j], n1, n2);
  }
  return C;
}

SymplecticCheck is_symplectic(const Mat& A, double tol) {
  require_even_dims(A);
  if (A.rows() < A.cols()) throw ShapeError("is_symplectic: expected a tall 2n x 2k matrix");
  const Mat R = A.transpose() * poisson_matrix(A.rows() / 2) * A - poisson_matrix(A.cols() / 2);
  SymplecticCheck out;
  out.residual = R.cwiseAbs().maxCoeff();
  out.ok = out.residual <= tol;
  return out;
}

SymplecticCheck is_symplectic_reduction(const Mat& A, double tol) {
  require_even_dims(A);
  if (A.rows() > A.cols()) throw ShapeError("is_symplectic_reduction: expected a wide 2k x 2n matrix");
  const Mat R = A * poisson_matrix(A.cols() / 2) * A.transpose() - poisson_matrix(A.rows() / 2);
  SymplecticCheck out;
  out.residual = R.cwiseAbs().maxCoeff();
  out.ok = out.residual <= tol;
  return out;
}

Mat symplectic_inverse(const Mat& A) {
  require_even_dims(A);
  return poisson_matrix(A.cols() / 2).transpose() * A.transpose() * poisson_matrix(A.rows() / 2);
}

Mat jacobian_fd(const VecMap& f, const Vec& x, double h) {
  if (!(h > 0.0)) throw ShapeError("jacobian_fd: step must be positive");
  Vec xp = x;
  Mat Jac;
  for (Index j = 0; j < x.size(); ++j) {
    xp[j] = x[j] + h;
    const Vec fp = f(xp);
    xp[j] = x[j] - h;
    const Vec fm = f(xp);
    xp[j] = x[j];
    if (j == 0) Jac.resize(fp.size(), x.size());
    if (!fp.allFinite() || !fm.allFinite()) {
      throw NumericError("jacobian_fd: non-finite output while perturbing index " + std::to_string(j), j);
    }
    Jac.col(j) = (fp - fm) / (2.0 * h);
  }
  return Jac;
}

}  // namespace sympcae
