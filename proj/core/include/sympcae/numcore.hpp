#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "sympcae/error.hpp"

namespace sympcae {

using Index = Eigen::Index;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Dense materializations are test oracles; anything larger is refused.
inline constexpr Index kMaxDenseDim = 20000;

void require_finite(const Vec& v, const char* what);

// Canonical Poisson matrix J_{2n} = [[0, I_n], [-I_n, 0]].
Mat poisson_matrix(Index half_dim);

// Palindromic odd-length kernel stored by its free half, centre first:
// half[j] is the weight at offset +-j from the centre tap.
class SymmetricKernel {
 public:
  SymmetricKernel() = default;
  explicit SymmetricKernel(Vec half);
  static SymmetricKernel zeros(Index length);

  Index length() const { return 2 * half_.size() - 1; }
  Index free_count() const { return half_.size(); }
  const Vec& half() const { return half_; }

  Vec expand() const;

 private:
  Vec half_;
};

// 2D kernel symmetric under reflection of either axis. quarter(a, b) is the
// weight at offsets (+-a, +-b) from the centre tap.
class SymmetricKernel2D {
 public:
  SymmetricKernel2D() = default;
  explicit SymmetricKernel2D(Mat quarter);
  static SymmetricKernel2D zeros(Index l1, Index l2);

  Index rows() const { return 2 * quarter_.rows() - 1; }
  Index cols() const { return 2 * quarter_.cols() - 1; }
  const Mat& quarter() const { return quarter_; }

  Mat expand() const;

 private:
  Mat quarter_;
};

// Banded Toeplitz matrix of a zero-padded stride-1 convolution:
// T(i, j) = kernel[(l-1)/2 + j - i].
Mat toeplitz_1d(const Vec& kernel, Index n);

// Block-Toeplitz matrix of a 2D zero-padded convolution on an n1 x n2 grid
// flattened with the first axis fastest. kernel is l1 x l2, rows run along
// the first axis.
Mat toeplitz_2d(const Mat& kernel, Index n1, Index n2);

// Multichannel convolution matrix [T_ij], kernels[i][j] maps input channel j
// to output channel i. Channel-major vectorization.
Mat conv_matrix_1d(const std::vector<std::vector<Vec>>& kernels, Index n);
Mat conv_matrix_2d(const std::vector<std::vector<Mat>>& kernels, Index n1, Index n2);

struct SymplecticCheck {
  double residual = 0.0;
  bool ok = false;
};

// A is 2n x 2k with n >= k; residual is max |A^T J_2n A - J_2k|.
SymplecticCheck is_symplectic(const Mat& A, double tol);

// A is 2k x 2n with k <= n; checks A J_2n A^T = J_2k, i.e. A is the
// symplectic inverse of some symplectic lifting.
SymplecticCheck is_symplectic_reduction(const Mat& A, double tol);

// A+ = J_2k^T A^T J_2n for A of shape 2n x 2k.
Mat symplectic_inverse(const Mat& A);

using VecMap = std::function<Vec(const Vec&)>;

// Central-difference Jacobian. Throws NumericError carrying the offending
// column index when f produces a non-finite value.
Mat jacobian_fd(const VecMap& f, const Vec& x, double h);

}  // namespace sympcae
