#include <gtest/gtest.h>

#include "sympcae/numcore.hpp"
#include "sympcae/random.hpp"
#include "test_util.hpp"

using namespace sympcae;
using testutil::direct_conv_1d;
using testutil::direct_conv_2d;

TEST(Poisson, StructureAndIdentities) {
  const Mat J = poisson_matrix(3);
  EXPECT_EQ(J, testutil::poisson(3));
  EXPECT_EQ(Mat(J.transpose()), Mat(-J));
  EXPECT_EQ(Mat(J * J), Mat(-Mat::Identity(6, 6)));
}

TEST(Toeplitz1D, IdentityKernel) {
  Vec k(3);
  k << 0, 1, 0;
  EXPECT_EQ(toeplitz_1d(k, 4), Mat(Mat::Identity(4, 4)));
}

TEST(Toeplitz1D, MatchesConvolutionOfBasisVectors) {
  Vec k(3);
  k << 1, 2, 3;
  Mat expected(3, 3);
  expected << 2, 3, 0, 1, 2, 3, 0, 1, 2;
  EXPECT_EQ(toeplitz_1d(k, 3), expected);
  Mat brute(3, 3);
  for (Index j = 0; j < 3; ++j) brute.col(j) = direct_conv_1d(k, Vec::Unit(3, j));
  EXPECT_EQ(brute, expected);
}

TEST(Toeplitz1D, SymmetricKernelGivesSymmetricMatrix) {
  Vec k(3);
  k << 0.7, -1.3, 0.7;
  const Mat T = toeplitz_1d(k, 5);
  EXPECT_EQ(T, Mat(T.transpose()));
  for (Index n = 5; n < 12; ++n) {
    const Vec w = SymmetricKernel(Vec::LinSpaced(3, 0.3, 1.1)).expand();
    const Mat A = toeplitz_1d(w, n);
    EXPECT_EQ(A, Mat(A.transpose()));
  }
}

TEST(Toeplitz1D, RejectsEvenKernel) {
  try {
    toeplitz_1d(Vec::Ones(4), 6);
    FAIL();
  } catch (const ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("kernel length must be odd"), std::string::npos);
  }
}

TEST(Toeplitz2D, ScalarKernelIsScaledIdentity) {
  Mat k(1, 1);
  k << 2.5;
  EXPECT_EQ(toeplitz_2d(k, 3, 4), Mat(2.5 * Mat::Identity(12, 12)));
}

TEST(Toeplitz2D, MatchesBruteForceOnBasisImages) {
  Rng rng(3);
  const Mat k = rng.normal_mat(3, 3);
  const Mat T = toeplitz_2d(k, 3, 3);
  for (Index j = 0; j < 9; ++j) {
    const Vec col = direct_conv_2d(k, Vec::Unit(9, j), 3, 3);
    EXPECT_LT((T.col(j) - col).cwiseAbs().maxCoeff(), 1e-15);
  }
  const Mat k2 = rng.normal_mat(3, 5);
  const Mat T2 = toeplitz_2d(k2, 4, 3);
  const Vec x = rng.normal_vec(12);
  EXPECT_LT((T2 * x - direct_conv_2d(k2, x, 4, 3)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Toeplitz2D, SymmetricKernelGivesSymmetricMatrix) {
  Mat q(2, 3);
  q << 1.0, 0.2, -0.4, 0.5, 0.3, 0.1;
  const Mat T = toeplitz_2d(SymmetricKernel2D(q).expand(), 5, 6);
  EXPECT_EQ(T, Mat(T.transpose()));
}

TEST(Toeplitz2D, RejectsEvenSide) { EXPECT_THROW(toeplitz_2d(Mat::Ones(3, 2), 4, 4), ShapeError); }

TEST(SymmetricKernel, ExpandIsPalindrome) {
  Vec h(3);
  h << 5, 2, 1;
  Vec w(5);
  w << 1, 2, 5, 2, 1;
  EXPECT_EQ(SymmetricKernel(h).expand(), w);
  EXPECT_EQ(SymmetricKernel(h).length(), 5);
  Mat q(2, 2);
  q << 4, 3, 2, 1;
  const Mat e = SymmetricKernel2D(q).expand();
  EXPECT_EQ(e.rows(), 3);
  EXPECT_EQ(e.cols(), 3);
  EXPECT_EQ(e, Mat(e.colwise().reverse()));
  EXPECT_EQ(e, Mat(e.rowwise().reverse()));
  EXPECT_EQ(e(1, 1), 4);
  EXPECT_EQ(e(0, 1), 2);
  EXPECT_EQ(e(1, 0), 3);
  EXPECT_EQ(e(0, 0), 1);
}

TEST(ConvMatrix1D, IdentityKernel) {
  Vec k(3);
  k << 0, 1, 0;
  EXPECT_EQ(conv_matrix_1d({{k}}, 6), Mat(Mat::Identity(6, 6)));
}

TEST(ConvMatrix1D, MatchesDirectMultichannelConvolution) {
  Rng rng(11);
  const Index n = 4;
  std::vector<std::vector<Vec>> K(2, std::vector<Vec>(2));
  for (auto& row : K)
    for (auto& k : row) k = rng.normal_vec(3);
  const Vec x = rng.normal_vec(2 * n);
  Vec y = Vec::Zero(2 * n);
  for (Index i = 0; i < 2; ++i)
    for (Index j = 0; j < 2; ++j) y.segment(i * n, n) += direct_conv_1d(K[i][j], x.segment(j * n, n));
  EXPECT_LT((conv_matrix_1d(K, n) * x - y).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ConvMatrix1D, ShapeAndRaggedGrid) {
  Vec k(3);
  k << 1, 2, 1;
  const Mat M = conv_matrix_1d({{k}, {k}}, 5);
  EXPECT_EQ(M.rows(), 10);
  EXPECT_EQ(M.cols(), 5);
  EXPECT_THROW(conv_matrix_1d({{k, k}, {k}}, 5), ShapeError);
  EXPECT_THROW(conv_matrix_1d({{k, Vec::Ones(5)}}, 5), ShapeError);
}

TEST(ConvMatrix, LargeRandomInstancesMatchDirectConvolution) {
  Rng rng(12);
  for (Index n : {16, 33, 64}) {
    for (Index l : {1, 5, 9}) {
      std::vector<std::vector<Vec>> K(3, std::vector<Vec>(4));
      for (auto& row : K)
        for (auto& k : row) k = rng.normal_vec(l);
      const Vec x = rng.normal_vec(4 * n);
      Vec y = Vec::Zero(3 * n);
      for (Index i = 0; i < 3; ++i)
        for (Index j = 0; j < 4; ++j) y.segment(i * n, n) += direct_conv_1d(K[i][j], x.segment(j * n, n));
      EXPECT_LE((conv_matrix_1d(K, n) * x - y).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
  std::vector<std::vector<Mat>> K2(2, std::vector<Mat>(2));
  for (auto& row : K2)
    for (auto& k : row) k = rng.normal_mat(3, 3);
  const Vec x = rng.normal_vec(2 * 36);
  Vec y = Vec::Zero(2 * 36);
  for (Index i = 0; i < 2; ++i)
    for (Index j = 0; j < 2; ++j) y.segment(i * 36, 36) += direct_conv_2d(K2[i][j], x.segment(j * 36, 36), 6, 6);
  EXPECT_LE((conv_matrix_2d(K2, 6, 6) * x - y).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(IsSymplectic, Examples) {
  EXPECT_EQ(is_symplectic(Mat::Identity(6, 6), 1e-14).residual, 0.0);
  EXPECT_EQ(is_symplectic(poisson_matrix(3), 1e-14).residual, 0.0);
  Rng rng(5);
  Eigen::HouseholderQR<Mat> qr(rng.normal_mat(7, 3));
  const Mat phi = qr.householderQ() * Mat::Identity(7, 3);
  Mat A = Mat::Zero(14, 6);
  A.topLeftCorner(7, 3) = phi;
  A.bottomRightCorner(7, 3) = phi;
  const auto r = is_symplectic(A, 1e-12);
  EXPECT_TRUE(r.ok);
  EXPECT_LT(r.residual, 1e-12);
  EXPECT_FALSE(is_symplectic(2.0 * Mat::Identity(4, 4), 1e-12).ok);
}

TEST(IsSymplectic, RejectsOddShapes) {
  EXPECT_THROW(is_symplectic(Mat::Identity(3, 3), 1e-12), ShapeError);
  EXPECT_THROW(is_symplectic(Mat::Zero(4, 3), 1e-12), ShapeError);
  EXPECT_THROW(symplectic_inverse(Mat::Zero(5, 2)), ShapeError);
}

TEST(SymplecticInverse, Examples) {
  EXPECT_EQ(symplectic_inverse(Mat::Identity(4, 4)), Mat(Mat::Identity(4, 4)));
  // A square symplectic matrix built from two shears.
  Rng rng(9);
  Mat S = rng.normal_mat(3, 3);
  S = (S + S.transpose()).eval();
  Mat U = Mat::Identity(6, 6), L = Mat::Identity(6, 6);
  U.topRightCorner(3, 3) = S;
  L.bottomLeftCorner(3, 3) = S * 0.5;
  const Mat A = U * L;
  EXPECT_LT((symplectic_inverse(A) * A - Mat::Identity(6, 6)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_TRUE(is_symplectic(Mat(symplectic_inverse(A).transpose()), 1e-10).ok);

  Eigen::HouseholderQR<Mat> qr(rng.normal_mat(5, 2));
  const Mat phi = qr.householderQ() * Mat::Identity(5, 2);
  Mat B = Mat::Zero(10, 4), Bt = Mat::Zero(4, 10);
  B.topLeftCorner(5, 2) = phi;
  B.bottomRightCorner(5, 2) = phi;
  Bt.topLeftCorner(2, 5) = phi.transpose();
  Bt.bottomRightCorner(2, 5) = phi.transpose();
  EXPECT_LT((symplectic_inverse(B) - Bt).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(JacobianFd, LinearAndIdentityMaps) {
  Rng rng(1);
  const Vec x = rng.normal_vec(4);
  EXPECT_LT((jacobian_fd([](const Vec& v) { return v; }, x, 1e-5) - Mat::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-9);
  const Mat A = rng.normal_mat(3, 4);
  EXPECT_LT((jacobian_fd([&](const Vec& v) { return Vec(A * v); }, x, 1e-5) - A).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(JacobianFd, NonFiniteOutputCarriesIndex) {
  const Vec x = Vec::Zero(3);
  try {
    jacobian_fd(
        [](const Vec& v) {
          Vec y = v;
          if (v[2] != 0.0) y[0] = std::log(-1.0);
          return y;
        },
        x, 1e-5);
    FAIL();
  } catch (const NumericError& e) {
    EXPECT_EQ(e.index(), 2);
  }
}

TEST(DenseGuard, RefusesHugeMaterialization) { EXPECT_THROW(toeplitz_1d(Vec::Ones(3), kMaxDenseDim + 1), ShapeError); }
