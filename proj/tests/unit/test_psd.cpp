#include <gtest/gtest.h>

#include "sympcae/psd.hpp"
#include "test_util.hpp"

using namespace sympcae;

TEST(PsdFit, SingleModeIsRecovered) {
  Rng rng(1);
  const Vec mode = rng.normal_vec(10);
  Mat X = Mat::Zero(20, 6);
  for (Index j = 0; j < 6; ++j) X.col(j).head(10) = (j + 1.0) * mode;
  const PsdBasis b = psd_fit(X, 1);
  const Vec u = mode.normalized();
  EXPECT_NEAR(std::abs(b.phi.col(0).dot(u)), 1.0, 1e-12);
  Index big;
  b.phi.col(0).cwiseAbs().maxCoeff(&big);
  EXPECT_GT(b.phi(big, 0), 0.0);
}

TEST(PsdFit, ProjectionErrorIsSvdTail) {
  Rng rng(2);
  const Mat X = rng.normal_mat(16, 5);
  const PsdBasis b = psd_fit(X, 3);
  Mat QP(8, 10);
  QP << X.topRows(8), X.bottomRows(8);
  // Independent oracle: eigenvalues of the Gram matrix are squared singular values.
  Eigen::SelfAdjointEigenSolver<Mat> es(QP * QP.transpose());
  const Vec ev = es.eigenvalues();  // ascending
  const double tail = ev.head(5).sum();
  EXPECT_NEAR((X - b.decode_all(b.encode_all(X))).squaredNorm(), tail, 1e-10 * X.squaredNorm());
  EXPECT_LT((b.phi.transpose() * b.phi - Mat::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(PsdFit, CompleteBasisAndPadding) {
  Rng rng(3);
  const Mat X = rng.normal_mat(12, 2);
  PsdFitReport rep;
  const PsdBasis b = psd_fit(X, 6, &rep);
  EXPECT_TRUE(rep.padded);
  EXPECT_EQ(rep.numerical_rank, 4);
  EXPECT_LT((b.decode_all(b.encode_all(X)) - X).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((b.phi.transpose() * b.phi - Mat::Identity(6, 6)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_THROW(psd_fit(X, 7), ShapeError);
}

TEST(PsdBasis, EncodeDecodeAlgebra) {
  Rng rng(4);
  const Mat X = rng.normal_mat(14, 9);
  const PsdBasis b = psd_fit(X, 3);
  const Vec xi = rng.normal_vec(6);
  EXPECT_LT((b.encode(b.decode(xi)) - xi).cwiseAbs().maxCoeff(), 1e-12);
  const Vec inspan = b.decode(xi);
  EXPECT_LT((b.decode(b.encode(inspan)) - inspan).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT(testutil::symplectic_residual(b.matrix()), 1e-12);
  EXPECT_THROW(b.encode(Vec::Zero(13)), ShapeError);
  EXPECT_THROW(b.decode(Vec::Zero(5)), ShapeError);
}

TEST(PsdFit, ErrorIsMonotoneInK) {
  Rng rng(5);
  const Mat X = rng.normal_mat(20, 8);
  double prev = 2.0;
  for (Index k = 1; k <= 10; ++k) {
    const PsdBasis b = psd_fit(X, k);
    const double e = relative_frobenius_error(X, b.decode_all(b.encode_all(X)));
    EXPECT_LE(e, prev);
    prev = e;
  }
}

TEST(RelativeErrors, Definitions) {
  Rng rng(6);
  const Mat X = rng.normal_mat(6, 4);
  EXPECT_EQ(relative_frobenius_error(X, X), 0.0);
  EXPECT_DOUBLE_EQ(relative_frobenius_error(X, Mat::Zero(6, 4)), 1.0);
  const Vec c = relative_column_errors(X, Mat::Zero(6, 4));
  for (Index j = 0; j < 4; ++j) EXPECT_DOUBLE_EQ(c[j], 1.0);
}
