#include "sympcae/psd.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/QR>
#include <Eigen/SVD>

namespace sympcae {

namespace {

void check_even(Index rows, const char* what) {
  if (rows % 2 != 0) throw ShapeError(std::string(what) + ": state dimension must be even");
}

void fix_signs(Mat& U) {
  for (Index j = 0; j < U.cols(); ++j) {
    Index arg = 0;
    U.col(j).cwiseAbs().maxCoeff(&arg);
    if (U(arg, j) < 0.0) U.col(j) *= -1.0;
  }
}

}  // namespace

Vec PsdBasis::encode(const Vec& x) const {
  if (x.size() != 2 * n()) throw ShapeError("psd encode: state has the wrong size");
  Vec z(2 * k());
  z.head(k()).noalias() = phi.transpose() * x.head(n());
  z.tail(k()).noalias() = phi.transpose() * x.tail(n());
  return z;
}

Vec PsdBasis::decode(const Vec& z) const {
  if (z.size() != 2 * k()) throw ShapeError("psd decode: latent state has the wrong size");
  Vec x(2 * n());
  x.head(n()).noalias() = phi * z.head(k());
  x.tail(n()).noalias() = phi * z.tail(k());
  return x;
}

Mat PsdBasis::encode_all(const Mat& X) const {
  if (X.rows() != 2 * n()) throw ShapeError("psd encode: snapshots have the wrong size");
  Mat Z(2 * k(), X.cols());
  Z.topRows(k()).noalias() = phi.transpose() * X.topRows(n());
  Z.bottomRows(k()).noalias() = phi.transpose() * X.bottomRows(n());
  return Z;
}

Mat PsdBasis::decode_all(const Mat& Z) const {
  if (Z.rows() != 2 * k()) throw ShapeError("psd decode: latent states have the wrong size");
  Mat X(2 * n(), Z.cols());
  X.topRows(n()).noalias() = phi * Z.topRows(k());
  X.bottomRows(n()).noalias() = phi * Z.bottomRows(k());
  return X;
}

Mat PsdBasis::matrix() const {
  Mat A = Mat::Zero(2 * n(), 2 * k());
  A.topLeftCorner(n(), k()) = phi;
  A.bottomRightCorner(n(), k()) = phi;
  return A;
}

PsdBasis psd_fit(const Mat& X, Index k, PsdFitReport* report) {
  check_even(X.rows(), "psd_fit");
  const Index n = X.rows() / 2;
  if (k < 1 || k > n) throw ShapeError("psd_fit: k must lie in [1, " + std::to_string(n) + "]");
  if (X.cols() < 1) throw ShapeError("psd_fit: no snapshots");
  Mat S(n, 2 * X.cols());
  S << X.topRows(n), X.bottomRows(n);
  Eigen::BDCSVD<Mat> svd(S, Eigen::ComputeThinU);
  const Vec& sv = svd.singularValues();
  const double cutoff = sv.size() > 0 ? sv[0] * static_cast<double>(std::max(S.rows(), S.cols())) *
                                            std::numeric_limits<double>::epsilon()
                                      : 0.0;
  Index rank = 0;
  for (Index i = 0; i < sv.size(); ++i) {
    if (sv[i] > cutoff) ++rank;
  }
  PsdBasis basis;
  bool padded = false;
  if (k <= rank) {
    basis.phi = svd.matrixU().leftCols(k);
  } else {
    // Keep the numerically meaningful directions and complete them with an
    // orthonormal complement drawn from the coordinate axes.
    padded = true;
    Mat seed(n, rank + n);
    seed << svd.matrixU().leftCols(rank), Mat::Identity(n, n);
    Eigen::ColPivHouseholderQR<Mat> qr(seed.rightCols(n) - seed.leftCols(rank) *
                                                               (seed.leftCols(rank).transpose() * seed.rightCols(n)));
    const Mat comp = qr.householderQ() * Mat::Identity(n, k - rank);
    basis.phi.resize(n, k);
    basis.phi << svd.matrixU().leftCols(rank), comp;
  }
  fix_signs(basis.phi);
  if (report) {
    report->singular_values = sv;
    report->numerical_rank = rank;
    report->padded = padded;
  }
  return basis;
}

double relative_frobenius_error(const Mat& X, const Mat& Y) {
  if (X.rows() != Y.rows() || X.cols() != Y.cols()) throw ShapeError("relative error: shapes differ");
  const double nx = X.norm();
  if (nx == 0.0) throw NumericError("relative error: reference has zero norm");
  return (X - Y).norm() / nx;
}

Vec relative_column_errors(const Mat& X, const Mat& Y) {
  if (X.rows() != Y.rows() || X.cols() != Y.cols()) throw ShapeError("relative error: shapes differ");
  Vec e(X.cols());
  for (Index j = 0; j < X.cols(); ++j) {
    const double nx = X.col(j).norm();
    e[j] = nx > 0.0 ? (X.col(j) - Y.col(j)).norm() / nx : (Y.col(j).norm() > 0.0 ? INFINITY : 0.0);
  }
  return e;
}

}  // namespace sympcae
