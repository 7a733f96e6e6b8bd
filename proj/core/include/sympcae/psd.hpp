#pragma once

#include "sympcae/numcore.hpp"

namespace sympcae {

// Cotangent-lift basis: A = blkdiag(Phi, Phi) with column-orthonormal Phi.
struct PsdBasis {
  Mat phi;

  Index n() const { return phi.rows(); }
  Index k() const { return phi.cols(); }
  Vec encode(const Vec& x) const;
  Vec decode(const Vec& z) const;
  Mat encode_all(const Mat& X) const;
  Mat decode_all(const Mat& Z) const;
  // The 2n x 2k lifting matrix blkdiag(Phi, Phi).
  Mat matrix() const;
};

struct PsdFitReport {
  Vec singular_values;
  Index numerical_rank = 0;
  // True when k exceeded the numerical rank and the basis was completed.
  bool padded = false;
};

// Leading k left singular vectors of [Q | P] for snapshot columns (q; p).
// Each column is signed so its largest-magnitude entry is positive.
PsdBasis psd_fit(const Mat& X, Index k, PsdFitReport* report = nullptr);

// ||X - Y||_F / ||X||_F.
double relative_frobenius_error(const Mat& X, const Mat& Y);
// Per-column ||x_i - y_i|| / ||x_i||.
Vec relative_column_errors(const Mat& X, const Mat& Y);

}  // namespace sympcae
