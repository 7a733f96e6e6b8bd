#include "sympcae/psd_module.hpp"

#include <cmath>
#include <string>

#include <Eigen/QR>

namespace sympcae {

PsdModule::PsdModule(Index n, Index k, PsdDirection dir) : n_(n), k_(k), dir_(dir) {
  if (k_ < 1 || n_ < 1) throw ShapeError("psd module: dimensions must be positive");
  if (k_ > n_) throw ShapeError("psd module: k = " + std::to_string(k_) + " exceeds n = " + std::to_string(n_));
  params_ = Vec::Zero(n_ * k_);
  for (Index j = 0; j < k_; ++j) params_[j * n_ + j] = 1.0;
  sync();
}

void PsdModule::sync() {
  const Eigen::Map<const Mat> raw(params_.data(), n_, k_);
  Eigen::HouseholderQR<Mat> qr(raw);
  Q_ = qr.householderQ() * Mat::Identity(n_, k_);
  R_ = qr.matrixQR().topRows(k_).triangularView<Eigen::Upper>();
  for (Index j = 0; j < k_; ++j) {
    if (R_(j, j) < 0.0) {
      Q_.col(j) *= -1.0;
      R_.row(j) *= -1.0;
    }
  }
}

Vec PsdModule::forward(const Vec& x) const {
  check_input(x);
  Vec y(out_dim());
  if (dir_ == PsdDirection::Reduce) {
    y.head(k_).noalias() = Q_.transpose() * x.head(n_);
    y.tail(k_).noalias() = Q_.transpose() * x.tail(n_);
  } else {
    y.head(n_).noalias() = Q_ * x.head(k_);
    y.tail(n_).noalias() = Q_ * x.tail(k_);
  }
  return y;
}

Vec PsdModule::jvp(const Vec& x, const Vec& dx, const Vec& dtheta) const {
  check_input(x);
  check_input(dx);
  Vec dy = forward(dx);
  if (dtheta.size() > 0) {
    if (dtheta.size() != params_.size()) throw ShapeError("psd module: parameter tangent size");
    const Eigen::Map<const Mat> dA(dtheta.data(), n_, k_);
    const Mat Rinv = R_.triangularView<Eigen::Upper>().solve(Mat::Identity(k_, k_));
    const Mat C = Q_.transpose() * dA * Rinv;
    Mat L = C.triangularView<Eigen::StrictlyLower>();
    const Mat dQ = Q_ * (L - L.transpose()) + (dA * Rinv - Q_ * C);
    if (dir_ == PsdDirection::Reduce) {
      dy.head(k_) += dQ.transpose() * x.head(n_);
      dy.tail(k_) += dQ.transpose() * x.tail(n_);
    } else {
      dy.head(n_) += dQ * x.head(k_);
      dy.tail(n_) += dQ * x.tail(k_);
    }
  }
  return dy;
}

Mat PsdModule::qr_backward(const Mat& Qbar) const {
  const Mat X = Q_.transpose() * Qbar;
  Mat skew = (X - X.transpose()).triangularView<Eigen::StrictlyLower>();
  const Mat M = Qbar - Q_ * X + Q_ * skew;
  // M R^{-T} = (R^{-1} M^T)^T.
  return R_.triangularView<Eigen::Upper>().solve(M.transpose()).transpose();
}

Vec PsdModule::vjp(const Vec& x, const Vec& ybar, Vec* theta_bar) const {
  check_input(x);
  check_output_cotangent(ybar);
  Vec xbar(in_dim());
  Mat Qbar;
  if (dir_ == PsdDirection::Reduce) {
    xbar.head(n_).noalias() = Q_ * ybar.head(k_);
    xbar.tail(n_).noalias() = Q_ * ybar.tail(k_);
    if (theta_bar) Qbar = x.head(n_) * ybar.head(k_).transpose() + x.tail(n_) * ybar.tail(k_).transpose();
  } else {
    xbar.head(k_).noalias() = Q_.transpose() * ybar.head(n_);
    xbar.tail(k_).noalias() = Q_.transpose() * ybar.tail(n_);
    if (theta_bar) Qbar = ybar.head(n_) * x.head(k_).transpose() + ybar.tail(n_) * x.tail(k_).transpose();
  }
  if (theta_bar) {
    for (Index j = 0; j < k_; ++j) {
      if (!(std::abs(R_(j, j)) > 1e-300)) throw NumericError("psd module: raw parameter matrix is rank deficient", j);
    }
    const Mat g = qr_backward(Qbar);
    Eigen::Map<Mat>(theta_bar->data(), n_, k_) += g;
  }
  return xbar;
}

Mat PsdModule::dense_matrix() const {
  Mat A = Mat::Zero(2 * k_, 2 * n_);
  A.topLeftCorner(k_, n_) = Q_.transpose();
  A.bottomRightCorner(k_, n_) = Q_.transpose();
  if (dir_ == PsdDirection::Reduce) return A;
  return A.transpose();
}

ModuleSpec PsdModule::spec() const {
  return {kind(), {{"n", std::to_string(n_)}, {"k", std::to_string(k_)}}};
}

std::vector<TensorSlot> PsdModule::tensors() const { return {{"raw", {n_, k_}, 0, n_ * k_}}; }

}  // namespace sympcae
