#include "sympcae/sympnet_modules.hpp"

#include <cmath>

namespace sympcae {

std::string to_string(ActivationFn f) { return f == ActivationFn::Tanh ? "tanh" : "sigmoid"; }

ActivationFn activation_from_string(const std::string& s) {
  if (s == "tanh") return ActivationFn::Tanh;
  if (s == "sigmoid") return ActivationFn::Sigmoid;
  throw ConfigError("unknown activation '" + s + "' (expected tanh or sigmoid)");
}

double activation_value(ActivationFn f, double x) {
  if (f == ActivationFn::Tanh) return std::tanh(x);
  return 1.0 / (1.0 + std::exp(-x));
}

double activation_derivative(ActivationFn f, double x) {
  if (f == ActivationFn::Tanh) {
    const double t = std::tanh(x);
    return 1.0 - t * t;
  }
  const double s = 1.0 / (1.0 + std::exp(-x));
  return s * (1.0 - s);
}

double activation_antiderivative(ActivationFn f, double x) {
  // log cosh and softplus, written to avoid overflow for large |x|.
  const double ax = std::abs(x);
  if (f == ActivationFn::Tanh) return ax + std::log1p(std::exp(-2.0 * ax)) - std::log(2.0);
  return std::max(x, 0.0) + std::log1p(std::exp(-ax));
}

// ---------------------------------------------------------------------------

LinearModule::LinearModule(Index half_dim, Index sublayers, Orientation first)
    : n_(half_dim), m_(sublayers), first_(first) {
  if (n_ < 1) throw ShapeError("linear module: half dimension must be positive");
  if (m_ < 1) throw ShapeError("linear module: needs at least one sublayer");
  params_ = Vec::Zero(m_ * tri_size());
}

bool LinearModule::acts_on_q(Index sublayer) const {
  return (first_ == Orientation::Up) == (sublayer % 2 == 0);
}

namespace {

Mat symmetric_from_upper(const double* upper, Index n) {
  Mat S(n, n);
  Index k = 0;
  for (Index r = 0; r < n; ++r) {
    for (Index c = r; c < n; ++c, ++k) {
      S(r, c) = upper[k];
      S(c, r) = upper[k];
    }
  }
  return S;
}

// Gradient of <G, S> with respect to the upper-triangle parameters of S.
void accumulate_upper(const Mat& G, double* out, Index n) {
  Index k = 0;
  for (Index r = 0; r < n; ++r) {
    for (Index c = r; c < n; ++c, ++k) out[k] += (r == c) ? G(r, r) : G(r, c) + G(c, r);
  }
}

}  // namespace

Mat LinearModule::block(Index i) const { return symmetric_from_upper(params_.data() + i * tri_size(), n_); }

Vec LinearModule::forward(const Vec& x) const {
  check_input(x);
  Vec z = x;
  for (Index i = 0; i < m_; ++i) {
    const Mat S = block(i);
    if (acts_on_q(i)) {
      z.head(n_) += S * z.tail(n_);
    } else {
      z.tail(n_) += S * z.head(n_);
    }
  }
  return z;
}

Vec LinearModule::jvp(const Vec& x, const Vec& dx, const Vec& dtheta) const {
  check_input(x);
  check_input(dx);
  const bool with_params = dtheta.size() > 0;
  if (with_params && dtheta.size() != params_.size()) throw ShapeError("linear module: parameter tangent size");
  Vec z = x;
  Vec dz = dx;
  for (Index i = 0; i < m_; ++i) {
    const Mat S = block(i);
    if (acts_on_q(i)) {
      dz.head(n_) += S * dz.tail(n_);
      if (with_params) dz.head(n_) += symmetric_from_upper(dtheta.data() + i * tri_size(), n_) * z.tail(n_);
      z.head(n_) += S * z.tail(n_);
    } else {
      dz.tail(n_) += S * dz.head(n_);
      if (with_params) dz.tail(n_) += symmetric_from_upper(dtheta.data() + i * tri_size(), n_) * z.head(n_);
      z.tail(n_) += S * z.head(n_);
    }
  }
  return dz;
}

Vec LinearModule::vjp(const Vec& x, const Vec& ybar, Vec* theta_bar) const {
  check_input(x);
  check_output_cotangent(ybar);
  std::vector<Mat> blocks;
  std::vector<Vec> inputs;
  blocks.reserve(static_cast<std::size_t>(m_));
  inputs.reserve(static_cast<std::size_t>(m_));
  Vec z = x;
  for (Index i = 0; i < m_; ++i) {
    blocks.push_back(block(i));
    inputs.push_back(z);
    if (acts_on_q(i)) {
      z.head(n_) += blocks.back() * z.tail(n_);
    } else {
      z.tail(n_) += blocks.back() * z.head(n_);
    }
  }
  Vec zbar = ybar;
  for (Index i = m_ - 1; i >= 0; --i) {
    const Mat& S = blocks[static_cast<std::size_t>(i)];
    const Vec& zi = inputs[static_cast<std::size_t>(i)];
    if (acts_on_q(i)) {
      // q' = q + S p
      if (theta_bar) accumulate_upper(zbar.head(n_) * zi.tail(n_).transpose(), theta_bar->data() + i * tri_size(), n_);
      zbar.tail(n_) += S * zbar.head(n_);
    } else {
      if (theta_bar) accumulate_upper(zbar.tail(n_) * zi.head(n_).transpose(), theta_bar->data() + i * tri_size(), n_);
      zbar.head(n_) += S * zbar.tail(n_);
    }
  }
  return zbar;
}

Mat LinearModule::dense_matrix() const {
  Mat M = Mat::Identity(2 * n_, 2 * n_);
  for (Index i = 0; i < m_; ++i) {
    Mat shear = Mat::Identity(2 * n_, 2 * n_);
    if (acts_on_q(i)) {
      shear.topRightCorner(n_, n_) = block(i);
    } else {
      shear.bottomLeftCorner(n_, n_) = block(i);
    }
    M = shear * M;
  }
  return M;
}

ModuleSpec LinearModule::spec() const {
  return {ModuleKind::Linear,
          {{"half_dim", std::to_string(n_)}, {"sublayers", std::to_string(m_)}, {"orientation", to_string(first_)}}};
}

std::vector<TensorSlot> LinearModule::tensors() const {
  std::vector<TensorSlot> out;
  for (Index i = 0; i < m_; ++i) {
    out.push_back({"S" + std::to_string(i + 1), {tri_size()}, i * tri_size(), tri_size()});
  }
  return out;
}

// ---------------------------------------------------------------------------

ActivationModule::ActivationModule(Index half_dim, Orientation o, ActivationFn fn)
    : n_(half_dim), orientation_(o), fn_(fn) {
  if (n_ < 1) throw ShapeError("activation module: half dimension must be positive");
  params_ = Vec::Zero(2 * n_);
}

namespace {

using Arr = Eigen::ArrayXd;

// Written through exp so Eigen can vectorize; tanh u = 1 - 2 / (e^{2u} + 1).
Arr activation_values(ActivationFn f, const Arr& u) {
  if (f == ActivationFn::Tanh) return 1.0 - 2.0 / ((2.0 * u).exp() + 1.0);
  return 1.0 / (1.0 + (-u).exp());
}

Arr activation_slopes(ActivationFn f, const Arr& s) {
  if (f == ActivationFn::Tanh) return 1.0 - s.square();
  return s * (1.0 - s);
}

}  // namespace

Vec ActivationModule::forward(const Vec& x) const {
  check_input(x);
  Vec y = x;
  const Index src = orientation_ == Orientation::Up ? n_ : 0;
  const Index dst = orientation_ == Orientation::Up ? 0 : n_;
  const Arr s = activation_values(fn_, x.segment(src, n_).array() + params_.tail(n_).array());
  y.segment(dst, n_).array() += params_.head(n_).array() * s;
  return y;
}

Vec ActivationModule::jvp(const Vec& x, const Vec& dx, const Vec& dtheta) const {
  check_input(x);
  check_input(dx);
  const bool with_params = dtheta.size() > 0;
  if (with_params && dtheta.size() != params_.size()) throw ShapeError("activation module: parameter tangent size");
  Vec dy = dx;
  const Index src = orientation_ == Orientation::Up ? n_ : 0;
  const Index dst = orientation_ == Orientation::Up ? 0 : n_;
  const Arr s = activation_values(fn_, x.segment(src, n_).array() + params_.tail(n_).array());
  const Arr ds = activation_slopes(fn_, s);
  const auto a = params_.head(n_).array();
  Arr d = a * ds * dx.segment(src, n_).array();
  if (with_params) d += dtheta.head(n_).array() * s + a * ds * dtheta.tail(n_).array();
  dy.segment(dst, n_).array() += d;
  return dy;
}

Vec ActivationModule::vjp(const Vec& x, const Vec& ybar, Vec* theta_bar) const {
  check_input(x);
  check_output_cotangent(ybar);
  Vec xbar = ybar;
  const Index src = orientation_ == Orientation::Up ? n_ : 0;
  const Index dst = orientation_ == Orientation::Up ? 0 : n_;
  const Arr s = activation_values(fn_, x.segment(src, n_).array() + params_.tail(n_).array());
  const Arr g = ybar.segment(dst, n_).array();
  const Arr gds = g * activation_slopes(fn_, s);
  xbar.segment(src, n_).array() += params_.head(n_).array() * gds;
  if (theta_bar) {
    theta_bar->head(n_).array() += g * s;
    theta_bar->tail(n_).array() += params_.head(n_).array() * gds;
  }
  return xbar;
}

ModuleSpec ActivationModule::spec() const {
  return {ModuleKind::Activation,
          {{"half_dim", std::to_string(n_)}, {"orientation", to_string(orientation_)}, {"sigma", to_string(fn_)}}};
}

std::vector<TensorSlot> ActivationModule::tensors() const {
  return {{"a", {n_}, 0, n_}, {"b", {n_}, n_, n_}};
}

}  // namespace sympcae
