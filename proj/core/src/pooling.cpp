#include "sympcae/pooling.hpp"

#include <string>

namespace sympcae {

std::string to_string(PoolSource s) { return s == PoolSource::Up ? "up" : "low"; }

PoolSource pool_source_from_string(const std::string& s) {
  if (s == "up") return PoolSource::Up;
  if (s == "low") return PoolSource::Low;
  throw ConfigError("pooling source must be 'up' or 'low', got '" + s + "'");
}

namespace {

void check_divisible(Index n, Index k) {
  if (k < 1) throw ShapeError("pooling: kernel must be positive");
  if (n < 1 || n % k != 0) {
    throw ShapeError("pooling: channel length " + std::to_string(n) + " is not divisible by kernel " +
                     std::to_string(k));
  }
}

void check_state(const PoolState& s, Index n, Index k, PoolSource src) {
  s.validate();
  if (s.channel_len != n || s.kernel != k || s.source != src) {
    throw ShapeError("pooling: frozen state does not match the layer shape");
  }
}

}  // namespace

void PoolState::validate() const {
  check_divisible(channel_len, kernel);
  if (static_cast<Index>(index_map.size()) != pooled_len()) throw ShapeError("pooling: index map has wrong length");
  for (Index i = 0; i < pooled_len(); ++i) {
    const Index j = index_map[static_cast<std::size_t>(i)];
    if (j < i * kernel || j >= (i + 1) * kernel) {
      throw ShapeError("pooling: index map entry " + std::to_string(i) + " lies outside its window");
    }
  }
}

Mat PoolState::phi() const {
  Mat P = Mat::Zero(pooled_len(), channel_len);
  for (Index i = 0; i < pooled_len(); ++i) P(i, index_map[static_cast<std::size_t>(i)]) = 1.0;
  return P;
}

PoolState pool_freeze(const Vec& reference, Index kernel, PoolSource source) {
  if (reference.size() % 2 != 0) throw ShapeError("pool_freeze: reference must hold two equal channels");
  const Index n = reference.size() / 2;
  check_divisible(n, kernel);
  PoolState s;
  s.kernel = kernel;
  s.channel_len = n;
  s.source = source;
  const double* ch = reference.data() + (source == PoolSource::Up ? 0 : n);
  for (Index w = 0; w < n / kernel; ++w) {
    Index best = w * kernel;
    for (Index j = best + 1; j < (w + 1) * kernel; ++j) {
      if (ch[j] > ch[best]) best = j;
    }
    s.index_map.push_back(best);
  }
  return s;
}

PoolModule::PoolModule(Index channel_len, Index kernel, PoolSource source)
    : n_(channel_len), k_(kernel), source_(source) {
  check_divisible(n_, k_);
}

const PoolState& PoolModule::state() const {
  if (!state_) throw StateError("pooling layer used before its index map was frozen");
  return *state_;
}

void PoolModule::set_state(const PoolState& s) {
  check_state(s, n_, k_, source_);
  state_ = s;
}

Vec PoolModule::forward(const Vec& x) const {
  check_input(x);
  const PoolState& s = state();
  const Index m = s.pooled_len();
  Vec y(2 * m);
  for (Index i = 0; i < m; ++i) {
    const Index j = s.index_map[static_cast<std::size_t>(i)];
    y[i] = x[j];
    y[m + i] = x[n_ + j];
  }
  return y;
}

Vec PoolModule::jvp(const Vec& x, const Vec& dx, const Vec&) const {
  check_input(x);
  return forward(dx);
}

Vec PoolModule::vjp(const Vec& x, const Vec& ybar, Vec*) const {
  check_input(x);
  check_output_cotangent(ybar);
  const PoolState& s = state();
  const Index m = s.pooled_len();
  Vec xbar = Vec::Zero(2 * n_);
  for (Index i = 0; i < m; ++i) {
    const Index j = s.index_map[static_cast<std::size_t>(i)];
    xbar[j] = ybar[i];
    xbar[n_ + j] = ybar[m + i];
  }
  return xbar;
}

ModuleSpec PoolModule::spec() const {
  return {ModuleKind::Pool,
          {{"channel_len", std::to_string(n_)}, {"kernel", std::to_string(k_)}, {"source", to_string(source_)}}};
}

UnpoolModule::UnpoolModule(Index channel_len, Index kernel, PoolSource source)
    : n_(channel_len), k_(kernel), source_(source) {
  check_divisible(n_, k_);
}

const PoolState& UnpoolModule::state() const {
  if (!state_) throw StateError("unpooling layer used before its index map was frozen");
  return *state_;
}

void UnpoolModule::set_state(const PoolState& s) {
  check_state(s, n_, k_, source_);
  state_ = s;
}

Vec UnpoolModule::forward(const Vec& x) const {
  check_input(x);
  const PoolState& s = state();
  const Index m = s.pooled_len();
  Vec y = Vec::Zero(2 * n_);
  for (Index i = 0; i < m; ++i) {
    const Index j = s.index_map[static_cast<std::size_t>(i)];
    y[j] = x[i];
    y[n_ + j] = x[m + i];
  }
  return y;
}

Vec UnpoolModule::jvp(const Vec& x, const Vec& dx, const Vec&) const {
  check_input(x);
  return forward(dx);
}

Vec UnpoolModule::vjp(const Vec& x, const Vec& ybar, Vec*) const {
  check_input(x);
  check_output_cotangent(ybar);
  const PoolState& s = state();
  const Index m = s.pooled_len();
  Vec xbar(2 * m);
  for (Index i = 0; i < m; ++i) {
    const Index j = s.index_map[static_cast<std::size_t>(i)];
    xbar[i] = ybar[j];
    xbar[m + i] = ybar[n_ + j];
  }
  return xbar;
}

ModuleSpec UnpoolModule::spec() const {
  return {ModuleKind::Unpool,
          {{"channel_len", std::to_string(n_)}, {"kernel", std::to_string(k_)}, {"source", to_string(source_)}}};
}

}  // namespace sympcae
