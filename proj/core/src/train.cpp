#include "sympcae/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "sympcae/random.hpp"

namespace sympcae {

void TrainConfig::validate(Index samples) const {
  if (epochs < 0) throw ConfigError("train: epochs must be non-negative");
  if (batch_size < 0) throw ConfigError("train: batch size must be non-negative");
  if (samples < 1) throw ConfigError("train: no training samples");
  if (effective_batch(samples) > samples) throw ConfigError("train: batch size exceeds the number of snapshots");
  if (!(learning_rate > 0.0)) throw ConfigError("train: learning rate must be positive");
  if (lr_step < 0) throw ConfigError("train: lr step must be non-negative");
  if (!(lr_gamma > 0.0 && lr_gamma <= 1.0)) throw ConfigError("train: lr gamma must lie in (0, 1]");
  if (lambda2 < 0.0 || weight_decay < 0.0) throw ConfigError("train: penalties must be non-negative");
}

AdamState::AdamState(Index n, double wd) : m(Vec::Zero(n)), v(Vec::Zero(n)), weight_decay(wd) {}

void adam_step(Vec& theta, const Vec& grad, AdamState& s, double lr) {
  if (grad.size() != theta.size() || s.m.size() != theta.size()) throw ShapeError("adam: size mismatch");
  ++s.step;
  const double bc1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
  const double bc2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
  for (Index i = 0; i < theta.size(); ++i) {
    const double g = grad[i] + s.weight_decay * theta[i];
    s.m[i] = s.beta1 * s.m[i] + (1.0 - s.beta1) * g;
    s.v[i] = s.beta2 * s.v[i] + (1.0 - s.beta2) * g * g;
    const double mhat = s.m[i] / bc1;
    const double vhat = s.v[i] / bc2;
    theta[i] -= lr * mhat / (std::sqrt(vhat) + s.eps);
  }
}

double lr_schedule_step(double lr, Index epoch, Index step_size, double gamma) {
  if (step_size <= 0) return lr;
  return lr * std::pow(gamma, static_cast<double>(epoch / step_size));
}

namespace {

std::vector<Index> all_columns(const Mat& X) {
  std::vector<Index> c(static_cast<std::size_t>(X.cols()));
  std::iota(c.begin(), c.end(), Index{0});
  return c;
}

double penalty(const Vec& theta, const std::vector<ParamTensor>& tensors, double lambda2, bool squared,
               Vec* grad) {
  if (lambda2 == 0.0) return 0.0;
  double total = 0.0;
  for (const auto& t : tensors) {
    const auto seg = theta.segment(t.offset, t.size);
    const double sq = seg.squaredNorm();
    if (squared) {
      total += sq;
      if (grad) grad->segment(t.offset, t.size) += 2.0 * lambda2 * seg;
    } else {
      const double nrm = std::sqrt(sq);
      total += nrm;
      if (grad && nrm > 0.0) grad->segment(t.offset, t.size) += (lambda2 / nrm) * seg;
    }
  }
  return lambda2 * total;
}

}  // namespace

double loss_autoencoder(const Autoencoder& ae, const Mat& X, const std::vector<Index>& cols, double lambda2,
                        bool squared_penalty, Vec* grad) {
  if (cols.empty()) throw ShapeError("loss_autoencoder: empty batch");
  if (X.rows() != ae.encoder.in_dim()) throw ShapeError("loss_autoencoder: snapshot dimension does not match the model");
  const Index ne = ae.encoder.num_params();
  const Index nd = ae.decoder.num_params();
  if (grad && grad->size() != ne + nd) throw ShapeError("loss_autoencoder: gradient has the wrong size");
  double data = 0.0;
  Tape te;
  Tape td;
  Vec ge = Vec::Zero(grad ? ne : 0);
  Vec gd = Vec::Zero(grad ? nd : 0);
  for (Index c : cols) {
    const Vec x = X.col(c);
    const Vec z = ae.encoder.forward(x, te);
    const Vec y = ae.decoder.forward(z, td);
    const Vec r = y - x;
    data += r.squaredNorm();
    if (grad) {
      const Vec zbar = ae.decoder.backward(td, 2.0 * r, &gd);
      ae.encoder.backward(te, zbar, &ge);
    }
  }
  if (grad) {
    grad->head(ne) += ge;
    grad->tail(nd) += gd;
  }
  if (!std::isfinite(data)) throw NumericError("loss_autoencoder: non-finite reconstruction");
  return data + penalty(ae.params(), ae.param_tensors(), lambda2, squared_penalty, grad);
}

double loss_autoencoder(const Autoencoder& ae, const Mat& X, double lambda2, bool squared_penalty, Vec* grad) {
  return loss_autoencoder(ae, X, all_columns(X), lambda2, squared_penalty, grad);
}

double loss_sympnet(const ModelGraph& phi, const Mat& X, const Mat& Y, const std::vector<Index>& cols, Vec* grad) {
  if (X.rows() != Y.rows() || X.cols() != Y.cols()) throw ShapeError("loss_sympnet: pair counts differ");
  if (cols.empty()) throw ShapeError("loss_sympnet: empty batch");
  if (grad && grad->size() != phi.num_params()) throw ShapeError("loss_sympnet: gradient has the wrong size");
  double total = 0.0;
  Tape tape;
  for (Index c : cols) {
    const Vec r = phi.forward(X.col(c), tape) - Y.col(c);
    total += r.squaredNorm();
    if (grad) phi.backward(tape, 2.0 * r, grad);
  }
  return total;
}

double loss_sympnet(const ModelGraph& phi, const Mat& X, const Mat& Y, Vec* grad) {
  return loss_sympnet(phi, X, Y, all_columns(X), grad);
}

namespace {

// Shared epoch loop. batch_loss(cols, grad) evaluates one mini-batch.
template <class Model, class BatchLoss>
std::vector<EpochRecord> run_epochs(Model& model, Index samples, const TrainConfig& cfg, const BatchLoss& batch_loss,
                                    const EpochHook& hook) {
  cfg.validate(samples);
  const Index batch = cfg.effective_batch(samples);
  Rng rng(cfg.seed);
  AdamState adam(model.num_params(), cfg.weight_decay);
  Vec theta = model.params();
  std::vector<EpochRecord> history;
  history.reserve(static_cast<std::size_t>(cfg.epochs));
  for (Index epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = lr_schedule_step(cfg.learning_rate, epoch, cfg.lr_step, cfg.lr_gamma);
    const std::vector<Index> perm = rng.permutation(samples);
    double epoch_loss = 0.0;
    for (Index start = 0; start < samples; start += batch) {
      const Index stop = std::min(samples, start + batch);
      std::vector<Index> cols(perm.begin() + start, perm.begin() + stop);
      Vec grad = Vec::Zero(theta.size());
      double loss = 0.0;
      try {
        loss = batch_loss(cols, &grad);
      } catch (const NumericError&) {
        loss = std::numeric_limits<double>::quiet_NaN();
      }
      if (!std::isfinite(loss) || !grad.allFinite()) {
        model.set_params(theta);
        throw NumericError("training diverged at epoch " + std::to_string(epoch + 1) +
                               "; parameters restored to the last finite state",
                           static_cast<long>(epoch + 1));
      }
      epoch_loss += loss;
      Vec next = theta;
      adam_step(next, grad, adam, lr);
      if (!next.allFinite()) {
        model.set_params(theta);
        throw NumericError("training diverged at epoch " + std::to_string(epoch + 1), static_cast<long>(epoch + 1));
      }
      theta = std::move(next);
      model.set_params(theta);
    }
    EpochRecord rec{epoch + 1, epoch_loss, lr};
    history.push_back(rec);
    if (hook) hook(rec);
  }
  return history;
}

}  // namespace

std::vector<EpochRecord> train_autoencoder(Autoencoder& ae, const Mat& X, const TrainConfig& cfg,
                                           const EpochHook& hook) {
  if (!ae.pooling_frozen()) throw StateError("train_autoencoder: pooling index maps are not frozen");
  auto batch_loss = [&](const std::vector<Index>& cols, Vec* grad) {
    return loss_autoencoder(ae, X, cols, cfg.lambda2, cfg.squared_penalty, grad);
  };
  return run_epochs(ae, X.cols(), cfg, batch_loss, hook);
}

std::vector<EpochRecord> train_sympnet(ModelGraph& phi, const Mat& X, const Mat& Y, const TrainConfig& cfg,
                                       const EpochHook& hook) {
  auto batch_loss = [&](const std::vector<Index>& cols, Vec* grad) { return loss_sympnet(phi, X, Y, cols, grad); };
  return run_epochs(phi, X.cols(), cfg, batch_loss, hook);
}

}  // namespace sympcae
