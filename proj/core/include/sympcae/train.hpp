#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "sympcae/model_graph.hpp"

namespace sympcae {

struct TrainConfig {
  Index epochs = 500;
  // 0 selects half the number of snapshots.
  Index batch_size = 0;
  double learning_rate = 1e-3;
  // 0 keeps the learning rate constant.
  Index lr_step = 0;
  double lr_gamma = 1.0;
  double lambda2 = 1e-5;
  // Penalize squared tensor norms instead of plain norms.
  bool squared_penalty = false;
  // Coupled Adam weight decay (added to the gradient).
  double weight_decay = 0.0;
  std::uint64_t seed = 0;

  void validate(Index samples) const;
  Index effective_batch(Index samples) const { return batch_size > 0 ? batch_size : std::max<Index>(1, samples / 2); }
};

struct AdamState {
  explicit AdamState(Index n, double weight_decay = 0.0);

  Vec m;
  Vec v;
  Index step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

// Bias-corrected Adam update of theta in place.
void adam_step(Vec& theta, const Vec& grad, AdamState& state, double lr);

// lr * gamma^floor(epoch / step_size).
double lr_schedule_step(double lr, Index epoch, Index step_size, double gamma);

struct EpochRecord {
  Index epoch = 0;
  double loss = 0.0;
  double lr = 0.0;
};

// Sum over the selected snapshot columns of ||psi(x) - x||^2 plus
// lambda2 * sum over parameter tensors of ||theta||_2 (or its square).
// Accumulates the parameter gradient into grad when non-null.
double loss_autoencoder(const Autoencoder& ae, const Mat& X, const std::vector<Index>& cols, double lambda2,
                        bool squared_penalty, Vec* grad);
double loss_autoencoder(const Autoencoder& ae, const Mat& X, double lambda2, bool squared_penalty, Vec* grad);

// Sum over columns of ||phi(X_i) - Y_i||^2.
double loss_sympnet(const ModelGraph& phi, const Mat& X, const Mat& Y, const std::vector<Index>& cols, Vec* grad);
double loss_sympnet(const ModelGraph& phi, const Mat& X, const Mat& Y, Vec* grad);

// Called after every epoch with the epoch index (1-based) and its record.
using EpochHook = std::function<void(const EpochRecord&)>;

// Mini-batch Adam on the snapshot columns of X with a seeded per-epoch
// shuffle. Throws NumericError carrying the epoch when the loss or gradient
// turns non-finite; parameters are then left at the last finite state.
std::vector<EpochRecord> train_autoencoder(Autoencoder& ae, const Mat& X, const TrainConfig& cfg,
                                           const EpochHook& hook = {});

// Same loop for a one-step map fitted to pairs (X_i, Y_i).
std::vector<EpochRecord> train_sympnet(ModelGraph& phi, const Mat& X, const Mat& Y, const TrainConfig& cfg,
                                       const EpochHook& hook = {});

}  // namespace sympcae
