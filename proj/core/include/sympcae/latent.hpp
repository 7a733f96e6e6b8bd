#pragma once

#include "sympcae/architecture.hpp"
#include "sympcae/train.hpp"

namespace sympcae {

struct LatentConfig {
  SympNetSpec net;
  TrainConfig train;

  // Full-batch Adam with lr 0.1, StepLR(100, 0.9), weight decay 1e-6.
  static LatentConfig defaults(Index half_dim);
};

struct LatentRollout {
  // One state per column, starting with xi0.
  Mat states;
  // Set when a non-finite state stopped the rollout early.
  bool diverged = false;
  Index failed_step = -1;
};

// Trains phi so that phi(Z_i) ~ Z_{i+1} over consecutive columns of Z.
std::vector<EpochRecord> sympnet_train(ModelGraph& phi, const Mat& Z, const TrainConfig& cfg,
                                       const EpochHook& hook = {});

// Applies phi `steps` times; the result has steps + 1 columns unless the
// rollout diverged, in which case it stops at the last finite state.
LatentRollout sympnet_rollout(const ModelGraph& phi, const Vec& xi0, Index steps);

}  // namespace sympcae
