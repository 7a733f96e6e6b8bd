#include "sympcae/latent.hpp"

namespace sympcae {

LatentConfig LatentConfig::defaults(Index half_dim) {
  LatentConfig c;
  c.net.half_dim = half_dim;
  c.net.layers = 8;
  c.net.sublayers = 1;
  c.train.epochs = 2000;
  c.train.batch_size = 0;
  c.train.learning_rate = 0.1;
  c.train.lr_step = 100;
  c.train.lr_gamma = 0.9;
  c.train.lambda2 = 0.0;
  c.train.weight_decay = 1e-6;
  return c;
}

std::vector<EpochRecord> sympnet_train(ModelGraph& phi, const Mat& Z, const TrainConfig& cfg,
                                       const EpochHook& hook) {
  if (Z.rows() != phi.in_dim()) throw ShapeError("sympnet_train: latent dimension does not match the network");
  if (Z.cols() < 2) throw ShapeError("sympnet_train: need at least two latent states");
  TrainConfig c = cfg;
  // Batch 0 means the whole window for the latent model.
  if (c.batch_size == 0) c.batch_size = Z.cols() - 1;
  const Mat X = Z.leftCols(Z.cols() - 1);
  const Mat Y = Z.rightCols(Z.cols() - 1);
  return train_sympnet(phi, X, Y, c, hook);
}

LatentRollout sympnet_rollout(const ModelGraph& phi, const Vec& xi0, Index steps) {
  if (steps < 0) throw ShapeError("sympnet_rollout: steps must be non-negative");
  if (xi0.size() != phi.in_dim()) throw ShapeError("sympnet_rollout: latent dimension does not match the network");
  LatentRollout out;
  out.states.resize(xi0.size(), steps + 1);
  out.states.col(0) = xi0;
  Vec z = xi0;
  for (Index s = 1; s <= steps; ++s) {
    z = phi.forward(z);
    if (!z.allFinite()) {
      out.diverged = true;
      out.failed_step = s;
      out.states.conservativeResize(Eigen::NoChange, s);
      return out;
    }
    out.states.col(s) = z;
  }
  return out;
}

}  // namespace sympcae
