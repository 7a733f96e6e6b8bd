#pragma once

#include "sympcae/model_graph.hpp"
#include "sympcae/pooling.hpp"
#include "sympcae/random.hpp"
#include "sympcae/sympnet_modules.hpp"

namespace sympcae {

// Convolutional autoencoder layout. `channels` lists the output channel
// count of every convolutional layer; the first layer reads 2 channels.
struct ArchitectureSpec {
  int spatial_dims = 1;
  Index n1 = 0;
  Index n2 = 1;
  Index l1 = 21;
  Index l2 = 1;
  std::vector<Index> channels{2, 4, 4, 4, 2, 4, 4, 4, 2, 4, 4, 4};
  // An up and a low activation module follow every this-many conv layers.
  Index activation_every = 4;
  ActivationFn sigma = ActivationFn::Tanh;
  // Pool kernel 1 drops the pooling layer.
  Index pool_kernel = 2;
  PoolSource pool_source = PoolSource::Up;
  Index latent = 1;
  double init_scale = 0.01;
  double init_a = 0.01;

  void validate() const;
  // Half dimension entering the PSD layer.
  Index reduced_half_dim() const;
};

// Builds the encoder (conv/activation body, pooling, PSD reduce) and its
// mirror-ordered decoder with independent parameters, both validated and
// randomly initialized. Pooling still has to be frozen.
Autoencoder build_autoencoder(const ArchitectureSpec& spec, Rng& rng);

// Draws initial parameters for one module: kernel and shear weights
// uniform in [-scale, scale], activation a = a0 and b = 0, PSD raw normal.
void init_module(Module& m, Rng& rng, double scale, double a0);

struct SympNetSpec {
  Index half_dim = 1;
  // Number of linear modules; activations sit between consecutive ones.
  Index layers = 8;
  Index sublayers = 1;
  ActivationFn sigma = ActivationFn::Tanh;
  double init_scale = 0.01;
};

ModelGraph build_sympnet(const SympNetSpec& spec, Rng& rng);

}  // namespace sympcae
