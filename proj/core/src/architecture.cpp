#include "sympcae/architecture.hpp"

#include <string>

#include "sympcae/conv.hpp"
#include "sympcae/psd_module.hpp"

namespace sympcae {

void ArchitectureSpec::validate() const {
  if (spatial_dims != 1 && spatial_dims != 2) throw ConfigError("architecture: spatial_dims must be 1 or 2");
  if (n1 < 1 || n2 < 1) throw ConfigError("architecture: grid size must be positive");
  if (spatial_dims == 1 && (n2 != 1 || l2 != 1)) throw ConfigError("architecture: 1D layout needs n2 = l2 = 1");
  if (channels.empty()) throw ConfigError("architecture: no convolutional layers");
  Index c = 2;
  for (Index out : channels) {
    if (out < 2 || out % 2 != 0) throw ConfigError("architecture: channel counts must be even and positive");
    if (out % c != 0 && c % out != 0) {
      throw ConfigError("architecture: channel step " + std::to_string(c) + " -> " + std::to_string(out) +
                        " is neither a lift nor a projection");
    }
    c = out;
  }
  if (activation_every < 1) throw ConfigError("architecture: activation_every must be positive");
  if (pool_kernel < 1) throw ConfigError("architecture: pool kernel must be positive");
  if ((c / 2) * n1 * n2 % pool_kernel != 0) throw ConfigError("architecture: pool kernel does not divide the channel length");
  if (latent < 1 || latent > reduced_half_dim()) {
    throw ConfigError("architecture: latent dimension must lie in [1, " + std::to_string(reduced_half_dim()) + "]");
  }
}

Index ArchitectureSpec::reduced_half_dim() const {
  const Index c = channels.empty() ? 2 : channels.back();
  return (c / 2) * n1 * n2 / pool_kernel;
}

void init_module(Module& m, Rng& rng, double scale, double a0) {
  Vec theta = m.params();
  switch (m.kind()) {
    case ModuleKind::Linear:
    case ModuleKind::ConvLift:
    case ModuleKind::ConvProj:
      theta = rng.uniform_vec(theta.size(), -scale, scale);
      break;
    case ModuleKind::Activation: {
      const Index n = theta.size() / 2;
      theta.head(n).setConstant(a0);
      theta.tail(n).setZero();
      break;
    }
    case ModuleKind::PsdReduce:
    case ModuleKind::PsdLift:
      theta = rng.normal_vec(theta.size());
      break;
    case ModuleKind::Pool:
    case ModuleKind::Unpool:
      return;
  }
  m.set_params(theta);
}

namespace {

std::unique_ptr<Module> make_conv(const ConvGeometry& g, Index c_in, Index c_out, Orientation o) {
  if (c_out >= c_in) return std::make_unique<ConvLift>(g, c_in, c_out, o);
  return std::make_unique<ConvProj>(g, c_in, c_out, o);
}

}  // namespace

Autoencoder build_autoencoder(const ArchitectureSpec& spec, Rng& rng) {
  spec.validate();
  ConvGeometry g;
  g.spatial_dims = spec.spatial_dims;
  g.n1 = spec.n1;
  g.n2 = spec.n2;
  g.l1 = spec.l1;
  g.l2 = spec.l2;
  const Index L = g.channel_len();

  struct Step {
    bool conv;
    Index c_in, c_out;
    Orientation o;
  };
  std::vector<Step> body;
  Index c = 2;
  const auto n_conv = static_cast<Index>(spec.channels.size());
  for (Index i = 0; i < n_conv; ++i) {
    const Index out = spec.channels[static_cast<std::size_t>(i)];
    body.push_back({true, c, out, i % 2 == 0 ? Orientation::Up : Orientation::Low});
    c = out;
    if ((i + 1) % spec.activation_every == 0 || i + 1 == n_conv) {
      // Trailing conv layers still get their activation pair when the count
      // is not a multiple of activation_every.
      body.push_back({false, c, c, Orientation::Up});
      body.push_back({false, c, c, Orientation::Low});
    }
  }
  const Index half = (c / 2) * L;
  const Index pooled = half / spec.pool_kernel;

  Autoencoder ae;
  for (const Step& s : body) {
    std::unique_ptr<Module> m;
    if (s.conv) {
      m = make_conv(g, s.c_in, s.c_out, s.o);
    } else {
      m = std::make_unique<ActivationModule>((s.c_in / 2) * L, s.o, spec.sigma);
    }
    init_module(*m, rng, spec.init_scale, spec.init_a);
    ae.encoder.add(std::move(m));
  }
  if (spec.pool_kernel > 1) ae.encoder.add(std::make_unique<PoolModule>(half, spec.pool_kernel, spec.pool_source));
  {
    auto psd = std::make_unique<PsdModule>(pooled, spec.latent, PsdDirection::Reduce);
    init_module(*psd, rng, spec.init_scale, spec.init_a);
    ae.encoder.add(std::move(psd));
  }

  {
    auto psd = std::make_unique<PsdModule>(pooled, spec.latent, PsdDirection::Lift);
    init_module(*psd, rng, spec.init_scale, spec.init_a);
    ae.decoder.add(std::move(psd));
  }
  if (spec.pool_kernel > 1) ae.decoder.add(std::make_unique<UnpoolModule>(half, spec.pool_kernel, spec.pool_source));
  for (auto it = body.rbegin(); it != body.rend(); ++it) {
    std::unique_ptr<Module> m;
    if (it->conv) {
      m = make_conv(g, it->c_out, it->c_in, it->o);
    } else {
      m = std::make_unique<ActivationModule>((it->c_in / 2) * L, it->o, spec.sigma);
    }
    init_module(*m, rng, spec.init_scale, spec.init_a);
    ae.decoder.add(std::move(m));
  }
  ae.encoder.validate();
  ae.decoder.validate();
  return ae;
}

ModelGraph build_sympnet(const SympNetSpec& spec, Rng& rng) {
  if (spec.half_dim < 1 || spec.layers < 1 || spec.sublayers < 1) {
    throw ConfigError("sympnet: half_dim, layers and sublayers must be positive");
  }
  ModelGraph g(GraphRole::SympNet);
  for (Index i = 0; i < spec.layers; ++i) {
    const Orientation o = i % 2 == 0 ? Orientation::Up : Orientation::Low;
    auto lin = std::make_unique<LinearModule>(spec.half_dim, spec.sublayers, o);
    init_module(*lin, rng, spec.init_scale, 0.0);
    g.add(std::move(lin));
    if (i + 1 == spec.layers) break;
    auto act = std::make_unique<ActivationModule>(spec.half_dim, o, spec.sigma);
    act->set_params(
        (Vec(2 * spec.half_dim) << rng.uniform_vec(spec.half_dim, -spec.init_scale, spec.init_scale),
         Vec::Zero(spec.half_dim))
            .finished());
    g.add(std::move(act));
  }
  g.validate();
  return g;
}

}  // namespace sympcae
