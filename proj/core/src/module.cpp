#include "sympcae/module.hpp"

#include <string>

#include "sympcae/conv.hpp"
#include "sympcae/pooling.hpp"
#include "sympcae/psd_module.hpp"
#include "sympcae/sympnet_modules.hpp"

namespace sympcae {

std::string to_string(ModuleKind kind) {
  switch (kind) {
    case ModuleKind::Linear: return "linear";
    case ModuleKind::Activation: return "activation";
    case ModuleKind::ConvLift: return "conv_lift";
    case ModuleKind::ConvProj: return "conv_proj";
    case ModuleKind::PsdReduce: return "psd_reduce";
    case ModuleKind::PsdLift: return "psd_lift";
    case ModuleKind::Pool: return "pool";
    case ModuleKind::Unpool: return "unpool";
  }
  return "unknown";
}

std::string to_string(Orientation o) { return o == Orientation::Up ? "up" : "low"; }

ModuleKind module_kind_from_string(const std::string& s) {
  for (auto k : {ModuleKind::Linear, ModuleKind::Activation, ModuleKind::ConvLift, ModuleKind::ConvProj,
                 ModuleKind::PsdReduce, ModuleKind::PsdLift, ModuleKind::Pool, ModuleKind::Unpool}) {
    if (to_string(k) == s) return k;
  }
  throw ConfigError("unsupported layer kind '" + s + "'");
}

Orientation orientation_from_string(const std::string& s) {
  if (s == "up") return Orientation::Up;
  if (s == "low") return Orientation::Low;
  throw ConfigError("orientation must be 'up' or 'low', got '" + s + "'");
}

const std::string& ModuleSpec::at(const std::string& key) const {
  auto it = attrs.find(key);
  if (it == attrs.end()) throw ConfigError("layer descriptor for " + to_string(kind) + " lacks '" + key + "'");
  return it->second;
}

Index ModuleSpec::index_at(const std::string& key) const {
  const std::string& v = at(key);
  try {
    std::size_t used = 0;
    const long long parsed = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return static_cast<Index>(parsed);
  } catch (const std::exception&) {
    throw ConfigError("layer attribute '" + key + "' is not an integer: '" + v + "'");
  }
}

void Module::set_params(const Vec& p) {
  if (p.size() != params_.size()) {
    throw ShapeError(to_string(kind()) + ": expected " + std::to_string(params_.size()) +
                     " parameters, got " + std::to_string(p.size()));
  }
  params_ = p;
  sync();
}

void Module::check_input(const Vec& x) const {
  if (x.size() != in_dim()) {
    throw ShapeError(to_string(kind()) + ": input dimension " + std::to_string(x.size()) +
                     " does not match " + std::to_string(in_dim()));
  }
}

void Module::check_output_cotangent(const Vec& ybar) const {
  if (ybar.size() != out_dim()) {
    throw ShapeError(to_string(kind()) + ": cotangent dimension " + std::to_string(ybar.size()) +
                     " does not match " + std::to_string(out_dim()));
  }
}

std::unique_ptr<Module> make_module(const ModuleSpec& spec) {
  switch (spec.kind) {
    case ModuleKind::Linear:
      return std::make_unique<LinearModule>(spec.index_at("half_dim"), spec.index_at("sublayers"),
                                            orientation_from_string(spec.at("orientation")));
    case ModuleKind::Activation:
      return std::make_unique<ActivationModule>(spec.index_at("half_dim"),
                                                orientation_from_string(spec.at("orientation")),
                                                activation_from_string(spec.at("sigma")));
    case ModuleKind::ConvLift:
    case ModuleKind::ConvProj: {
      ConvGeometry g;
      g.spatial_dims = static_cast<int>(spec.index_at("spatial_dims"));
      g.n1 = spec.index_at("n1");
      g.n2 = spec.index_at("n2");
      g.l1 = spec.index_at("l1");
      g.l2 = spec.index_at("l2");
      const Index c_in = spec.index_at("c_in");
      const Index c_out = spec.index_at("c_out");
      const Orientation o = orientation_from_string(spec.at("orientation"));
      if (spec.kind == ModuleKind::ConvLift) return std::make_unique<ConvLift>(g, c_in, c_out, o);
      return std::make_unique<ConvProj>(g, c_in, c_out, o);
    }
    case ModuleKind::PsdReduce:
      return std::make_unique<PsdModule>(spec.index_at("n"), spec.index_at("k"), PsdDirection::Reduce);
    case ModuleKind::PsdLift:
      return std::make_unique<PsdModule>(spec.index_at("n"), spec.index_at("k"), PsdDirection::Lift);
    case ModuleKind::Pool:
      return std::make_unique<PoolModule>(spec.index_at("channel_len"), spec.index_at("kernel"),
                                          pool_source_from_string(spec.at("source")));
    case ModuleKind::Unpool:
      return std::make_unique<UnpoolModule>(spec.index_at("channel_len"), spec.index_at("kernel"),
                                            pool_source_from_string(spec.at("source")));
  }
  throw ConfigError("unsupported layer kind");
}

}  // namespace sympcae
