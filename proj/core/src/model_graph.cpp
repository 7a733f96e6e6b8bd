#include "sympcae/model_graph.hpp"

#include <string>

#include "sympcae/pooling.hpp"

namespace sympcae {

std::string to_string(GraphRole r) {
  switch (r) {
    case GraphRole::Encoder: return "encoder";
    case GraphRole::Decoder: return "decoder";
    case GraphRole::SympNet: return "sympnet";
    case GraphRole::Free: return "free";
  }
  return "free";
}

GraphRole graph_role_from_string(const std::string& s) {
  for (auto r : {GraphRole::Encoder, GraphRole::Decoder, GraphRole::SympNet, GraphRole::Free}) {
    if (to_string(r) == s) return r;
  }
  throw ConfigError("unknown graph role '" + s + "'");
}

ModelGraph::ModelGraph(const ModelGraph& other) : role_(other.role_), validated_(other.validated_) {
  layers_.reserve(other.layers_.size());
  for (const auto& m : other.layers_) layers_.push_back(m->clone());
}

ModelGraph& ModelGraph::operator=(const ModelGraph& other) {
  if (this != &other) {
    ModelGraph tmp(other);
    *this = std::move(tmp);
  }
  return *this;
}

void ModelGraph::add(std::unique_ptr<Module> m) {
  if (!m) throw StateError("cannot add an empty module");
  layers_.push_back(std::move(m));
  validated_ = false;
}

namespace {

bool is_body(ModuleKind k) {
  return k == ModuleKind::ConvLift || k == ModuleKind::ConvProj || k == ModuleKind::Linear ||
         k == ModuleKind::Activation;
}

[[noreturn]] void order_error(GraphRole role, Index i, ModuleKind k, const char* why) {
  throw ConfigError(to_string(role) + " layer " + std::to_string(i) + " (" + to_string(k) + "): " + why);
}

}  // namespace

void ModelGraph::validate() {
  if (layers_.empty()) throw ConfigError(to_string(role_) + " graph has no layers");
  for (std::size_t i = 1; i < layers_.size(); ++i) {
    if (layers_[i - 1]->out_dim() != layers_[i]->in_dim()) {
      throw ShapeError(to_string(role_) + ": layer " + std::to_string(i - 1) + " emits " +
                       std::to_string(layers_[i - 1]->out_dim()) + " values but layer " + std::to_string(i) +
                       " expects " + std::to_string(layers_[i]->in_dim()));
    }
  }
  // Stage 0: body, 1: pooling seen, 2: PSD seen.
  int stage = 0;
  for (Index i = 0; i < size(); ++i) {
    const ModuleKind k = layer(i).kind();
    switch (role_) {
      case GraphRole::Free:
        break;
      case GraphRole::SympNet:
        if (k != ModuleKind::Linear && k != ModuleKind::Activation) order_error(role_, i, k, "only linear and activation modules allowed");
        break;
      case GraphRole::Encoder:
        if (k == ModuleKind::Unpool || k == ModuleKind::PsdLift) order_error(role_, i, k, "decoder-only module");
        if (is_body(k)) {
          if (stage > 0) order_error(role_, i, k, "body layers must precede pooling and PSD");
        } else if (k == ModuleKind::Pool) {
          if (stage > 0) order_error(role_, i, k, "pooling must directly follow the body");
          stage = 1;
        } else if (k == ModuleKind::PsdReduce) {
          if (stage == 2) order_error(role_, i, k, "only one PSD layer allowed");
          stage = 2;
        }
        break;
      case GraphRole::Decoder:
        if (k == ModuleKind::Pool || k == ModuleKind::PsdReduce) order_error(role_, i, k, "encoder-only module");
        if (k == ModuleKind::PsdLift) {
          if (i != 0) order_error(role_, i, k, "PSD lift must come first");
          stage = 1;
        } else if (k == ModuleKind::Unpool) {
          if (stage == 2) order_error(role_, i, k, "unpooling must precede the body");
          stage = 2;
        } else {
          stage = 2;
        }
        break;
    }
  }
  validated_ = true;
}

void ModelGraph::require_validated() const {
  if (!validated_) throw StateError(to_string(role_) + " graph used before validation");
}

Index ModelGraph::in_dim() const {
  if (layers_.empty()) throw StateError("empty graph has no input dimension");
  return layers_.front()->in_dim();
}

Index ModelGraph::out_dim() const {
  if (layers_.empty()) throw StateError("empty graph has no output dimension");
  return layers_.back()->out_dim();
}

Index ModelGraph::num_params() const {
  Index n = 0;
  for (const auto& m : layers_) n += m->num_params();
  return n;
}

Vec ModelGraph::params() const {
  Vec theta(num_params());
  Index off = 0;
  for (const auto& m : layers_) {
    theta.segment(off, m->num_params()) = m->params();
    off += m->num_params();
  }
  return theta;
}

void ModelGraph::set_params(const Vec& theta) {
  if (theta.size() != num_params()) {
    throw ShapeError(to_string(role_) + ": expected " + std::to_string(num_params()) + " parameters, got " +
                     std::to_string(theta.size()));
  }
  Index off = 0;
  for (auto& m : layers_) {
    if (m->num_params() > 0) m->set_params(theta.segment(off, m->num_params()));
    off += m->num_params();
  }
}

Index ModelGraph::param_offset(Index i) const {
  Index off = 0;
  for (Index j = 0; j < i; ++j) off += layer(j).num_params();
  return off;
}

std::vector<ParamTensor> ModelGraph::param_tensors() const {
  std::vector<ParamTensor> out;
  Index off = 0;
  for (Index i = 0; i < size(); ++i) {
    for (const auto& t : layer(i).tensors()) {
      out.push_back({"L" + std::to_string(i) + "." + t.name, off + t.offset, t.size});
    }
    off += layer(i).num_params();
  }
  return out;
}

Vec ModelGraph::forward(const Vec& x) const {
  require_validated();
  Vec z = x;
  for (const auto& m : layers_) z = m->forward(z);
  return z;
}

Vec ModelGraph::forward(const Vec& x, Tape& tape) const {
  require_validated();
  tape.inputs.clear();
  tape.inputs.reserve(layers_.size());
  Vec z = x;
  for (const auto& m : layers_) {
    tape.inputs.push_back(z);
    z = m->forward(z);
  }
  tape.output = z;
  return z;
}

Vec ModelGraph::backward(const Tape& tape, const Vec& ybar, Vec* theta_bar) const {
  require_validated();
  if (tape.inputs.size() != layers_.size()) throw StateError("tape does not belong to this graph");
  if (theta_bar && theta_bar->size() != num_params()) throw ShapeError("parameter cotangent has the wrong size");
  Vec g = ybar;
  Index off = num_params();
  for (Index i = size() - 1; i >= 0; --i) {
    const Module& m = layer(i);
    off -= m.num_params();
    const Vec& x = tape.inputs[static_cast<std::size_t>(i)];
    if (theta_bar && m.num_params() > 0) {
      Vec local = Vec::Zero(m.num_params());
      g = m.vjp(x, g, &local);
      theta_bar->segment(off, m.num_params()) += local;
    } else {
      g = m.vjp(x, g, nullptr);
    }
  }
  return g;
}

Vec ModelGraph::jvp(const Vec& x, const Vec& dx) const {
  require_validated();
  Vec z = x;
  Vec dz = dx;
  const Vec none;
  for (const auto& m : layers_) {
    dz = m->jvp(z, dz, none);
    z = m->forward(z);
  }
  return dz;
}

Mat ModelGraph::jacobian(const Vec& x) const {
  require_validated();
  const Index n = in_dim();
  Mat J(out_dim(), n);
  Vec e = Vec::Zero(n);
  for (Index j = 0; j < n; ++j) {
    e[j] = 1.0;
    J.col(j) = jvp(x, e);
    e[j] = 0.0;
  }
  return J;
}

void Autoencoder::freeze_pooling(const Vec& reference) {
  std::vector<PoolState> states;
  Vec z = reference;
  for (Index i = 0; i < encoder.size(); ++i) {
    Module& m = encoder.layer(i);
    if (m.kind() == ModuleKind::Pool) {
      auto& pool = static_cast<PoolModule&>(m);
      PoolState s = pool_freeze(z, pool.kernel(), pool.source());
      pool.set_state(s);
      states.push_back(s);
    }
    z = m.forward(z);
  }
  std::size_t next = states.size();
  for (Index i = 0; i < decoder.size(); ++i) {
    Module& m = decoder.layer(i);
    if (m.kind() != ModuleKind::Unpool) continue;
    if (next == 0) throw ConfigError("decoder has more unpooling layers than the encoder has pooling layers");
    static_cast<UnpoolModule&>(m).set_state(states[--next]);
  }
  if (next != 0) throw ConfigError("encoder pooling layers have no matching decoder unpooling layers");
}

bool Autoencoder::pooling_frozen() const {
  for (const ModelGraph* g : {&encoder, &decoder}) {
    for (Index i = 0; i < g->size(); ++i) {
      const Module& m = g->layer(i);
      if (m.kind() == ModuleKind::Pool && !static_cast<const PoolModule&>(m).frozen()) return false;
      if (m.kind() == ModuleKind::Unpool && !static_cast<const UnpoolModule&>(m).frozen()) return false;
    }
  }
  return true;
}

Vec Autoencoder::params() const {
  Vec theta(num_params());
  theta << encoder.params(), decoder.params();
  return theta;
}

void Autoencoder::set_params(const Vec& theta) {
  if (theta.size() != num_params()) throw ShapeError("autoencoder: parameter vector has the wrong size");
  encoder.set_params(theta.head(encoder.num_params()));
  decoder.set_params(theta.tail(decoder.num_params()));
}

std::vector<ParamTensor> Autoencoder::param_tensors() const {
  std::vector<ParamTensor> out;
  for (auto t : encoder.param_tensors()) {
    t.name = "enc." + t.name;
    out.push_back(t);
  }
  for (auto t : decoder.param_tensors()) {
    t.name = "dec." + t.name;
    t.offset += encoder.num_params();
    out.push_back(t);
  }
  return out;
}

}  // namespace sympcae
