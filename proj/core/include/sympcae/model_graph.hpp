#pragma once

#include <memory>
#include <vector>

#include "sympcae/module.hpp"

namespace sympcae {

enum class GraphRole { Encoder, Decoder, SympNet, Free };

std::string to_string(GraphRole r);
GraphRole graph_role_from_string(const std::string& s);

// Range of one trainable tensor inside the flat parameter vector of a graph.
struct ParamTensor {
  std::string name;
  Index offset = 0;
  Index size = 0;
};

// Saved layer inputs of one forward pass, replayed in reverse by backward().
struct Tape {
  std::vector<Vec> inputs;
  Vec output;
};

// Ordered composition of modules. Copies are deep.
class ModelGraph {
 public:
  explicit ModelGraph(GraphRole role = GraphRole::Free) : role_(role) {}
  ModelGraph(const ModelGraph& other);
  ModelGraph& operator=(const ModelGraph& other);
  ModelGraph(ModelGraph&&) noexcept = default;
  ModelGraph& operator=(ModelGraph&&) noexcept = default;

  GraphRole role() const { return role_; }
  void add(std::unique_ptr<Module> m);
  Index size() const { return static_cast<Index>(layers_.size()); }
  bool empty() const { return layers_.empty(); }
  const Module& layer(Index i) const { return *layers_.at(static_cast<std::size_t>(i)); }
  Module& layer(Index i) { return *layers_.at(static_cast<std::size_t>(i)); }

  // Checks adjacent shapes and the role's layer ordering. Forward passes
  // refuse to run on a graph that has not been validated since its last edit.
  void validate();
  bool validated() const { return validated_; }

  Index in_dim() const;
  Index out_dim() const;

  Index num_params() const;
  Vec params() const;
  void set_params(const Vec& theta);
  // Offset of layer i's parameters inside params().
  Index param_offset(Index i) const;
  std::vector<ParamTensor> param_tensors() const;

  Vec forward(const Vec& x) const;
  Vec forward(const Vec& x, Tape& tape) const;
  // Input cotangent; accumulates the parameter cotangent when theta_bar is
  // non-null (sized num_params()).
  Vec backward(const Tape& tape, const Vec& ybar, Vec* theta_bar) const;
  Vec jvp(const Vec& x, const Vec& dx) const;
  // Dense input Jacobian assembled column by column from jvp.
  Mat jacobian(const Vec& x) const;

 private:
  void require_validated() const;

  GraphRole role_;
  std::vector<std::unique_ptr<Module>> layers_;
  bool validated_ = false;
};

struct Autoencoder {
  ModelGraph encoder{GraphRole::Encoder};
  ModelGraph decoder{GraphRole::Decoder};

  Vec encode(const Vec& x) const { return encoder.forward(x); }
  Vec decode(const Vec& z) const { return decoder.forward(z); }
  Vec reconstruct(const Vec& x) const { return decoder.forward(encoder.forward(x)); }

  // Runs the encoder on a reference state, freezing each pooling layer from
  // its own input, and hands the same index maps to the mirrored unpooling
  // layers of the decoder.
  void freeze_pooling(const Vec& reference);
  bool pooling_frozen() const;

  Index num_params() const { return encoder.num_params() + decoder.num_params(); }
  Vec params() const;
  void set_params(const Vec& theta);
  std::vector<ParamTensor> param_tensors() const;
};

}  // namespace sympcae
