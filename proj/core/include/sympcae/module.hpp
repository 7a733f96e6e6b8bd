#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "sympcae/numcore.hpp"

namespace sympcae {

enum class ModuleKind { Linear, Activation, ConvLift, ConvProj, PsdReduce, PsdLift, Pool, Unpool };

// Which shear block carries the parameters: up acts on q through p,
// low acts on p through q.
enum class Orientation { Up, Low };

std::string to_string(ModuleKind kind);
std::string to_string(Orientation o);
ModuleKind module_kind_from_string(const std::string& s);
Orientation orientation_from_string(const std::string& s);

// A named view into a module's flat parameter vector.
struct TensorSlot {
  std::string name;
  std::vector<Index> shape;
  Index offset = 0;
  Index size = 0;
};

// Textual descriptor sufficient to rebuild a module with zeroed parameters.
struct ModuleSpec {
  ModuleKind kind = ModuleKind::Linear;
  std::map<std::string, std::string> attrs;

  const std::string& at(const std::string& key) const;
  Index index_at(const std::string& key) const;
};

// One layer of a phase-space network. States are flat vectors whose first
// half holds positions q and second half momenta p (channel-major when the
// layer is convolutional).
class Module {
 public:
  virtual ~Module() = default;

  virtual ModuleKind kind() const = 0;
  virtual Index in_dim() const = 0;
  virtual Index out_dim() const = 0;

  virtual Vec forward(const Vec& x) const = 0;

  // Directional derivative along input tangent dx and parameter tangent
  // dtheta. An empty dtheta means no parameter perturbation.
  virtual Vec jvp(const Vec& x, const Vec& dx, const Vec& dtheta) const = 0;

  // Returns the input cotangent of ybar and, when theta_bar is non-null,
  // accumulates the parameter cotangent into it.
  virtual Vec vjp(const Vec& x, const Vec& ybar, Vec* theta_bar) const = 0;

  virtual ModuleSpec spec() const = 0;
  virtual std::unique_ptr<Module> clone() const = 0;
  virtual std::vector<TensorSlot> tensors() const { return {}; }

  Index num_params() const { return params_.size(); }
  const Vec& params() const { return params_; }
  void set_params(const Vec& p);

 protected:
  // Recompute derived state after the parameters change.
  virtual void sync() {}
  void check_input(const Vec& x) const;
  void check_output_cotangent(const Vec& ybar) const;

  Vec params_;
};

std::unique_ptr<Module> make_module(const ModuleSpec& spec);

}  // namespace sympcae
