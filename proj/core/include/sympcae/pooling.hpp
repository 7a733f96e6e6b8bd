#pragma once

#include <optional>

#include "sympcae/module.hpp"

namespace sympcae {

// Channel whose window maxima define the frozen index map.
enum class PoolSource { Up, Low };

std::string to_string(PoolSource s);
PoolSource pool_source_from_string(const std::string& s);

struct PoolState {
  Index kernel = 1;
  Index channel_len = 0;
  PoolSource source = PoolSource::Up;
  // index_map[i] is the 0-based position kept from window i.
  std::vector<Index> index_map;

  Index pooled_len() const { return channel_len / kernel; }
  void validate() const;
  // Selection matrix Phi with Phi(i, index_map[i]) = 1.
  Mat phi() const;
};

// Freezes the argmax of every length-k window of the source channel of a
// 2-channel reference state. Ties go to the leftmost position.
PoolState pool_freeze(const Vec& reference, Index kernel, PoolSource source);

// Gathers both channels at the frozen positions: R^{2N} -> R^{2N/k}.
class PoolModule final : public Module {
 public:
  PoolModule(Index channel_len, Index kernel, PoolSource source);

  ModuleKind kind() const override { return ModuleKind::Pool; }
  Index in_dim() const override { return 2 * n_; }
  Index out_dim() const override { return 2 * (n_ / k_); }

  Vec forward(const Vec& x) const override;
  Vec jvp(const Vec& x, const Vec& dx, const Vec& dtheta) const override;
  Vec vjp(const Vec& x, const Vec& ybar, Vec* theta_bar) const override;

  ModuleSpec spec() const override;
  std::unique_ptr<Module> clone() const override { return std::make_unique<PoolModule>(*this); }

  Index channel_len() const { return n_; }
  Index kernel() const { return k_; }
  PoolSource source() const { return source_; }
  bool frozen() const { return state_.has_value(); }
  const PoolState& state() const;
  void set_state(const PoolState& s);

 private:
  Index n_;
  Index k_;
  PoolSource source_;
  std::optional<PoolState> state_;
};

// Scatters a pooled state back to the frozen positions, zeros elsewhere.
class UnpoolModule final : public Module {
 public:
  UnpoolModule(Index channel_len, Index kernel, PoolSource source);

  ModuleKind kind() const override { return ModuleKind::Unpool; }
  Index in_dim() const override { return 2 * (n_ / k_); }
  Index out_dim() const override { return 2 * n_; }

  Vec forward(const Vec& x) const override;
  Vec jvp(const Vec& x, const Vec& dx, const Vec& dtheta) const override;
  Vec vjp(const Vec& x, const Vec& ybar, Vec* theta_bar) const override;

  ModuleSpec spec() const override;
  std::unique_ptr<Module> clone() const override { return std::make_unique<UnpoolModule>(*this); }

  Index channel_len() const { return n_; }
  Index kernel() const { return k_; }
  PoolSource source() const { return source_; }
  bool frozen() const { return state_.has_value(); }
  const PoolState& state() const;
  void set_state(const PoolState& s);

 private:
  Index n_;
  Index k_;
  PoolSource source_;
  std::optional<PoolState> state_;
};

}  // namespace sympcae
