#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "sympcae/numcore.hpp"

namespace sympcae {

// Seeded generator whose derived distributions are spelled out here rather
// than taken from <random>, so streams match across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  // Uniform on [0, 1) with 53 random bits.
  double uniform01();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  double normal();
  // Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);

  Vec uniform_vec(Index n, double lo, double hi);
  Vec normal_vec(Index n);
  Mat normal_mat(Index rows, Index cols);

  // Fisher-Yates permutation of 0..n-1.
  std::vector<Index> permutation(Index n);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace sympcae
