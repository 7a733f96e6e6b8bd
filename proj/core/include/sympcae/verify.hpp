#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "sympcae/module.hpp"
#include "sympcae/random.hpp"

namespace sympcae {

struct CheckResult {
  std::string name;
  bool ok = false;
  // Worst residual or error seen by the check.
  double worst = 0.0;
  double tolerance = 0.0;
  double seconds = 0.0;
};

// Input Jacobian of one module assembled from jvp.
Mat module_jacobian(const Module& m, const Vec& x);

// One instance of every layer kind at small sizes with random parameters
// (pooling layers frozen on a random reference).
std::vector<std::unique_ptr<Module>> sample_modules(Rng& rng);

// Runs the self-check suite: layer symplecticity, convolution against its
// dense Toeplitz matrix, reverse-mode gradients against finite differences,
// pooling identities, integrator structure and checkpoint round trips.
std::vector<CheckResult> run_verify(std::uint64_t seed, std::ostream& log);

}  // namespace sympcae
