#pragma once

#include <cstdint>
#include <random>

#include "autobayes/open_model.hpp"

namespace autobayes {

// Platform-independent draws from a seeded mt19937_64.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t bits() { return gen_(); }
  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform on {lo, ..., hi}.
  std::size_t index(std::size_t lo, std::size_t hi) {
    return lo + static_cast<std::size_t>(gen_() % (hi - lo + 1));
  }
  double normal();
  bool coin(double p = 0.5) { return uniform() < p; }

 private:
  std::mt19937_64 gen_;
};

// Weights drawn from [floor, 1) then normalized; floor > 0 gives full support.
Measure random_measure(Rng& rng, const FiniteSpace& space, double floor = 0.05);
// A markov kernel; with sparsity > 0 each entry is zeroed with that
// probability (one entry per row always survives).
Kernel random_kernel(Rng& rng, const FiniteSpace& domain, const FiniteSpace& codomain,
                     double sparsity = 0.0);
// Markov open model with the given boundaries and latent.
OpenModel random_model(Rng& rng, const FiniteSpace& unobserved, const FiniteSpace& latent,
                       const FiniteSpace& observed, double sparsity = 0.0);
// A single-atom space with 1..max_points points (at least min_points).
FiniteSpace random_space(Rng& rng, const std::string& label, std::size_t min_points,
                         std::size_t max_points);

}  // namespace autobayes
