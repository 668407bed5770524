#include "autobayes/random_models.hpp"

#include <cmath>
#include <numbers>

namespace autobayes {

double Rng::normal() {
  double u = uniform();
  while (u <= 0.0) u = uniform();
  const double v = uniform();
  return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * std::numbers::pi * v);
}

Measure random_measure(Rng& rng, const FiniteSpace& space, double floor) {
  std::vector<double> w(space.size());
  double total = 0.0;
  for (auto& v : w) total += v = rng.uniform(floor, 1.0);
  if (!(total > 0.0)) {
    w.assign(w.size(), 1.0);
    total = static_cast<double>(w.size());
  }
  for (auto& v : w) v /= total;
  return Measure(space, std::move(w));
}

Kernel random_kernel(Rng& rng, const FiniteSpace& domain, const FiniteSpace& codomain,
                     double sparsity) {
  const auto n = codomain.size();
  std::vector<double> w;
  w.reserve(domain.size() * n);
  for (std::size_t x = 0; x < domain.size(); ++x) {
    std::vector<double> row(n);
    const std::size_t keep = rng.index(0, n - 1);
    double total = 0.0;
    for (std::size_t y = 0; y < n; ++y) {
      const bool zero = y != keep && sparsity > 0.0 && rng.coin(sparsity);
      row[y] = zero ? 0.0 : rng.uniform(0.05, 1.0);
      total += row[y];
    }
    for (auto& v : row) v /= total;
    w.insert(w.end(), row.begin(), row.end());
  }
  return Kernel(domain, codomain, std::move(w));
}

OpenModel random_model(Rng& rng, const FiniteSpace& unobserved, const FiniteSpace& latent,
                       const FiniteSpace& observed, double sparsity) {
  return OpenModel(unobserved, latent, observed,
                   random_kernel(rng, unobserved, FiniteSpace::product(latent, observed), sparsity));
}

FiniteSpace random_space(Rng& rng, const std::string& label, std::size_t min_points,
                         std::size_t max_points) {
  return FiniteSpace::indexed(label, rng.index(min_points, max_points));
}

}  // namespace autobayes
