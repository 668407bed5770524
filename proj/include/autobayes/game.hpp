#pragma once

#include <functional>
#include <string>

#include "autobayes/lens.hpp"

namespace autobayes {

// l(x, a, y) over X * L * Y with values in [0, inf].
class EnergyFn {
 public:
  EnergyFn(FiniteSpace unobserved, FiniteSpace latent, FiniteSpace observed,
           std::vector<double> table);

  static EnergyFn zero(const OpenModel& model);
  static EnergyFn constant(const OpenModel& model, double value);
  // -log w(a, y | x); +inf where the weight vanishes.
  static EnergyFn neg_log_likelihood(const OpenModel& model);

  const FiniteSpace& unobserved() const { return x_; }
  const FiniteSpace& latent() const { return l_; }
  const FiniteSpace& observed() const { return y_; }
  std::span<const double> table() const { return table_; }

  double operator()(std::size_t x, std::size_t a, std::size_t y) const {
    return table_[(x * l_.size() + a) * y_.size() + y];
  }
  // Index of (x, a) as a point of X * L.
  double at(std::size_t xa, std::size_t y) const { return table_[xa * y_.size() + y]; }

 private:
  FiniteSpace x_, l_, y_;
  std::vector<double> table_;
};

// H(pi, y) with values in [0, inf].
class EntropyFn {
 public:
  using Fn = std::function<double(const Measure& prior, std::size_t obs)>;

  EntropyFn(std::string name, Fn fn) : name_(std::move(name)), fn_(std::move(fn)) {}

  static EntropyFn zero();
  // Shannon entropy of the lens's own inversion row.
  static EntropyFn shannon_of_inversion(const BayesianLens& lens);

  const std::string& name() const { return name_; }
  double operator()(const Measure& prior, std::size_t obs) const { return fn_(prior, obs); }

 private:
  std::string name_;
  Fn fn_;
};

struct StatisticalGame {
  // Throws BoundaryMismatch when the energy table is not over X * L * Y of the lens.
  StatisticalGame(BayesianLens lens, EnergyFn energy, EntropyFn entropy);

  BayesianLens lens;
  EnergyFn energy;
  EntropyFn entropy;

  const FiniteSpace& unobserved() const { return lens.model().unobserved(); }
  const FiniteSpace& observed() const { return lens.model().observed(); }
};

// KL(c'_pi(y), exact posterior of the model at (pi, y)).
double kl_loss(const BayesianLens& lens, const Measure& prior, std::size_t obs);

// E_{c'_pi(y)}[l] - H(pi, y). Throws IndeterminateLoss for inf - inf.
double free_energy(const StatisticalGame& g, const Measure& prior, std::size_t obs);
// Both terms separately; the prior may be unnormalized (composite internals).
struct FreeEnergyParts {
  double energy;
  double entropy;
};
FreeEnergyParts free_energy_parts(const StatisticalGame& g, const Measure& prior, std::size_t obs);
double combine(const FreeEnergyParts& parts);

// KL(c', c-dagger)(pi, y) - log (c_Y . pi)(y).
double vfe(const BayesianLens& lens, const Measure& prior, std::size_t obs);

struct VfeForms {
  double definition;
  double relative;     // E[log q - log posterior] - log evidence
  double joint;        // E[log q - log c - log pi]
  double helmholtz;    // E[-log c - log pi] - H(q)
};
VfeForms vfe_forms(const BayesianLens& lens, const Measure& prior, std::size_t obs);

// Energies add; entropy H(pi, z) = E_{(y,b) ~ d'_{c_* pi}(z)}[H^c(pi, y)] + H^d(c_* pi, z).
StatisticalGame game_seq_compose(const StatisticalGame& d, const StatisticalGame& c);
// Energies add; entropies are evaluated on the marginals of the joint prior.
StatisticalGame game_tensor(const StatisticalGame& c, const StatisticalGame& d);

// A distribution 1 -o-> X with its trivial inversion (for joint priors, the
// exact posterior over the latent), energy -log p (or zero) and entropy zero.
// Throws InvalidArgument when the prior has no mass.
StatisticalGame prior_game(const OpenModel& prior, bool with_energy = true);
StatisticalGame identity_game(const FiniteSpace& space);
// Exact inversion, -log-likelihood energy, Shannon entropy: F = VFE after a prior game.
StatisticalGame vfe_game(const OpenModel& model);
StatisticalGame vfe_game(const BayesianLens& lens);

}  // namespace autobayes
