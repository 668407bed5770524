#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "autobayes/optimize.hpp"

namespace autobayes {

struct ScenarioSpec {
  std::string name = "gmm";
  std::size_t components = 2;  // M
  std::size_t grid_size = 32;  // |Y| for the Gaussian scenarios
  double lo = -4.0;
  double hi = 4.0;
  std::vector<double> means;    // per component; empty spreads them over the grid
  std::vector<double> stddevs;  // per component; empty means 0.75
  std::vector<double> mixing;   // fixed mixing for vbem; empty means uniform
  std::vector<std::size_t> data;  // observed grid indices; empty draws 24 points
  std::uint64_t seed = 0;
  bool learn_means = false;          // em: also learn component means
  std::size_t model_space_size = 3;  // |Theta| for vbem and the Bayes-DL toy
  double shift_scale = 1.0;          // vbem: Theta shifts the means by linspace(-s, s)
  bool shannon = false;              // vbem: Shannon instead of zero entropy
  std::size_t inputs = 3;            // supervised and Bayes-DL: |X|
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (x, y); empty draws 12
  bool mean_field = true;            // Bayes-DL: mean-field or exact inversion
};

struct Scenario {
  ParameterizedGame game;
  std::vector<double> theta0;
  Measure prior;                  // on game.unobserved
  std::vector<std::size_t> data;  // indices into game.observed
  std::vector<double> grid;       // Y grid for the Gaussian scenarios
};

// Throws InvalidArgument on malformed specs (grid < 2, M < 2, bad data).
Scenario build_gmm(const ScenarioSpec& spec);
Scenario build_em(const ScenarioSpec& spec);
Scenario build_vbem(const ScenarioSpec& spec);
Scenario build_supervised(const ScenarioSpec& spec);
Scenario build_bayes_dl_toy(const ScenarioSpec& spec);
// Dispatch on spec.name: gmm, em, vbem, supervised, bdl.
Scenario build_scenario(const ScenarioSpec& spec);

// Supervised game for any parameterized predictor X ~> Y: cup on X, then
// id_X @ c, exact inversion, -log-likelihood energy and zero entropy.
ParameterizedGame supervised_pgame(
    const ParamSpace& params, const FiniteSpace& inputs, const FiniteSpace& outputs,
    std::function<Kernel(std::span<const double> theta)> predictor);

// Softmax prior game 1 -> T with logits psi and energy -log softmax(psi).
ParameterizedGame softmax_prior_pgame(const FiniteSpace& space, const std::string& label);

// Gradient in psi of F for a softmax prior game on T composed before a fixed
// game whose composite lens is exact (rows proportional to psi_t w(z)):
// sum_{z: t(z)=k} q G - r_k <G>_q - r_k + s_k, with G = energy (+ log q when
// the entropy is Shannon).
std::vector<double> softmax_prior_gradient(const StatisticalGame& composite,
                                           std::span<const double> psi, std::size_t obs,
                                           bool shannon);

}  // namespace autobayes
