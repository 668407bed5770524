#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>

#include "autobayes/game.hpp"

namespace autobayes {

// Finite-difference step for every numeric gradient.
inline constexpr double kFdStep = 1e-5;

// A contiguous block of logits parameterizing a categorical distribution.
struct SoftmaxBlock {
  std::size_t offset = 0;
  std::size_t size = 0;
  // Optional closed-form M-step: expected category counts under one inversion
  // row of the full game (a measure on X * L).
  std::function<std::vector<double>(const Measure& posterior_row)> expected_counts;
};

class ParamSpace {
 public:
  ParamSpace() = default;

  std::size_t dimension() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::vector<std::optional<std::pair<double, double>>>& bounds() const { return bounds_; }
  const std::vector<SoftmaxBlock>& softmax_blocks() const { return blocks_; }
  std::vector<SoftmaxBlock>& softmax_blocks() { return blocks_; }

  // Throws InvalidArgument on a duplicate label or an empty bound interval.
  ParamSpace& add(std::string label, std::optional<std::pair<double, double>> bound = {});
  // Logits prefix[0..n) forming one softmax block.
  ParamSpace& add_softmax(const std::string& prefix, std::size_t n);

  // Coordinates of a then b; colliding labels of b get a numeric suffix.
  static ParamSpace concat(const ParamSpace& a, const ParamSpace& b);

  std::vector<double> clamp(std::span<const double> theta) const;

 private:
  std::vector<std::string> labels_;
  std::vector<std::optional<std::pair<double, double>>> bounds_;
  std::vector<SoftmaxBlock> blocks_;
};

struct ParameterizedGame {
  using Build = std::function<StatisticalGame(std::span<const double> theta)>;
  using Gradient = std::function<std::vector<double>(std::span<const double> theta,
                                                     const Measure& prior, std::size_t obs)>;

  ParamSpace params;
  FiniteSpace unobserved;
  FiniteSpace observed;
  Build build;
  Gradient analytic_gradient;  // optional

  // Builds and checks the dimension and the boundaries.
  StatisticalGame at(std::span<const double> theta) const;
};

// A game with no parameters.
ParameterizedGame constant_pgame(const StatisticalGame& g);

// Parameters ordered (Phi, Theta).
ParameterizedGame pgame_seq_compose(const ParameterizedGame& d, const ParameterizedGame& c);
ParameterizedGame pgame_tensor(const ParameterizedGame& c, const ParameterizedGame& d);

double eval_loss(const ParameterizedGame& g, std::span<const double> theta, const Measure& prior,
                 std::size_t obs);
double mean_loss(const ParameterizedGame& g, std::span<const double> theta, const Measure& prior,
                 std::span<const std::size_t> data);

// Central differences with step kFdStep of any scalar function.
// Throws NonFiniteLoss when a stencil value is not finite.
std::vector<double> fd_gradient(const std::function<double(std::span<const double>)>& f,
                                std::span<const double> theta);
std::vector<double> grad_fd(const ParameterizedGame& g, std::span<const double> theta,
                            const Measure& prior, std::size_t obs);
// Analytic gradient when the game provides one, else grad_fd.
std::vector<double> gradient(const ParameterizedGame& g, std::span<const double> theta,
                             const Measure& prior, std::size_t obs);
std::vector<double> mean_gradient(const ParameterizedGame& g, std::span<const double> theta,
                                  const Measure& prior, std::span<const std::size_t> data);

// (grad_phi F^d(c(theta)_* pi, z; phi), E_{(y,b) ~ d'}[grad_theta F^c(pi, y; theta)]).
std::vector<double> composed_gradient(const ParameterizedGame& d, const ParameterizedGame& c,
                                      std::span<const double> phi, std::span<const double> theta,
                                      const Measure& prior, std::size_t obs);

struct GradientReport {
  std::vector<double> point;
  std::vector<double> full_gradient;
  std::vector<double> composed_gradient;
  std::vector<double> laxness;
  // FD derivative of phi -> E_{(y,b) ~ d'(phi)}[F^c(pi, y; theta)], and its
  // largest deviation from the Phi-block of the laxness.
  std::vector<double> phi_laxness_oracle;
  double phi_laxness_residual = 0.0;
  bool phi_laxness_ok = false;
};

inline constexpr double kTolLaxness = 2e-4;

GradientReport laxness_report(const ParameterizedGame& d, const ParameterizedGame& c,
                              std::span<const double> phi, std::span<const double> theta,
                              const Measure& prior, std::size_t obs);

}  // namespace autobayes
