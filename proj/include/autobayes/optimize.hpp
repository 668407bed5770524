#pragma once

#include "autobayes/param.hpp"

namespace autobayes {

inline constexpr int kMaxHalvings = 30;
inline constexpr double kDivergenceFactor = 50.0;
inline constexpr double kFisherDamping = 1e-8;

struct Trajectory {
  std::vector<std::vector<double>> thetas;  // steps + 1 entries
  std::vector<double> losses;               // mean loss at each theta
};

// Plain gradient descent on the mean loss over data. A step that does not
// lower the loss is halved up to kMaxHalvings times; if none succeeds the
// iterate stays put. Throws Diverged when the loss exceeds kDivergenceFactor
// times its initial value or stops being a number.
Trajectory gd_train(const ParameterizedGame& g, const Measure& prior,
                    std::span<const std::size_t> data, std::span<const double> theta0, double lr,
                    int steps, bool backtrack = true);

// (F + damping)^+ grad for a softmax Fisher block (row-major n x n).
std::vector<double> natural_direction(std::span<const double> fisher, std::span<const double> grad,
                                      double damping = kFisherDamping);

// theta - lr * F^+ grad on every declared softmax block, plain gradient on the
// remaining coordinates. Throws InvalidArgument when no softmax block exists.
std::vector<double> natural_gradient_step(const ParameterizedGame& g,
                                          std::span<const double> theta, const Measure& prior,
                                          std::span<const std::size_t> data, double lr);
std::vector<double> natural_gradient_step(const ParameterizedGame& g,
                                          std::span<const double> theta, const Measure& prior,
                                          std::size_t obs, double lr);

// Runs natural-gradient steps with the same backtracking and guard as gd_train.
Trajectory ngd_train(const ParameterizedGame& g, const Measure& prior,
                     std::span<const std::size_t> data, std::span<const double> theta0, double lr,
                     int steps);

struct EmTrajectory {
  std::vector<std::vector<double>> thetas;
  std::vector<double> free_energies;    // mean F at each theta
  std::vector<double> log_likelihoods;  // sum_i log p(y_i) at each theta
};

struct EmOptions {
  int inner_steps = 100;
  double inner_lr = 0.5;
};

// The game's lens must be the exact inversion at the current parameters.
// E-step: freeze the inversion rows at theta_t. M-step: softmax blocks with
// expected counts jump to log of the normalized counts; every other
// coordinate takes inner backtracking gradient steps on the expected energy.
// Throws OutOfSupport when a datum has no support at the E-step.
EmTrajectory em_loop(const ParameterizedGame& g, const Measure& prior,
                     std::span<const std::size_t> data, std::span<const double> theta0, int steps,
                     EmOptions options = {});

}  // namespace autobayes
