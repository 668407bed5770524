#include "autobayes/optimize.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <set>

#include "autobayes/errors.hpp"
#include "autobayes/families.hpp"

namespace autobayes {

namespace {

using Direction = std::function<std::vector<double>(std::span<const double> theta)>;

void check_guard(double loss, double initial) {
  if (std::isnan(loss)) throw Diverged("loss became NaN");
  if (loss > initial && loss - initial > (kDivergenceFactor - 1.0) * std::abs(initial)) {
    throw Diverged("loss grew more than " + std::to_string(kDivergenceFactor) +
                   "x over its initial value");
  }
}

Trajectory descend(const ParameterizedGame& g, const Measure& prior,
                   std::span<const std::size_t> data, std::span<const double> theta0, double lr,
                   int steps, bool backtrack, const Direction& direction) {
  if (steps < 1) throw InvalidArgument("steps must be at least 1");
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw InvalidArgument("learning rate must be >= 0");
  std::vector<double> theta = g.params.clamp(theta0);
  double loss = mean_loss(g, theta, prior, data);
  const double initial = loss;
  Trajectory t;
  t.thetas.push_back(theta);
  t.losses.push_back(loss);
  for (int s = 0; s < steps; ++s) {
    if (lr > 0.0) {
      const auto dir = direction(theta);
      double step = lr;
      for (int h = 0; h <= kMaxHalvings; ++h, step *= 0.5) {
        std::vector<double> cand(theta.size());
        for (std::size_t i = 0; i < cand.size(); ++i) cand[i] = theta[i] - step * dir[i];
        cand = g.params.clamp(cand);
        double cl;
        try {
          cl = mean_loss(g, cand, prior, data);
        } catch (const OutOfSupport&) {
          cl = kInf;
        }
        if (!backtrack) {
          theta = std::move(cand);
          loss = cl;
          break;
        }
        if (cl <= loss) {
          theta = std::move(cand);
          loss = cl;
          break;
        }
      }
      check_guard(loss, initial);
    }
    t.thetas.push_back(theta);
    t.losses.push_back(loss);
  }
  return t;
}

std::vector<double> natural_from_gradient(const ParameterizedGame& g,
                                          std::span<const double> theta,
                                          std::vector<double> grad) {
  const auto& blocks = g.params.softmax_blocks();
  if (blocks.empty()) {
    throw InvalidArgument("natural gradient needs a declared softmax parameter block");
  }
  for (const auto& b : blocks) {
    const auto p = softmax(theta.subspan(b.offset, b.size));
    const auto fisher = softmax_fisher(p);
    const auto nat = natural_direction(
        fisher, std::span<const double>(grad).subspan(b.offset, b.size));
    std::copy(nat.begin(), nat.end(), grad.begin() + static_cast<std::ptrdiff_t>(b.offset));
  }
  return grad;
}

}  // namespace

Trajectory gd_train(const ParameterizedGame& g, const Measure& prior,
                    std::span<const std::size_t> data, std::span<const double> theta0, double lr,
                    int steps, bool backtrack) {
  return descend(g, prior, data, theta0, lr, steps, backtrack,
                 [&](std::span<const double> th) { return mean_gradient(g, th, prior, data); });
}

std::vector<double> natural_direction(std::span<const double> fisher, std::span<const double> grad,
                                      double damping) {
  const auto n = static_cast<Eigen::Index>(grad.size());
  if (static_cast<std::size_t>(n * n) != fisher.size()) {
    throw InvalidArgument("Fisher block does not match the gradient");
  }
  Eigen::MatrixXd f(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) f(i, j) = fisher[static_cast<std::size_t>(i * n + j)];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(f);
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  const double cutoff = 1e-12 * std::max(1.0, lambda.cwiseAbs().maxCoeff());
  Eigen::VectorXd inv(n);
  for (Eigen::Index i = 0; i < n; ++i) inv(i) = lambda(i) > cutoff ? 1.0 / (lambda(i) + damping) : 0.0;
  Eigen::VectorXd gv(n);
  for (Eigen::Index i = 0; i < n; ++i) gv(i) = grad[static_cast<std::size_t>(i)];
  const Eigen::MatrixXd& v = eig.eigenvectors();
  Eigen::VectorXd out = v * inv.asDiagonal() * (v.transpose() * gv);
  return std::vector<double>(out.data(), out.data() + n);
}

std::vector<double> natural_gradient_step(const ParameterizedGame& g,
                                          std::span<const double> theta, const Measure& prior,
                                          std::span<const std::size_t> data, double lr) {
  if (g.params.softmax_blocks().empty()) {
    throw InvalidArgument("natural gradient needs a declared softmax parameter block");
  }
  auto dir = natural_from_gradient(g, theta, mean_gradient(g, theta, prior, data));
  std::vector<double> out(theta.begin(), theta.end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= lr * dir[i];
  return g.params.clamp(out);
}

std::vector<double> natural_gradient_step(const ParameterizedGame& g,
                                          std::span<const double> theta, const Measure& prior,
                                          std::size_t obs, double lr) {
  const std::size_t data[] = {obs};
  return natural_gradient_step(g, theta, prior, data, lr);
}

Trajectory ngd_train(const ParameterizedGame& g, const Measure& prior,
                     std::span<const std::size_t> data, std::span<const double> theta0, double lr,
                     int steps) {
  if (g.params.softmax_blocks().empty()) {
    throw InvalidArgument("natural gradient needs a declared softmax parameter block");
  }
  return descend(g, prior, data, theta0, lr, steps, true, [&](std::span<const double> th) {
    return natural_from_gradient(g, th, mean_gradient(g, th, prior, data));
  });
}

EmTrajectory em_loop(const ParameterizedGame& g, const Measure& prior,
                     std::span<const std::size_t> data, std::span<const double> theta0, int steps,
                     EmOptions options) {
  if (steps < 0) throw InvalidArgument("steps must be nonnegative");
  if (data.empty()) throw InvalidArgument("empty dataset");
  std::vector<double> theta = g.params.clamp(theta0);
  EmTrajectory t;

  std::set<std::size_t> closed_form;
  for (const auto& b : g.params.softmax_blocks()) {
    if (!b.expected_counts) continue;
    for (std::size_t i = 0; i < b.size; ++i) closed_form.insert(b.offset + i);
  }
  std::vector<std::size_t> free_coords;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    if (!closed_form.count(i)) free_coords.push_back(i);
  }

  for (int s = 0;; ++s) {
    const StatisticalGame game = g.at(theta);
    std::vector<Measure> rows;
    double fe = 0.0, ll = 0.0;
    for (auto y : data) {
      if (!game.lens.in_support(prior, y)) {
        throw OutOfSupport("E-step: observation " + game.observed().point_label(y) +
                           " has empty support");
      }
      rows.push_back(game.lens.apply(prior, y));
      fe += free_energy(game, prior, y);
      ll += std::log(game.lens.model().pushforward(prior)[y]);
    }
    t.thetas.push_back(theta);
    t.free_energies.push_back(fe / static_cast<double>(data.size()));
    t.log_likelihoods.push_back(ll);
    if (s == steps) break;

    for (const auto& b : g.params.softmax_blocks()) {
      if (!b.expected_counts) continue;
      std::vector<double> counts(b.size, 0.0);
      for (const auto& r : rows) {
        const auto c = b.expected_counts(r);
        for (std::size_t i = 0; i < b.size; ++i) counts[i] += c.at(i);
      }
      double total = 0.0;
      for (double c : counts) total += c;
      for (std::size_t i = 0; i < b.size; ++i) {
        theta[b.offset + i] = std::log(std::max(counts[i] / total, 1e-300));
      }
    }

    if (free_coords.empty()) continue;
    auto expected_energy = [&](std::span<const double> th) {
      const StatisticalGame gm = g.at(th);
      double acc = 0.0;
      for (std::size_t i = 0; i < data.size(); ++i) {
        for (std::size_t xa = 0; xa < rows[i].size(); ++xa) {
          if (rows[i][xa] == 0.0) continue;
          acc += rows[i][xa] * gm.energy.at(xa, data[i]);
        }
      }
      return acc;
    };
    double q = expected_energy(theta);
    for (int k = 0; k < options.inner_steps; ++k) {
      auto full = fd_gradient(expected_energy, theta);
      double step = options.inner_lr;
      bool moved = false;
      for (int h = 0; h <= kMaxHalvings; ++h, step *= 0.5) {
        std::vector<double> cand = theta;
        for (auto i : free_coords) cand[i] -= step * full[i];
        cand = g.params.clamp(cand);
        const double cq = expected_energy(cand);
        if (cq <= q) {
          moved = cq < q;
          theta = std::move(cand);
          q = cq;
          break;
        }
      }
      if (!moved) break;
    }
  }
  return t;
}

}  // namespace autobayes
