#include "autobayes/param.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "autobayes/errors.hpp"

namespace autobayes {

namespace {

std::vector<double> join(std::span<const double> a, std::span<const double> b) {
  std::vector<double> v(a.begin(), a.end());
  v.insert(v.end(), b.begin(), b.end());
  return v;
}

void check_dim(const ParamSpace& p, std::span<const double> theta) {
  if (theta.size() != p.dimension()) {
    throw InvalidArgument("parameter vector has " + std::to_string(theta.size()) +
                          " entries, expected " + std::to_string(p.dimension()));
  }
}

}  // namespace

ParamSpace& ParamSpace::add(std::string label, std::optional<std::pair<double, double>> bound) {
  if (std::find(labels_.begin(), labels_.end(), label) != labels_.end()) {
    throw InvalidArgument("duplicate parameter label '" + label + "'");
  }
  if (bound && !(bound->first <= bound->second)) {
    throw InvalidArgument("empty bound interval for parameter '" + label + "'");
  }
  labels_.push_back(std::move(label));
  bounds_.push_back(bound);
  return *this;
}

ParamSpace& ParamSpace::add_softmax(const std::string& prefix, std::size_t n) {
  if (n == 0) throw InvalidArgument("softmax block needs at least one logit");
  SoftmaxBlock block;
  block.offset = dimension();
  block.size = n;
  for (std::size_t i = 0; i < n; ++i) add(prefix + "[" + std::to_string(i) + "]");
  blocks_.push_back(std::move(block));
  return *this;
}

ParamSpace ParamSpace::concat(const ParamSpace& a, const ParamSpace& b) {
  ParamSpace out = a;
  for (std::size_t i = 0; i < b.dimension(); ++i) {
    std::string label = b.labels_[i];
    for (int k = 2; std::find(out.labels_.begin(), out.labels_.end(), label) != out.labels_.end();
         ++k) {
      label = b.labels_[i] + "#" + std::to_string(k);
    }
    out.labels_.push_back(std::move(label));
    out.bounds_.push_back(b.bounds_[i]);
  }
  for (auto block : b.blocks_) {
    block.offset += a.dimension();
    out.blocks_.push_back(std::move(block));
  }
  return out;
}

std::vector<double> ParamSpace::clamp(std::span<const double> theta) const {
  check_dim(*this, theta);
  std::vector<double> v(theta.begin(), theta.end());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (bounds_[i]) v[i] = std::clamp(v[i], bounds_[i]->first, bounds_[i]->second);
  }
  return v;
}

StatisticalGame ParameterizedGame::at(std::span<const double> theta) const {
  check_dim(params, theta);
  StatisticalGame g = build(theta);
  if (!(g.unobserved() == unobserved) || !(g.observed() == observed)) {
    throw BoundaryMismatch("parameterized game built " + g.unobserved().describe() + " -> " +
                           g.observed().describe() + ", declared " + unobserved.describe() +
                           " -> " + observed.describe());
  }
  return g;
}

ParameterizedGame constant_pgame(const StatisticalGame& g) {
  ParameterizedGame p;
  p.unobserved = g.unobserved();
  p.observed = g.observed();
  p.build = [g](std::span<const double>) { return g; };
  p.analytic_gradient = [](std::span<const double>, const Measure&, std::size_t) {
    return std::vector<double>{};
  };
  return p;
}

ParameterizedGame pgame_seq_compose(const ParameterizedGame& d, const ParameterizedGame& c) {
  if (!(c.observed == d.unobserved)) {
    throw BoundaryMismatch("cannot compose: " + c.observed.describe() + " does not match " +
                           d.unobserved.describe());
  }
  ParameterizedGame p;
  p.params = ParamSpace::concat(d.params, c.params);
  p.unobserved = c.unobserved;
  p.observed = d.observed;
  const auto nphi = d.params.dimension();
  p.build = [d, c, nphi](std::span<const double> v) {
    return game_seq_compose(d.at(v.first(nphi)), c.at(v.subspan(nphi)));
  };
  return p;
}

ParameterizedGame pgame_tensor(const ParameterizedGame& c, const ParameterizedGame& d) {
  ParameterizedGame p;
  p.params = ParamSpace::concat(c.params, d.params);
  p.unobserved = FiniteSpace::product(c.unobserved, d.unobserved);
  p.observed = FiniteSpace::product(c.observed, d.observed);
  const auto nc = c.params.dimension();
  p.build = [c, d, nc](std::span<const double> v) {
    return game_tensor(c.at(v.first(nc)), d.at(v.subspan(nc)));
  };
  return p;
}

double eval_loss(const ParameterizedGame& g, std::span<const double> theta, const Measure& prior,
                 std::size_t obs) {
  return free_energy(g.at(theta), prior, obs);
}

double mean_loss(const ParameterizedGame& g, std::span<const double> theta, const Measure& prior,
                 std::span<const std::size_t> data) {
  if (data.empty()) throw InvalidArgument("empty dataset");
  const StatisticalGame game = g.at(theta);
  double acc = 0.0;
  for (auto y : data) acc += free_energy(game, prior, y);
  return acc / static_cast<double>(data.size());
}

std::vector<double> fd_gradient(const std::function<double(std::span<const double>)>& f,
                                std::span<const double> theta) {
  std::vector<double> x(theta.begin(), theta.end());
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double x0 = x[i];
    x[i] = x0 + kFdStep;
    const double fp = f(x);
    x[i] = x0 - kFdStep;
    const double fm = f(x);
    x[i] = x0;
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw NonFiniteLoss("loss is not finite near coordinate " + std::to_string(i));
    }
    g[i] = (fp - fm) / (2.0 * kFdStep);
  }
  return g;
}

std::vector<double> grad_fd(const ParameterizedGame& g, std::span<const double> theta,
                            const Measure& prior, std::size_t obs) {
  check_dim(g.params, theta);
  return fd_gradient([&](std::span<const double> t) { return eval_loss(g, t, prior, obs); },
                     theta);
}

std::vector<double> gradient(const ParameterizedGame& g, std::span<const double> theta,
                             const Measure& prior, std::size_t obs) {
  if (g.analytic_gradient) {
    check_dim(g.params, theta);
    return g.analytic_gradient(theta, prior, obs);
  }
  return grad_fd(g, theta, prior, obs);
}

std::vector<double> mean_gradient(const ParameterizedGame& g, std::span<const double> theta,
                                  const Measure& prior, std::span<const std::size_t> data) {
  if (data.empty()) throw InvalidArgument("empty dataset");
  if (!g.analytic_gradient) {
    return fd_gradient([&](std::span<const double> t) { return mean_loss(g, t, prior, data); },
                       theta);
  }
  std::vector<double> acc(theta.size(), 0.0);
  for (auto y : data) {
    auto gy = gradient(g, theta, prior, y);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += gy[i];
  }
  for (auto& v : acc) v /= static_cast<double>(data.size());
  return acc;
}

std::vector<double> composed_gradient(const ParameterizedGame& d, const ParameterizedGame& c,
                                      std::span<const double> phi, std::span<const double> theta,
                                      const Measure& prior, std::size_t obs) {
  check_dim(d.params, phi);
  check_dim(c.params, theta);
  const StatisticalGame cg = c.at(theta);
  const Measure push = cg.lens.model().pushforward(prior);
  auto phi_block = fd_gradient(
      [&](std::span<const double> p) { return combine(free_energy_parts(d.at(p), push, obs)); },
      phi);
  const Measure drow = d.at(phi).lens.row(push, obs);
  const auto nb = d.at(phi).lens.model().latent().size();
  std::vector<double> theta_block(theta.size(), 0.0);
  std::map<std::size_t, std::vector<double>> inner;
  for (std::size_t yb = 0; yb < drow.size(); ++yb) {
    if (drow[yb] == 0.0) continue;
    const std::size_t y = yb / nb;
    auto it = inner.find(y);
    if (it == inner.end()) it = inner.emplace(y, grad_fd(c, theta, prior, y)).first;
    for (std::size_t i = 0; i < theta_block.size(); ++i) theta_block[i] += drow[yb] * it->second[i];
  }
  return join(phi_block, theta_block);
}

GradientReport laxness_report(const ParameterizedGame& d, const ParameterizedGame& c,
                              std::span<const double> phi, std::span<const double> theta,
                              const Measure& prior, std::size_t obs) {
  GradientReport r;
  r.point = join(phi, theta);
  r.full_gradient = grad_fd(pgame_seq_compose(d, c), r.point, prior, obs);
  r.composed_gradient = composed_gradient(d, c, phi, theta, prior, obs);
  r.laxness.resize(r.point.size());
  for (std::size_t i = 0; i < r.point.size(); ++i) {
    r.laxness[i] = r.full_gradient[i] - r.composed_gradient[i];
  }
  const StatisticalGame cg = c.at(theta);
  const Measure push = cg.lens.model().pushforward(prior);
  std::map<std::size_t, double> fc;
  r.phi_laxness_oracle = fd_gradient(
      [&](std::span<const double> p) {
        const StatisticalGame dg = d.at(p);
        const Measure drow = dg.lens.row(push, obs);
        const auto nb = dg.lens.model().latent().size();
        double acc = 0.0;
        for (std::size_t yb = 0; yb < drow.size(); ++yb) {
          if (drow[yb] == 0.0) continue;
          const std::size_t y = yb / nb;
          auto it = fc.find(y);
          if (it == fc.end()) it = fc.emplace(y, free_energy(cg, prior, y)).first;
          acc += drow[yb] * it->second;
        }
        return acc;
      },
      phi);
  r.phi_laxness_residual = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    r.phi_laxness_residual =
        std::max(r.phi_laxness_residual, std::abs(r.laxness[i] - r.phi_laxness_oracle[i]));
  }
  r.phi_laxness_ok = r.phi_laxness_residual <= kTolLaxness;
  return r;
}

}  // namespace autobayes
