#include "autobayes/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>

#include "autobayes/errors.hpp"
#include "autobayes/families.hpp"
#include "autobayes/optimize.hpp"
#include "autobayes/random_models.hpp"
#include "autobayes/scenarios.hpp"

namespace autobayes {

namespace {

constexpr double kTolExact = 1e-9;
constexpr double kTolGradient = 1e-4;
constexpr double kEmSlack = 1e-8;

FiniteSpace random_latent(Rng& rng, const std::string& label) {
  if (rng.coin(1.0 / 3.0)) return FiniteSpace::unit();
  return FiniteSpace::indexed(label, rng.index(2, 3));
}

double worst(double a, double b) {
  if (std::isnan(a) || std::isnan(b)) return kInf;
  return std::max(a, b);
}

// Residual of one trial; the trial passes when it is within tolerance.
using Trial = std::function<double(Rng& rng, std::size_t index)>;

double chain_rule_trial(Rng& rng, std::size_t) {
  const auto xs = random_space(rng, "X", 2, 6);
  const auto ys = random_space(rng, "Y", 2, 6);
  const auto zs = random_space(rng, "Z", 2, 6);
  const auto c = random_model(rng, xs, random_latent(rng, "A"), ys, 0.3);
  const auto d = random_model(rng, ys, random_latent(rng, "B"), zs, 0.3);
  const auto prior = random_measure(rng, xs);
  const auto composite = lens_seq_compose(exact_inversion(d), exact_inversion(c));
  const auto direct = exact_inversion(seq_compose(d, c));
  double r = 0.0;
  for (std::size_t z = 0; z < zs.size(); ++z) {
    if (!direct.in_support(prior, z)) continue;
    const auto a = composite.apply(prior, z);
    const auto b = direct.apply(prior, z);
    r = worst(r, max_abs_diff(a.weights(), b.weights()));
  }
  return r;
}

BayesianLens random_table_lens(Rng& rng, const OpenModel& model) {
  const auto out = FiniteSpace::product(model.unobserved(), model.latent());
  return table_lens(model, random_kernel(rng, model.observed(), out));
}

double vfe_forms_trial(Rng& rng, std::size_t index) {
  double r = 0.0;
  if (index == 0) {
    const auto xs = FiniteSpace::indexed("X", 2);
    const auto ys = FiniteSpace::indexed("Y", 2);
    const auto c2 = OpenModel::pure(Kernel(xs, ys, {0.8, 0.2, 0.2, 0.8}));
    const auto lens = table_lens(c2, Kernel(ys, xs, {0.5, 0.5, 0.5, 0.5}));
    const auto prior = Measure::uniform(xs);
    const auto f = vfe_forms(lens, prior, 0);
    const double expected = std::log(2.5);
    for (double v : {f.definition, f.relative, f.joint, f.helmholtz}) {
      r = worst(r, std::abs(v - expected));
    }
  }
  const auto xs = random_space(rng, "X", 2, 5);
  const auto ys = random_space(rng, "Y", 2, 5);
  const auto c = random_model(rng, xs, random_latent(rng, "A"), ys);
  const auto lens = random_table_lens(rng, c);
  const auto prior = random_measure(rng, xs);
  const auto y = rng.index(0, ys.size() - 1);
  const auto f = vfe_forms(lens, prior, y);
  const double vals[] = {f.definition, f.relative, f.joint, f.helmholtz};
  for (double a : vals)
    for (double b : vals) r = worst(r, std::abs(a - b));
  // Prior-game recovery: F of (c after the prior game) equals VFE.
  const auto composite = game_seq_compose(vfe_game(lens), prior_game(OpenModel::distribution(prior)));
  const double fc = free_energy(composite, Measure::dirac(FiniteSpace::unit(), 0), y);
  r = worst(r, std::abs(fc - vfe(lens, prior, y)));
  return r;
}

StatisticalGame random_game(Rng& rng, const OpenModel& model) {
  BayesianLens lens = rng.coin() ? exact_inversion(model) : random_table_lens(rng, model);
  std::vector<double> e(model.kernel().data().size());
  for (auto& v : e) v = rng.uniform(0.0, 3.0);
  EnergyFn energy(model.unobserved(), model.latent(), model.observed(), std::move(e));
  const double pick = rng.uniform();
  EntropyFn entropy = pick < 0.4   ? EntropyFn::shannon_of_inversion(lens)
                      : pick < 0.7 ? EntropyFn::zero()
                                   : EntropyFn("scaled", [lens, s = rng.uniform(0.1, 2.0)](
                                                             const Measure& p, std::size_t y) {
                                       return s * shannon_entropy(lens.row(p, y));
                                     });
  return StatisticalGame(std::move(lens), std::move(energy), std::move(entropy));
}

// |F^{dc}(pi, z) - (E_{d'}[F^c(pi, y)] + F^d(c_* pi, z))| at every z.
double chain_residual(const StatisticalGame& d, const StatisticalGame& c, const Measure& prior) {
  const auto dc = game_seq_compose(d, c);
  const auto push = c.lens.model().pushforward(prior);
  const auto nb = d.lens.model().latent().size();
  double r = 0.0;
  for (std::size_t z = 0; z < d.observed().size(); ++z) {
    const double lhs = free_energy(dc, prior, z);
    const auto drow = d.lens.row(push, z);
    double rhs = 0.0;
    for (std::size_t yb = 0; yb < drow.size(); ++yb) {
      if (drow[yb] == 0.0) continue;
      rhs += drow[yb] * free_energy(c, prior, yb / nb);
    }
    rhs += free_energy(d, push, z);
    r = worst(r, std::abs(lhs - rhs));
  }
  return r;
}

double fe_chain_trial(Rng& rng, std::size_t index) {
  const auto xs = random_space(rng, "X", 2, 4);
  const auto ys = random_space(rng, "Y", 2, 4);
  const auto zs = random_space(rng, "Z", 2, 4);
  const auto c = random_game(rng, random_model(rng, xs, random_latent(rng, "A"), ys));
  const auto d = random_game(rng, random_model(rng, ys, random_latent(rng, "B"), zs));
  const auto prior = random_measure(rng, xs);
  double r = chain_residual(d, c, prior);
  if (index % 2 == 0) {
    const auto ws = random_space(rng, "W", 2, 3);
    const auto e = random_game(rng, random_model(rng, zs, random_latent(rng, "C"), ws));
    r = worst(r, chain_residual(game_seq_compose(e, d), c, prior));
    r = worst(r, chain_residual(e, game_seq_compose(d, c), prior));
    const auto left = game_seq_compose(game_seq_compose(e, d), c);
    const auto right = game_seq_compose(e, game_seq_compose(d, c));
    for (std::size_t w = 0; w < ws.size(); ++w) {
      r = worst(r, std::abs(free_energy(left, prior, w) - free_energy(right, prior, w)));
    }
  }
  return r;
}

StatisticalGame discard_game(const FiniteSpace& space) {
  BayesianLens lens = exact_inversion(discard(space));
  EntropyFn h = EntropyFn::shannon_of_inversion(lens);
  return StatisticalGame(lens, EnergyFn::zero(lens.model()), std::move(h));
}

// Entropy of the tensor game minus the entropy of the exact joint inversion.
double tensor_entropy_gap(const FiniteSpace& a, const FiniteSpace& b, const Measure& joint) {
  const auto g = game_tensor(discard_game(a), discard_game(b));
  const auto exact = exact_inversion(g.lens.model());
  return g.entropy(joint, 0) - shannon_entropy(exact.apply(joint, 0));
}

double lax_tensor_trial(Rng& rng, std::size_t index) {
  double r = 0.0;
  if (index == 0) {
    const auto a = FiniteSpace::indexed("X", 2);
    const auto b = FiniteSpace::indexed("W", 2);
    const Measure corr(FiniteSpace::product(a, b), {0.5, 0.0, 0.0, 0.5});
    r = worst(r, std::abs(tensor_entropy_gap(a, b, corr) - std::log(2.0)));
  }
  const auto a = random_space(rng, "X", 2, 4);
  const auto b = random_space(rng, "W", 2, 4);
  const auto joint = random_measure(rng, FiniteSpace::product(a, b), 0.0);
  r = worst(r, std::abs(tensor_entropy_gap(a, b, joint) -
                        mutual_information(joint, a, b)));
  const auto prod = product_measure(random_measure(rng, a), random_measure(rng, b));
  r = worst(r, std::abs(tensor_entropy_gap(a, b, prod)));
  return r;
}

// Kernel X ~> Y with one softmax block of logits per row.
ParameterizedGame softmax_kernel_pgame(const FiniteSpace& xs, const FiniteSpace& ys,
                                       const std::string& label, bool table_inversion,
                                       const Kernel& table) {
  ParameterizedGame g;
  for (std::size_t x = 0; x < xs.size(); ++x) {
    g.params.add_softmax(label + std::to_string(x), ys.size());
  }
  g.unobserved = xs;
  g.observed = ys;
  g.build = [xs, ys, table_inversion, table](std::span<const double> theta) {
    std::vector<double> w;
    for (std::size_t x = 0; x < xs.size(); ++x) {
      const auto row = softmax(theta.subspan(x * ys.size(), ys.size()));
      w.insert(w.end(), row.begin(), row.end());
    }
    const auto model = OpenModel::pure(Kernel(xs, ys, std::move(w)));
    if (table_inversion) {
      BayesianLens lens = table_lens(model, table);
      return StatisticalGame(lens, EnergyFn::neg_log_likelihood(model), EntropyFn::zero());
    }
    return vfe_game(model);
  };
  return g;
}

std::vector<double> random_vector(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.normal();
  return v;
}

double relative_error(std::span<const double> fd, std::span<const double> analytic) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < fd.size(); ++i) {
    num = std::max(num, std::abs(fd[i] - analytic[i]));
    den = std::max(den, std::abs(analytic[i]));
  }
  return num / std::max(den, 1e-6);
}

double analytic_gradient_residual(Rng& rng) {
  ScenarioSpec spec;
  spec.seed = rng.bits();
  const double pick = rng.uniform();
  spec.name = pick < 0.4 ? "gmm" : pick < 0.7 ? "vbem" : pick < 0.85 ? "em" : "bdl";
  spec.grid_size = 16;
  spec.shannon = rng.coin();
  spec.components = rng.index(2, 3);
  const auto s = build_scenario(spec);
  const auto theta = random_vector(rng, s.game.params.dimension());
  const auto y = s.data[rng.index(0, s.data.size() - 1)];
  return relative_error(grad_fd(s.game, theta, s.prior, y),
                        s.game.analytic_gradient(theta, s.prior, y));
}

double lax_grad_trial(Rng& rng, std::size_t index) {
  const auto xs = random_space(rng, "X", 2, 3);
  const auto ys = random_space(rng, "Y", 2, 3);
  const auto zs = random_space(rng, "Z", 2, 3);
  const bool table = index % 2 == 0;
  const auto c = softmax_kernel_pgame(xs, ys, "theta", false, Kernel::identity(xs));
  const auto d = softmax_kernel_pgame(ys, zs, "phi", table, random_kernel(rng, zs, ys));
  const auto phi = random_vector(rng, d.params.dimension());
  const auto theta = random_vector(rng, c.params.dimension());
  const auto prior = random_measure(rng, xs);
  const auto z = rng.index(0, zs.size() - 1);
  const auto rep = laxness_report(d, c, phi, theta, prior, z);
  double r = rep.phi_laxness_residual;
  if (table) {
    for (std::size_t i = phi.size(); i < rep.point.size(); ++i) {
      r = worst(r, std::abs(rep.laxness[i]));
    }
  }
  // Gradient residuals are rescaled onto the laxness tolerance.
  r = worst(r, analytic_gradient_residual(rng) * (kTolLaxness / kTolGradient));
  return r;
}

double em_mono_trial(Rng& rng, std::size_t) {
  ScenarioSpec spec;
  spec.name = "em";
  spec.components = 2;
  spec.seed = rng.bits();
  const auto s = build_em(spec);
  const auto theta0 = random_vector(rng, s.game.params.dimension());
  const auto t = em_loop(s.game, s.prior, s.data, theta0, 50);
  double r = 0.0;
  for (std::size_t i = 1; i < t.log_likelihoods.size(); ++i) {
    const double drop = t.log_likelihoods[i - 1] - t.log_likelihoods[i];
    r = worst(r, std::max(0.0, drop));
  }
  return r;
}

struct SuiteDef {
  Trial trial;
  double tolerance;
};

const std::map<std::string, SuiteDef>& suites() {
  static const std::map<std::string, SuiteDef> m = {
      {"chain-rule", {chain_rule_trial, kTolExact}},
      {"vfe-forms", {vfe_forms_trial, kTolExact}},
      {"fe-chain", {fe_chain_trial, kTolExact}},
      {"lax-tensor", {lax_tensor_trial, kTolExact}},
      {"lax-grad", {lax_grad_trial, kTolLaxness}},
      {"em-mono", {em_mono_trial, kEmSlack}},
  };
  return m;
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {"chain-rule", "vfe-forms", "fe-chain",
                                                 "lax-tensor", "lax-grad",  "em-mono"};
  return names;
}

std::uint64_t trial_seed(std::uint64_t seed, std::size_t trial) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (static_cast<std::uint64_t>(trial) + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

SuiteReport run_suite(const std::string& name, std::size_t trials, std::uint64_t seed,
                      double tol_scale) {
  const auto it = suites().find(name);
  if (it == suites().end()) throw InvalidArgument("unknown suite '" + name + "'");
  SuiteReport rep;
  rep.name = name;
  rep.trials = trials;
  rep.tolerance = it->second.tolerance * tol_scale;
  if (trials == 0) rep.notes.push_back("no trials requested; the suite passes vacuously");
  for (std::size_t i = 0; i < trials; ++i) {
    Rng rng(trial_seed(seed, i));
    double r;
    try {
      r = it->second.trial(rng, i);
    } catch (const std::exception& e) {
      rep.notes.push_back("trial " + std::to_string(i) + ": " + e.what());
      rep.max_residual = kInf;
      continue;
    }
    rep.max_residual = worst(rep.max_residual, r);
    if (r <= rep.tolerance) {
      ++rep.passed;
    } else if (rep.notes.size() < 8) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.3g", r);
      rep.notes.push_back("trial " + std::to_string(i) + ": residual " + buf);
    }
  }
  return rep;
}

}  // namespace autobayes
