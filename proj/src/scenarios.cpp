#include "autobayes/scenarios.hpp"

#include <cmath>

#include "autobayes/errors.hpp"
#include "autobayes/families.hpp"
#include "autobayes/random_models.hpp"

namespace autobayes {

namespace {

constexpr double kDefaultStd = 0.75;
constexpr std::size_t kDefaultDataSize = 24;
constexpr std::size_t kDefaultPairs = 12;
constexpr double kLabelNoise = 0.1;

struct GaussianSetup {
  FiniteSpace components;
  FiniteSpace outputs;
  std::vector<double> grid;
  std::vector<double> means;
  std::vector<double> stddevs;
};

GaussianSetup gaussian_setup(const ScenarioSpec& spec, std::size_t min_components) {
  if (spec.grid_size < 2) throw InvalidArgument("grid size must be at least 2");
  if (spec.components < min_components) {
    throw InvalidArgument("scenario needs at least " + std::to_string(min_components) +
                          " components");
  }
  GaussianSetup s{FiniteSpace::indexed("M", spec.components),
                  FiniteSpace::indexed("Y", spec.grid_size), linspace(spec.lo, spec.hi, spec.grid_size),
                  spec.means, spec.stddevs};
  const auto m = spec.components;
  if (s.means.empty()) {
    const double w = spec.hi - spec.lo;
    s.means = m == 1 ? std::vector<double>{spec.lo + w / 2}
                     : linspace(spec.lo + w / 4, spec.hi - w / 4, m);
  }
  if (s.stddevs.empty()) s.stddevs.assign(m, kDefaultStd);
  if (s.means.size() != m || s.stddevs.size() != m) {
    throw InvalidArgument("means and stddevs need one entry per component");
  }
  for (double sd : s.stddevs) {
    if (!(sd > 0.0)) throw InvalidArgument("component stddevs must be positive");
  }
  return s;
}

Kernel component_kernel(const FiniteSpace& domain, const FiniteSpace& outputs,
                        std::span<const double> grid, std::span<const double> means,
                        std::span<const double> stddevs) {
  std::vector<double> w;
  for (std::size_t k = 0; k < means.size(); ++k) {
    auto row = grid_gaussian(grid, means[k], std::log(stddevs[k]));
    w.insert(w.end(), row.begin(), row.end());
  }
  return Kernel(domain, outputs, std::move(w));
}

std::size_t sample_index(Rng& rng, std::span<const double> p) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    acc += p[i];
    if (u < acc) return i;
  }
  return p.size() - 1;
}

std::vector<std::size_t> mixture_data(const ScenarioSpec& spec, const GaussianSetup& s) {
  if (!spec.data.empty()) {
    for (auto y : spec.data) {
      if (y >= spec.grid_size) throw InvalidArgument("datum outside the grid");
    }
    return spec.data;
  }
  Rng rng(spec.seed ^ 0x9e3779b97f4a7c15ull);
  std::vector<double> alpha(spec.components);
  for (std::size_t k = 0; k < alpha.size(); ++k) alpha[k] = static_cast<double>(alpha.size() - k);
  double total = 0.0;
  for (double a : alpha) total += a;
  for (auto& a : alpha) a /= total;
  std::vector<std::size_t> data;
  for (std::size_t i = 0; i < kDefaultDataSize; ++i) {
    const auto k = sample_index(rng, alpha);
    const auto row = grid_gaussian(s.grid, s.means[k], std::log(s.stddevs[k]));
    data.push_back(sample_index(rng, row));
  }
  return data;
}

std::vector<double> random_init(std::uint64_t seed, std::size_t n, double scale) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = scale * rng.normal();
  return v;
}

Measure unit_prior() { return Measure::dirac(FiniteSpace::unit(), 0); }

std::vector<double> row_counts(const Measure& row) {
  return std::vector<double>(row.weights().begin(), row.weights().end());
}

StatisticalGame nll_game(const OpenModel& model, bool shannon) {
  BayesianLens lens = exact_inversion(model);
  EnergyFn energy = EnergyFn::neg_log_likelihood(model);
  EntropyFn entropy = shannon ? EntropyFn::shannon_of_inversion(lens) : EntropyFn::zero();
  return StatisticalGame(std::move(lens), std::move(energy), std::move(entropy));
}

double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

}  // namespace

ParameterizedGame softmax_prior_pgame(const FiniteSpace& space, const std::string& label) {
  ParameterizedGame g;
  g.params.add_softmax(label, space.size());
  g.unobserved = FiniteSpace::unit();
  g.observed = space;
  g.build = [space](std::span<const double> psi) {
    return prior_game(OpenModel::distribution(Measure(space, softmax(psi))));
  };
  return g;
}

std::vector<double> softmax_prior_gradient(const StatisticalGame& composite,
                                           std::span<const double> psi, std::size_t obs,
                                           bool shannon) {
  const Measure q = composite.lens.row(Measure::dirac(FiniteSpace::unit(), 0), obs);
  const auto k = psi.size();
  const auto inner = q.size() / k;
  const auto s = softmax(psi);
  std::vector<double> r(k, 0.0), qg(k, 0.0);
  double mean_g = 0.0;
  for (std::size_t z = 0; z < q.size(); ++z) {
    if (q[z] == 0.0) continue;
    const double g = composite.energy.at(z, obs) + (shannon ? std::log(q[z]) : 0.0);
    r[z / inner] += q[z];
    qg[z / inner] += q[z] * g;
    mean_g += q[z] * g;
  }
  std::vector<double> grad(k);
  for (std::size_t i = 0; i < k; ++i) grad[i] = qg[i] - r[i] * mean_g - r[i] + s[i];
  return grad;
}

Scenario build_gmm(const ScenarioSpec& spec) {
  const auto s = gaussian_setup(spec, 2);
  const Kernel c = component_kernel(s.components, s.outputs, s.grid, s.means, s.stddevs);
  ParameterizedGame g = pgame_seq_compose(constant_pgame(nll_game(OpenModel::pure(c), true)),
                                          softmax_prior_pgame(s.components, "alpha"));
  g.params.softmax_blocks()[0].expected_counts = row_counts;
  g.analytic_gradient = [build = g.build](std::span<const double> theta, const Measure&,
                                          std::size_t obs) {
    return softmax_prior_gradient(build(theta), theta, obs, true);
  };
  return Scenario{g, random_init(spec.seed, spec.components, 0.5), unit_prior(),
                  mixture_data(spec, s), s.grid};
}

Scenario build_em(const ScenarioSpec& spec) {
  const auto s = gaussian_setup(spec, 2);
  ParameterizedGame comp;
  if (spec.learn_means) {
    for (std::size_t k = 0; k < spec.components; ++k) comp.params.add("mu[" + std::to_string(k) + "]");
    comp.unobserved = s.components;
    comp.observed = s.outputs;
    comp.build = [s](std::span<const double> mu) {
      return nll_game(
          OpenModel::pure(component_kernel(s.components, s.outputs, s.grid, mu, s.stddevs)), false);
    };
  } else {
    comp = constant_pgame(nll_game(
        OpenModel::pure(component_kernel(s.components, s.outputs, s.grid, s.means, s.stddevs)),
        false));
  }
  ParameterizedGame g = pgame_seq_compose(comp, softmax_prior_pgame(s.components, "alpha"));
  g.params.softmax_blocks()[0].expected_counts = row_counts;
  std::vector<double> theta0;
  if (spec.learn_means) {
    Rng rng(spec.seed ^ 0x5bd1e995ull);
    for (double m : s.means) theta0.push_back(m + 0.5 * rng.normal());
  } else {
    g.analytic_gradient = [build = g.build](std::span<const double> theta, const Measure&,
                                            std::size_t obs) {
      return softmax_prior_gradient(build(theta), theta, obs, false);
    };
  }
  auto alpha0 = random_init(spec.seed, spec.components, 0.5);
  theta0.insert(theta0.end(), alpha0.begin(), alpha0.end());
  return Scenario{g, theta0, unit_prior(), mixture_data(spec, s), s.grid};
}

Scenario build_vbem(const ScenarioSpec& spec) {
  const auto s = gaussian_setup(spec, 1);
  const auto k = spec.model_space_size;
  if (k < 1) throw InvalidArgument("model space needs at least one point");
  const FiniteSpace models = FiniteSpace::indexed("T", k);
  const std::vector<double> shifts =
      k == 1 ? std::vector<double>{0.0} : linspace(-spec.shift_scale, spec.shift_scale, k);
  std::vector<double> mix = spec.mixing;
  if (mix.empty()) mix.assign(spec.components, 1.0 / static_cast<double>(spec.components));
  if (mix.size() != spec.components) throw InvalidArgument("mixing needs one entry per component");

  std::vector<double> pw;
  for (std::size_t t = 0; t < k; ++t) pw.insert(pw.end(), mix.begin(), mix.end());
  const Kernel pi(models, s.components, std::move(pw));

  std::vector<double> cw;
  for (std::size_t t = 0; t < k; ++t) {
    for (std::size_t m = 0; m < spec.components; ++m) {
      auto row = grid_gaussian(s.grid, s.means[m] + shifts[t], std::log(s.stddevs[m]));
      cw.insert(cw.end(), row.begin(), row.end());
    }
  }
  const Kernel c(FiniteSpace::product(models, s.components), s.outputs, std::move(cw));

  const OpenModel c_pi =
      seq_compose(OpenModel::pure(c),
                  seq_compose(tensor(identity(models), OpenModel::pure(pi)), copier(models)));
  ParameterizedGame g = pgame_seq_compose(constant_pgame(nll_game(c_pi, spec.shannon)),
                                          softmax_prior_pgame(models, "psi"));
  g.analytic_gradient = [build = g.build, shannon = spec.shannon](
                            std::span<const double> theta, const Measure&, std::size_t obs) {
    return softmax_prior_gradient(build(theta), theta, obs, shannon);
  };
  return Scenario{g, random_init(spec.seed, k, 0.5), unit_prior(), mixture_data(spec, s), s.grid};
}

ParameterizedGame supervised_pgame(const ParamSpace& params, const FiniteSpace& inputs,
                                   const FiniteSpace& outputs,
                                   std::function<Kernel(std::span<const double> theta)> predictor) {
  ParameterizedGame g;
  g.params = params;
  g.unobserved = FiniteSpace::unit();
  g.observed = FiniteSpace::product(inputs, outputs);
  g.build = [inputs, predictor](std::span<const double> theta) {
    const OpenModel model =
        seq_compose(tensor(identity(inputs), OpenModel::pure(predictor(theta))), cup(inputs));
    return nll_game(model, false);
  };
  return g;
}

Scenario build_supervised(const ScenarioSpec& spec) {
  if (spec.grid_size < 2) throw InvalidArgument("grid size must be at least 2");
  if (spec.inputs < 1) throw InvalidArgument("supervised scenario needs at least one input");
  ScenarioSpec gspec = spec;
  gspec.components = spec.inputs;
  const auto s = gaussian_setup(gspec, 1);
  const FiniteSpace xs = FiniteSpace::indexed("X", spec.inputs);
  const auto n = spec.inputs;
  ParamSpace params;
  for (std::size_t x = 0; x < n; ++x) params.add("mu[" + std::to_string(x) + "]");
  for (std::size_t x = 0; x < n; ++x) params.add("logsd[" + std::to_string(x) + "]", {{-3.0, 3.0}});
  const auto grid = s.grid;
  ParameterizedGame g = supervised_pgame(params, xs, s.outputs,
                                         [xs, ys = s.outputs, grid, n](std::span<const double> th) {
                                           std::vector<double> sd(n);
                                           for (std::size_t x = 0; x < n; ++x) sd[x] = std::exp(th[n + x]);
                                           return component_kernel(xs, ys, grid, th.first(n), sd);
                                         });
  std::vector<std::size_t> data;
  if (!spec.pairs.empty()) {
    for (auto [x, y] : spec.pairs) {
      if (x >= n || y >= spec.grid_size) throw InvalidArgument("pair outside the declared spaces");
      data.push_back(x * spec.grid_size + y);
    }
  } else {
    Rng rng(spec.seed ^ 0x2545f4914f6cdd1dull);
    for (std::size_t i = 0; i < kDefaultPairs; ++i) {
      const auto x = rng.index(0, n - 1);
      const auto row = grid_gaussian(s.grid, s.means[x], std::log(s.stddevs[x]));
      data.push_back(x * spec.grid_size + sample_index(rng, row));
    }
  }
  Rng rng(spec.seed);
  std::vector<double> theta0;
  for (std::size_t x = 0; x < n; ++x) theta0.push_back(s.means[x] + 0.3 * rng.normal());
  for (std::size_t x = 0; x < n; ++x) theta0.push_back(std::log(kDefaultStd));
  return Scenario{g, theta0, unit_prior(), data, s.grid};
}

Scenario build_bayes_dl_toy(const ScenarioSpec& spec) {
  const auto k = spec.model_space_size;
  const auto n = spec.inputs;
  if (k < 1 || n < 1) throw InvalidArgument("Bayes-DL toy needs nonempty weight and input spaces");
  const FiniteSpace weights = FiniteSpace::indexed("T", k);
  const FiniteSpace xs = FiniteSpace::indexed("X", n);
  const FiniteSpace hs = FiniteSpace::indexed("H", 2);
  const FiniteSpace ys = FiniteSpace::indexed("Y", 2);
  const std::vector<double> wv = k == 1 ? std::vector<double>{1.0} : linspace(-2.0, 2.0, k);
  const std::vector<double> xv = n == 1 ? std::vector<double>{1.0} : linspace(-1.0, 1.0, n);

  std::vector<double> c1w;
  for (std::size_t t = 0; t < k; ++t) {
    for (std::size_t x = 0; x < n; ++x) {
      const double p1 = sigmoid(3.0 * wv[t] * xv[x]);
      c1w.push_back(1.0 - p1);
      c1w.push_back(p1);
    }
  }
  const Kernel c1(FiniteSpace::product(weights, xs), hs, std::move(c1w));
  const Kernel c2(hs, ys, {1.0 - kLabelNoise, kLabelNoise, kLabelNoise, 1.0 - kLabelNoise});
  const OpenModel net = seq_compose(OpenModel::pure(c2), OpenModel::pure(c1));
  const OpenModel model =
      seq_compose(swap(ys, xs), seq_compose(tensor(net, identity(xs)),
                                            tensor(identity(weights), cup(xs))));
  const Measure weight_prior(weights, k == 1 ? std::vector<double>{1.0} : grid_gaussian(wv, 0.0, 0.0));
  const OpenModel full = seq_compose(model, OpenModel::distribution(weight_prior));

  std::vector<std::size_t> data;
  if (!spec.pairs.empty()) {
    for (auto [x, y] : spec.pairs) {
      if (x >= n || y >= 2) throw InvalidArgument("pair outside the declared spaces");
      data.push_back(x * 2 + y);
    }
  } else {
    Rng rng(spec.seed ^ 0x27d4eb2f165667c5ull);
    for (std::size_t i = 0; i < kDefaultPairs; ++i) {
      const auto x = rng.index(0, n - 1);
      const bool h = rng.coin(sigmoid(3.0 * wv[k - 1] * xv[x]));
      const bool flip = rng.coin(kLabelNoise);
      data.push_back(x * 2 + ((h != flip) ? 1 : 0));
    }
  }

  ParameterizedGame g;
  g.params.add_softmax("psi", k);
  g.unobserved = FiniteSpace::unit();
  g.observed = full.observed();
  const auto nl = model.latent().size();
  const bool mean_field = spec.mean_field;
  // p(l | t, obs) from the model weights, one block of nl entries per t.
  auto conditional = [model, k, nl](std::size_t obs) {
    std::vector<double> cond(k * nl, 0.0);
    for (std::size_t t = 0; t < k; ++t) {
      double z = 0.0;
      for (std::size_t l = 0; l < nl; ++l) z += cond[t * nl + l] = model.weight(t, l, obs);
      if (z > 0.0) {
        for (std::size_t l = 0; l < nl; ++l) cond[t * nl + l] /= z;
      }
    }
    return cond;
  };
  g.build = [full, weights, mean_field, conditional](std::span<const double> psi) {
    if (!mean_field) {
      BayesianLens lens = exact_inversion(full);
      EntropyFn h = EntropyFn::shannon_of_inversion(lens);
      return StatisticalGame(lens, EnergyFn::neg_log_likelihood(full), std::move(h));
    }
    const auto q = softmax(psi);
    const FiniteSpace out = FiniteSpace::product(full.unobserved(), full.latent());
    InversionMap::RowFn fn = [q, out, conditional](const Measure&, std::size_t obs) {
      auto cond = conditional(obs);
      const auto nl = cond.size() / q.size();
      for (std::size_t z = 0; z < cond.size(); ++z) cond[z] *= q[z / nl];
      return Measure(out, std::move(cond));
    };
    BayesianLens lens(full, InversionMap(full.unobserved(), full.observed(), out, std::move(fn)));
    EntropyFn h = EntropyFn::shannon_of_inversion(lens);
    return StatisticalGame(lens, EnergyFn::neg_log_likelihood(full), std::move(h));
  };
  g.analytic_gradient = [build = g.build, mean_field, conditional, k, nl](
                            std::span<const double> psi, const Measure&, std::size_t obs) {
    std::vector<double> grad(k, 0.0);
    if (!mean_field) return grad;
    const StatisticalGame game = build(psi);
    const auto q = softmax(psi);
    const auto cond = conditional(obs);
    std::vector<double> a(k, 0.0);
    for (std::size_t t = 0; t < k; ++t) {
      for (std::size_t l = 0; l < nl; ++l) {
        const double p = cond[t * nl + l];
        if (p == 0.0) continue;
        a[t] += p * (game.energy.at(t * nl + l, obs) + std::log(p));
      }
    }
    const auto ge = softmax_expectation_gradient(q, a);
    const auto gh = softmax_entropy_gradient(q);
    for (std::size_t t = 0; t < k; ++t) grad[t] = ge[t] - gh[t];
    return grad;
  };
  return Scenario{g, random_init(spec.seed, k, 0.5), unit_prior(), data, {}};
}

Scenario build_scenario(const ScenarioSpec& spec) {
  if (spec.name == "gmm") return build_gmm(spec);
  if (spec.name == "em") return build_em(spec);
  if (spec.name == "vbem") return build_vbem(spec);
  if (spec.name == "supervised") return build_supervised(spec);
  if (spec.name == "bdl") return build_bayes_dl_toy(spec);
  throw InvalidArgument("unknown scenario '" + spec.name + "'");
}

}  // namespace autobayes
