#include "autobayes/game.hpp"

#include <cmath>
#include <map>

#include "autobayes/errors.hpp"

namespace autobayes {

namespace {

double neg_log(double w) {
  if (w <= 0.0) return kInf;
  const double v = -std::log(w);
  return v < 0.0 && v > -1e-12 ? 0.0 : v;
}

}  // namespace

EnergyFn::EnergyFn(FiniteSpace unobserved, FiniteSpace latent, FiniteSpace observed,
                   std::vector<double> table)
    : x_(std::move(unobserved)), l_(std::move(latent)), y_(std::move(observed)),
      table_(std::move(table)) {
  if (table_.size() != x_.size() * l_.size() * y_.size()) {
    throw InvalidArgument("energy table over " + x_.describe() + " * " + l_.describe() + " * " +
                          y_.describe() + " has the wrong size");
  }
  for (double v : table_) {
    if (std::isnan(v) || v < 0.0) throw InvalidArgument("energy values must lie in [0, inf]");
  }
}

EnergyFn EnergyFn::zero(const OpenModel& model) { return constant(model, 0.0); }

EnergyFn EnergyFn::constant(const OpenModel& model, double value) {
  const auto n = model.kernel().data().size();
  return EnergyFn(model.unobserved(), model.latent(), model.observed(),
                  std::vector<double>(n, value));
}

EnergyFn EnergyFn::neg_log_likelihood(const OpenModel& model) {
  std::vector<double> t;
  t.reserve(model.kernel().data().size());
  for (double w : model.kernel().data()) t.push_back(neg_log(w));
  return EnergyFn(model.unobserved(), model.latent(), model.observed(), std::move(t));
}

EntropyFn EntropyFn::zero() {
  return EntropyFn("zero", [](const Measure&, std::size_t) { return 0.0; });
}

EntropyFn EntropyFn::shannon_of_inversion(const BayesianLens& lens) {
  return EntropyFn("shannon", [lens](const Measure& prior, std::size_t obs) {
    return shannon_entropy(lens.row(prior, obs));
  });
}

StatisticalGame::StatisticalGame(BayesianLens lens_, EnergyFn energy_, EntropyFn entropy_)
    : lens(std::move(lens_)), energy(std::move(energy_)), entropy(std::move(entropy_)) {
  const auto& m = lens.model();
  if (!(energy.unobserved() == m.unobserved()) || !(energy.latent() == m.latent()) ||
      !(energy.observed() == m.observed())) {
    throw BoundaryMismatch("game: energy over " + energy.unobserved().describe() + " * " +
                           energy.latent().describe() + " * " + energy.observed().describe() +
                           ", expected " + m.unobserved().describe() + " * " +
                           m.latent().describe() + " * " + m.observed().describe());
  }
}

double kl_loss(const BayesianLens& lens, const Measure& prior, std::size_t obs) {
  const Measure q = lens.apply(prior, obs);
  const Measure exact = exact_inversion(lens.model()).apply(prior, obs);
  return kl_divergence(q, exact);
}

FreeEnergyParts free_energy_parts(const StatisticalGame& g, const Measure& prior,
                                  std::size_t obs) {
  const Measure row = g.lens.row(prior, obs);
  double e = 0.0;
  for (std::size_t xa = 0; xa < row.size(); ++xa) {
    if (row[xa] == 0.0) continue;
    e += row[xa] * g.energy.at(xa, obs);
  }
  return {e, g.entropy(prior, obs)};
}

double combine(const FreeEnergyParts& parts) {
  if (std::isinf(parts.energy) && std::isinf(parts.entropy)) {
    throw IndeterminateLoss("free energy is inf - inf");
  }
  return parts.energy - parts.entropy;
}

double free_energy(const StatisticalGame& g, const Measure& prior, std::size_t obs) {
  if (!(prior.space() == g.unobserved())) {
    throw BoundaryMismatch("free energy: prior on " + prior.space().describe() + ", expected " +
                           g.unobserved().describe());
  }
  if (!prior.is_markov()) throw NotNormalized("free energy: prior is not normalized");
  return combine(free_energy_parts(g, prior, obs));
}

double vfe(const BayesianLens& lens, const Measure& prior, std::size_t obs) {
  const double kl = kl_loss(lens, prior, obs);
  return kl + neg_log(lens.model().pushforward(prior)[obs]);
}

VfeForms vfe_forms(const BayesianLens& lens, const Measure& prior, std::size_t obs) {
  const Measure q = lens.apply(prior, obs);
  const Measure post = exact_inversion(lens.model()).apply(prior, obs);
  const auto& m = lens.model();
  const double neg_log_evidence = neg_log(m.pushforward(prior)[obs]);
  const auto nl = m.latent().size();
  double relative = 0.0, joint = 0.0, energy = 0.0;
  for (std::size_t xa = 0; xa < q.size(); ++xa) {
    const double qv = q[xa];
    if (qv == 0.0) continue;
    const std::size_t x = xa / nl, a = xa % nl;
    const double log_q = std::log(qv);
    const double nl_post = neg_log(post[xa]);
    const double nl_c = neg_log(m.weight(x, a, obs));
    const double nl_pi = neg_log(prior[x]);
    relative += qv * (log_q + nl_post);
    joint += qv * (log_q + nl_c + nl_pi);
    energy += qv * (nl_c + nl_pi);
  }
  VfeForms f;
  f.definition = kl_loss(lens, prior, obs) + neg_log_evidence;
  f.relative = relative + neg_log_evidence;
  f.joint = joint;
  f.helmholtz = energy - shannon_entropy(q);
  return f;
}

StatisticalGame game_seq_compose(const StatisticalGame& d, const StatisticalGame& c) {
  BayesianLens lens = lens_seq_compose(d.lens, c.lens);
  const auto& cm = c.lens.model();
  const auto& dm = d.lens.model();
  const auto nx = cm.unobserved().size(), na = cm.latent().size(), ny = cm.observed().size();
  const auto nb = dm.latent().size(), nz = dm.observed().size();
  std::vector<double> t(nx * na * ny * nb * nz);
  for (std::size_t x = 0; x < nx; ++x) {
    for (std::size_t a = 0; a < na; ++a) {
      for (std::size_t y = 0; y < ny; ++y) {
        const double lc = c.energy(x, a, y);
        for (std::size_t b = 0; b < nb; ++b) {
          const std::size_t row = x * (na * ny * nb) + (a * ny + y) * nb + b;
          for (std::size_t z = 0; z < nz; ++z) t[row * nz + z] = lc + d.energy(y, b, z);
        }
      }
    }
  }
  EnergyFn energy(lens.model().unobserved(), lens.model().latent(), lens.model().observed(),
                  std::move(t));
  EntropyFn entropy(
      "(" + d.entropy.name() + " . " + c.entropy.name() + ")",
      [cl = c.lens, dl = d.lens, ch = c.entropy, dh = d.entropy](const Measure& prior,
                                                                std::size_t z) {
        const Measure push = cl.model().pushforward(prior);
        const Measure drow = dl.row(push, z);
        const auto nb = dl.model().latent().size();
        std::map<std::size_t, double> inner;
        double acc = 0.0;
        for (std::size_t yb = 0; yb < drow.size(); ++yb) {
          if (drow[yb] == 0.0) continue;
          const std::size_t y = yb / nb;
          auto it = inner.find(y);
          if (it == inner.end()) it = inner.emplace(y, ch(prior, y)).first;
          acc += drow[yb] * it->second;
        }
        return acc + dh(push, z);
      });
  return StatisticalGame(std::move(lens), std::move(energy), std::move(entropy));
}

StatisticalGame game_tensor(const StatisticalGame& c, const StatisticalGame& d) {
  BayesianLens lens = lens_tensor(c.lens, d.lens);
  const auto& cm = c.lens.model();
  const auto& dm = d.lens.model();
  const auto nx = cm.unobserved().size(), na = cm.latent().size(), ny = cm.observed().size();
  const auto nx2 = dm.unobserved().size(), na2 = dm.latent().size(), ny2 = dm.observed().size();
  std::vector<double> t(nx * nx2 * na * na2 * ny * ny2);
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t x2 = 0; x2 < nx2; ++x2)
      for (std::size_t a = 0; a < na; ++a)
        for (std::size_t a2 = 0; a2 < na2; ++a2) {
          const std::size_t row = (x * nx2 + x2) * (na * na2) + a * na2 + a2;
          for (std::size_t y = 0; y < ny; ++y)
            for (std::size_t y2 = 0; y2 < ny2; ++y2) {
              t[row * (ny * ny2) + y * ny2 + y2] = c.energy(x, a, y) + d.energy(x2, a2, y2);
            }
        }
  EnergyFn energy(lens.model().unobserved(), lens.model().latent(), lens.model().observed(),
                  std::move(t));
  EntropyFn entropy(
      "(" + c.entropy.name() + " @ " + d.entropy.name() + ")",
      [xs = cm.unobserved(), xs2 = dm.unobserved(), ny2, ch = c.entropy, dh = d.entropy](
          const Measure& prior, std::size_t obs) {
        return ch(marginal(prior, xs, xs2, Side::first), obs / ny2) +
               dh(marginal(prior, xs, xs2, Side::second), obs % ny2);
      });
  return StatisticalGame(std::move(lens), std::move(energy), std::move(entropy));
}

StatisticalGame prior_game(const OpenModel& prior, bool with_energy) {
  if (!prior.unobserved().is_unit()) {
    throw InvalidArgument("prior game needs a distribution 1 -o-> X, got domain " +
                          prior.unobserved().describe());
  }
  if (!(prior.kernel().row_measure(0).total() > 0.0)) {
    throw InvalidArgument("prior game: distribution has zero mass");
  }
  BayesianLens lens = exact_inversion(prior, SupportPolicy::lenient);
  EnergyFn energy = with_energy ? EnergyFn::neg_log_likelihood(prior) : EnergyFn::zero(prior);
  return StatisticalGame(std::move(lens), std::move(energy), EntropyFn::zero());
}

StatisticalGame identity_game(const FiniteSpace& space) {
  BayesianLens lens = identity_lens(space);
  EnergyFn energy = EnergyFn::zero(lens.model());
  return StatisticalGame(std::move(lens), std::move(energy), EntropyFn::zero());
}

StatisticalGame vfe_game(const OpenModel& model) { return vfe_game(exact_inversion(model)); }

StatisticalGame vfe_game(const BayesianLens& lens) {
  EnergyFn energy = EnergyFn::neg_log_likelihood(lens.model());
  EntropyFn entropy = EntropyFn::shannon_of_inversion(lens);
  return StatisticalGame(lens, std::move(energy), std::move(entropy));
}

}  // namespace autobayes
