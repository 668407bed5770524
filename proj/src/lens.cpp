#include "autobayes/lens.hpp"

#include <bit>
#include <cstdint>
#include <map>
#include <mutex>
#include <unordered_map>

#include "autobayes/errors.hpp"

namespace autobayes {

namespace {

constexpr std::size_t kMemoCapacity = 1 << 14;

struct RowKey {
  std::vector<std::uint64_t> bits;
  std::size_t obs;
  bool operator==(const RowKey&) const = default;
};

struct RowKeyHash {
  std::size_t operator()(const RowKey& k) const {
    std::uint64_t h = 1469598103934665603ull ^ k.obs;
    for (auto b : k.bits) {
      h ^= b;
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
  }
};

SupportPolicy joint_policy(const BayesianLens& a, const BayesianLens& b) {
  return a.policy() == SupportPolicy::lenient && b.policy() == SupportPolicy::lenient
             ? SupportPolicy::lenient
             : SupportPolicy::strict;
}

RowKey make_key(const Measure& prior, std::size_t obs) {
  RowKey key{{}, obs};
  key.bits.reserve(prior.size());
  for (double w : prior.weights()) key.bits.push_back(std::bit_cast<std::uint64_t>(w));
  return key;
}

}  // namespace

struct InversionMap::Memo {
  std::mutex mutex;
  std::unordered_map<RowKey, Measure, RowKeyHash> rows;
};

InversionMap::InversionMap(FiniteSpace prior_space, FiniteSpace obs_space, FiniteSpace out_space,
                           RowFn fn)
    : prior_space_(std::move(prior_space)),
      obs_space_(std::move(obs_space)),
      out_space_(std::move(out_space)),
      fn_(std::move(fn)),
      memo_(std::make_shared<Memo>()) {}

Measure InversionMap::operator()(const Measure& prior, std::size_t obs) const {
  if (!(prior.space() == prior_space_)) {
    throw BoundaryMismatch("inversion: prior on " + prior.space().describe() + ", expected " +
                           prior_space_.describe());
  }
  if (obs >= obs_space_.size()) throw InvalidArgument("inversion: observation out of range");
  RowKey key = make_key(prior, obs);
  {
    std::lock_guard lock(memo_->mutex);
    auto it = memo_->rows.find(key);
    if (it != memo_->rows.end()) return it->second;
  }
  Measure row = fn_(prior, obs);
  if (!(row.space() == out_space_)) {
    throw BoundaryMismatch("inversion row lives on " + row.space().describe() + ", expected " +
                           out_space_.describe());
  }
  std::lock_guard lock(memo_->mutex);
  if (memo_->rows.size() >= kMemoCapacity) memo_->rows.clear();
  memo_->rows.emplace(std::move(key), row);
  return row;
}

BayesianLens::BayesianLens(OpenModel model, InversionMap inversion, SupportPolicy policy) {
  const auto expected_out = FiniteSpace::product(model.unobserved(), model.latent());
  if (!(inversion.prior_space() == model.unobserved()) ||
      !(inversion.obs_space() == model.observed()) ||
      !(inversion.out_space() == expected_out)) {
    throw BoundaryMismatch("lens: inversion runs " + inversion.obs_space().describe() + " ~> " +
                           inversion.out_space().describe() + ", expected " +
                           model.observed().describe() + " ~> " + expected_out.describe());
  }
  impl_ = std::make_shared<const Impl>(Impl{std::move(model), std::move(inversion), policy});
}

BayesianLens BayesianLens::with_policy(SupportPolicy policy) const {
  return BayesianLens(impl_->model, impl_->inversion, policy);
}

bool BayesianLens::in_support(const Measure& prior, std::size_t obs) const {
  return model().pushforward(prior)[obs] >= kTolSupport;
}

Measure BayesianLens::apply(const Measure& prior, std::size_t obs) const {
  if (!(prior.space() == model().unobserved())) {
    throw BoundaryMismatch("lens: prior on " + prior.space().describe() + ", expected " +
                           model().unobserved().describe());
  }
  if (!prior.is_markov()) throw NotNormalized("lens: prior is not normalized");
  return row(prior, obs);
}

Measure BayesianLens::row(const Measure& prior, std::size_t obs) const {
  if (obs >= model().observed().size()) {
    throw InvalidArgument("lens: observation index out of range");
  }
  if (!in_support(prior, obs)) {
    if (policy() == SupportPolicy::lenient) return Measure::uniform(posterior_space());
    throw OutOfSupport("observation " + model().observed().point_label(obs) +
                       " is outside the support of the prior pushforward");
  }
  return inversion()(prior, obs);
}

Kernel BayesianLens::inversion_kernel(const Measure& prior) const {
  const auto& out = posterior_space();
  std::vector<double> w;
  w.reserve(model().observed().size() * out.size());
  for (std::size_t y = 0; y < model().observed().size(); ++y) {
    if (!in_support(prior, y) && policy() == SupportPolicy::strict) {
      w.insert(w.end(), out.size(), 0.0);
      continue;
    }
    auto r = row(prior, y);
    w.insert(w.end(), r.weights().begin(), r.weights().end());
  }
  return Kernel(model().observed(), out, std::move(w));
}

BayesianLens exact_inversion(const OpenModel& model, SupportPolicy policy) {
  auto out = FiniteSpace::product(model.unobserved(), model.latent());
  InversionMap::RowFn fn = [model, out](const Measure& prior, std::size_t y) {
    const auto nx = model.unobserved().size();
    const auto nl = model.latent().size();
    std::vector<double> w(nx * nl, 0.0);
    double norm = 0.0;
    for (std::size_t x = 0; x < nx; ++x) {
      if (prior[x] == 0.0) continue;
      for (std::size_t a = 0; a < nl; ++a) {
        const double v = model.weight(x, a, y) * prior[x];
        w[x * nl + a] = v;
        norm += v;
      }
    }
    if (!(norm > 0.0)) {
      throw OutOfSupport("exact inversion: observation has zero marginal likelihood");
    }
    for (auto& v : w) v /= norm;
    return Measure(out, std::move(w));
  };
  return BayesianLens(model, InversionMap(model.unobserved(), model.observed(), out, std::move(fn)),
                      policy);
}

BayesianLens table_lens(const OpenModel& model, const Kernel& table, SupportPolicy policy) {
  auto out = FiniteSpace::product(model.unobserved(), model.latent());
  if (!(table.domain() == model.observed()) || !(table.codomain() == out)) {
    throw BoundaryMismatch("table inversion runs " + table.domain().describe() + " ~> " +
                           table.codomain().describe() + ", expected " +
                           model.observed().describe() + " ~> " + out.describe());
  }
  InversionMap::RowFn fn = [table](const Measure&, std::size_t y) {
    return table.row_measure(y);
  };
  return BayesianLens(model, InversionMap(model.unobserved(), model.observed(), out, std::move(fn)),
                      policy);
}

BayesianLens identity_lens(const FiniteSpace& space) { return exact_inversion(identity(space)); }

Measure apply_inversion(const BayesianLens& lens, const Measure& prior, std::size_t obs) {
  return lens.apply(prior, obs);
}

BayesianLens lens_seq_compose(const BayesianLens& d, const BayesianLens& c) {
  OpenModel model = seq_compose(d.model(), c.model());
  auto out = FiniteSpace::product(model.unobserved(), model.latent());
  InversionMap::RowFn fn = [d, c, out](const Measure& prior, std::size_t z) {
    const Measure push = c.model().pushforward(prior);
    const Measure drow = d.row(push, z);  // on Y * Ld
    const auto nyb = drow.size();
    const auto nxa = c.posterior_space().size();
    std::vector<double> w(nxa * nyb, 0.0);
    const auto nb = d.model().latent().size();
    std::map<std::size_t, Measure> crows;
    for (std::size_t yb = 0; yb < nyb; ++yb) {
      const double dw = drow[yb];
      if (dw == 0.0) continue;
      const std::size_t y = yb / nb;
      auto it = crows.find(y);
      if (it == crows.end()) it = crows.emplace(y, c.row(prior, y)).first;
      const Measure& crow = it->second;
      for (std::size_t xa = 0; xa < nxa; ++xa) w[xa * nyb + yb] = crow[xa] * dw;
    }
    return Measure(out, std::move(w));
  };
  return BayesianLens(model, InversionMap(model.unobserved(), model.observed(), out, std::move(fn)),
                      joint_policy(c, d));
}

BayesianLens lens_tensor(const BayesianLens& c, const BayesianLens& d) {
  OpenModel model = tensor(c.model(), d.model());
  auto out = FiniteSpace::product(model.unobserved(), model.latent());
  InversionMap::RowFn fn = [c, d, out](const Measure& prior, std::size_t obs) {
    const auto& xs = c.model().unobserved();
    const auto& xs2 = d.model().unobserved();
    const Measure px = marginal(prior, xs, xs2, Side::first);
    const Measure px2 = marginal(prior, xs, xs2, Side::second);
    const auto ny2 = d.model().observed().size();
    const Measure crow = c.row(px, obs / ny2);
    const Measure drow = d.row(px2, obs % ny2);
    const auto nx = xs.size(), nx2 = xs2.size();
    const auto na = c.model().latent().size(), na2 = d.model().latent().size();
    std::vector<double> w(out.size(), 0.0);
    for (std::size_t x = 0; x < nx; ++x) {
      for (std::size_t x2 = 0; x2 < nx2; ++x2) {
        for (std::size_t a = 0; a < na; ++a) {
          const double cw = crow[x * na + a];
          if (cw == 0.0) continue;
          for (std::size_t a2 = 0; a2 < na2; ++a2) {
            w[((x * nx2 + x2) * na + a) * na2 + a2] = cw * drow[x2 * na2 + a2];
          }
        }
      }
    }
    return Measure(out, std::move(w));
  };
  return BayesianLens(model, InversionMap(model.unobserved(), model.observed(), out, std::move(fn)),
                      joint_policy(c, d));
}

BayesianLens lens_cup(const FiniteSpace& space) {
  OpenModel model = cup(space);
  const auto n = space.size();
  InversionMap::RowFn fn = [n](const Measure&, std::size_t obs) {
    const bool diag = obs / n == obs % n;
    return Measure(FiniteSpace::unit(), {diag ? 1.0 : 0.0});
  };
  return BayesianLens(model, InversionMap(model.unobserved(), model.observed(),
                                          FiniteSpace::unit(), std::move(fn)));
}

BayesianLens lens_cap(const FiniteSpace& space) {
  OpenModel model = cap(space);
  Measure cup_weights = cup(space).kernel().row_measure(0);
  InversionMap::RowFn fn = [cup_weights](const Measure&, std::size_t) { return cup_weights; };
  return BayesianLens(model, InversionMap(model.unobserved(), model.observed(),
                                          model.unobserved(), std::move(fn)));
}

}  // namespace autobayes
