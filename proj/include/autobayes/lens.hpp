#pragma once

#include <functional>
#include <memory>

#include "autobayes/open_model.hpp"

namespace autobayes {

// Pushforward mass below which an observation is outside the support.
inline constexpr double kTolSupport = 1e-12;

enum class SupportPolicy {
  strict,   // out-of-support queries throw OutOfSupport
  lenient,  // out-of-support queries yield the uniform row
};

// A prior-indexed family of kernels Y ~> X * L, evaluated one row at a time.
// Rows are memoized per (exact bits of the prior, observation); copies share
// the memo table, which is internally synchronized.
class InversionMap {
 public:
  using RowFn = std::function<Measure(const Measure& prior, std::size_t obs)>;

  InversionMap(FiniteSpace prior_space, FiniteSpace obs_space, FiniteSpace out_space, RowFn fn);

  const FiniteSpace& prior_space() const { return prior_space_; }
  const FiniteSpace& obs_space() const { return obs_space_; }
  const FiniteSpace& out_space() const { return out_space_; }

  Measure operator()(const Measure& prior, std::size_t obs) const;

 private:
  struct Memo;

  FiniteSpace prior_space_;
  FiniteSpace obs_space_;
  FiniteSpace out_space_;
  RowFn fn_;
  std::shared_ptr<Memo> memo_;
};

// An open model X -o-> Y paired with an inversion map P(X) -> {Y ~> X * L}.
class BayesianLens {
 public:
  // Throws BoundaryMismatch when the inversion does not run Y ~> X * L.
  BayesianLens(OpenModel model, InversionMap inversion,
               SupportPolicy policy = SupportPolicy::strict);

  const OpenModel& model() const { return impl_->model; }
  const InversionMap& inversion() const { return impl_->inversion; }
  SupportPolicy policy() const { return impl_->policy; }
  // X * L, the space inversion rows live on.
  const FiniteSpace& posterior_space() const { return impl_->inversion.out_space(); }

  BayesianLens with_policy(SupportPolicy policy) const;

  bool in_support(const Measure& prior, std::size_t obs) const;

  // Inversion row at a markov prior. Throws NotNormalized for other priors.
  Measure apply(const Measure& prior, std::size_t obs) const;
  // Same without the normalization precondition; composite lenses query
  // inner inversions at pushforwards that can be unnormalized (cups).
  Measure row(const Measure& prior, std::size_t obs) const;
  // Every row at once; out-of-support rows are zero under the strict policy.
  Kernel inversion_kernel(const Measure& prior) const;

 private:
  struct Impl {
    OpenModel model;
    InversionMap inversion;
    SupportPolicy policy;
  };
  std::shared_ptr<const Impl> impl_;
};

// Bayes' law for open models: w(x, a | y) proportional to c(a, y | x) pi(x).
BayesianLens exact_inversion(const OpenModel& model, SupportPolicy policy = SupportPolicy::strict);
// A fixed, prior-independent inversion table Y ~> X * L.
BayesianLens table_lens(const OpenModel& model, const Kernel& table,
                        SupportPolicy policy = SupportPolicy::strict);
BayesianLens identity_lens(const FiniteSpace& space);

Measure apply_inversion(const BayesianLens& lens, const Measure& prior, std::size_t obs);

// (d, d') after (c, c'): model d . c; at prior pi and observation z the row is
// c'_pi(x, a | y) d'_{c_* pi}(y, b | z) on X * (Lc * Y * Ld).
BayesianLens lens_seq_compose(const BayesianLens& d, const BayesianLens& c);
// Parallel composition; the inversion only sees the marginals of a joint prior.
BayesianLens lens_tensor(const BayesianLens& c, const BayesianLens& d);
// (cup_A, constant cap_A) and (cap_A, constant cup_A).
BayesianLens lens_cup(const FiniteSpace& space);
BayesianLens lens_cap(const FiniteSpace& space);

}  // namespace autobayes
