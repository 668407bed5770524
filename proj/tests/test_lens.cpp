#include <gtest/gtest.h>

#include "autobayes/errors.hpp"
#include "autobayes/lens.hpp"
#include "autobayes/random_models.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace autobayes;

TEST(Lens, ExactInversionF1) {
  fx::F1 f;
  const auto lens = exact_inversion(OpenModel::pure(f.c));
  const Measure r0 = lens.apply(f.pi, 0);
  const Measure r1 = lens.apply(f.pi, 1);
  EXPECT_NEAR(r0[0], 1.0, 1e-15);
  EXPECT_NEAR(r0[1], 0.0, 1e-15);
  EXPECT_NEAR(r1[0], 0.6, 1e-15);
  EXPECT_NEAR(r1[1], 0.4, 1e-15);
}

TEST(Lens, SupportPolicies) {
  const auto x = FiniteSpace::indexed("X", 2), y = FiniteSpace::indexed("Y", 2);
  const auto m = OpenModel::pure(Kernel::from_rows(x, y, {{1, 0}, {1, 0}}));
  const auto strict = exact_inversion(m);
  const Measure pi = Measure::uniform(x);
  EXPECT_TRUE(strict.in_support(pi, 0));
  EXPECT_FALSE(strict.in_support(pi, 1));
  EXPECT_THROW(strict.apply(pi, 1), OutOfSupport);
  const Measure lenient = strict.with_policy(SupportPolicy::lenient).apply(pi, 1);
  EXPECT_DOUBLE_EQ(lenient[0], 0.5);
  EXPECT_DOUBLE_EQ(lenient[1], 0.5);
  const Kernel k = strict.inversion_kernel(pi);
  EXPECT_EQ(k(1, 0), 0.0);
  EXPECT_EQ(k(1, 1), 0.0);
}

TEST(Lens, SupportThreshold) {
  const auto x = FiniteSpace::indexed("X", 2), y = FiniteSpace::indexed("Y", 2);
  const auto m = OpenModel::pure(Kernel::from_rows(x, y, {{1, 0}, {0.5, 0.5}}));
  const auto lens = exact_inversion(m);
  EXPECT_TRUE(lens.in_support(Measure(x, {1 - 4e-12, 4e-12}), 1));
  EXPECT_FALSE(lens.in_support(Measure(x, {1 - 1e-12, 1e-12}), 1));
}

TEST(Lens, RejectsUnnormalizedPrior) {
  fx::F1 f;
  const auto lens = exact_inversion(OpenModel::pure(f.c));
  EXPECT_THROW(lens.apply(Measure(f.X, {1.0, 1.0}), 0), NotNormalized);
  EXPECT_THROW(lens.apply(Measure(f.Y, {0.5, 0.5}), 0), BoundaryMismatch);
}

TEST(Lens, ChainRuleF1) {
  fx::F1 f;
  const auto c = OpenModel::pure(f.c), d = OpenModel::pure(f.d);
  const auto composite = lens_seq_compose(exact_inversion(d), exact_inversion(c));
  const auto direct = exact_inversion(seq_compose(d, c));
  const Measure row = composite.apply(f.pi, 1);
  EXPECT_EQ(row.space(), direct.posterior_space());
  EXPECT_LE(max_abs_diff(row.weights(), direct.apply(f.pi, 1).weights()), 1e-15);
  const auto xm = oracle::first_marginal(oracle::weights(row), 2);
  EXPECT_NEAR(xm[0], 0.6, 1e-15);
  EXPECT_NEAR(xm[1], 0.4, 1e-15);
}

TEST(Lens, ChainRuleRandomAgainstEnumeration) {
  Rng rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    const auto x = random_space(rng, "X", 1, 4), y = random_space(rng, "Y", 1, 4),
               z = random_space(rng, "Z", 1, 4), a = random_space(rng, "A", 1, 2),
               b = random_space(rng, "B", 1, 2);
    const auto c = random_model(rng, x, a, y, 0.3);
    const auto d = random_model(rng, y, b, z, 0.3);
    const Measure pi = random_measure(rng, x);
    const auto composite = lens_seq_compose(exact_inversion(d), exact_inversion(c));
    const auto dc = seq_compose(d, c);
    for (std::size_t obs = 0; obs < z.size(); ++obs) {
      if (oracle::evidence(dc, oracle::weights(pi), obs) < 1e-12) {
        EXPECT_THROW(composite.apply(pi, obs), OutOfSupport);
        continue;
      }
      EXPECT_LE(oracle::max_diff(oracle::weights(composite.apply(pi, obs)),
                                 oracle::posterior(dc, oracle::weights(pi), obs)),
                1e-12);
    }
  }
}

TEST(Lens, PosteriorAveragesToPrior) {
  Rng rng(4);
  const auto x = FiniteSpace::indexed("X", 4), y = FiniteSpace::indexed("Y", 3);
  const auto m = random_model(rng, x, FiniteSpace::unit(), y);
  const Measure pi = random_measure(rng, x);
  const auto lens = exact_inversion(m);
  const Measure push = m.pushforward(pi);
  std::vector<double> avg(4, 0.0);
  for (std::size_t obs = 0; obs < 3; ++obs) {
    const Measure r = lens.apply(pi, obs);
    for (std::size_t i = 0; i < 4; ++i) avg[i] += push[obs] * r[i];
  }
  EXPECT_LE(max_abs_diff(avg, pi.weights()), 1e-12);
}

TEST(Lens, TableLensIgnoresThePrior) {
  fx::F2 f;
  const auto lens = table_lens(OpenModel::pure(f.c), f.uniform_inversion);
  const Measure r = lens.apply(Measure(f.X, {0.9, 0.1}), 0);
  EXPECT_DOUBLE_EQ(r[0], 0.5);
  EXPECT_THROW(table_lens(OpenModel::pure(f.c), f.c), BoundaryMismatch);
}

TEST(Lens, MemoizedRowsAreStable) {
  Rng rng(8);
  const auto x = FiniteSpace::indexed("X", 3), y = FiniteSpace::indexed("Y", 3);
  const auto lens = exact_inversion(random_model(rng, x, FiniteSpace::unit(), y));
  const Measure p1 = random_measure(rng, x), p2 = random_measure(rng, x);
  const Measure a = lens.apply(p1, 2);
  EXPECT_EQ(lens.apply(p1, 2), a);
  EXPECT_NE(lens.apply(p2, 2), a);
  const BayesianLens copy = lens;
  EXPECT_EQ(copy.apply(p1, 2), a);
}

TEST(Lens, TensorIsExactOnProductPriors) {
  Rng rng(12);
  const auto x = FiniteSpace::indexed("X", 2), x2 = FiniteSpace::indexed("W", 3),
             y = FiniteSpace::indexed("Y", 2), y2 = FiniteSpace::indexed("V", 2);
  const auto c = random_model(rng, x, FiniteSpace::unit(), y);
  const auto d = random_model(rng, x2, FiniteSpace::unit(), y2);
  const auto lt = lens_tensor(exact_inversion(c), exact_inversion(d));
  const auto exact = exact_inversion(tensor(c, d));
  const Measure prod = product_measure(random_measure(rng, x), random_measure(rng, x2));
  for (std::size_t obs = 0; obs < 4; ++obs)
    EXPECT_LE(max_abs_diff(lt.apply(prod, obs).weights(), exact.apply(prod, obs).weights()), 1e-12);

  // correlated prior: the tensor lens only sees the marginals
  const auto xx = FiniteSpace::product(x, x);
  const auto id_lens = lens_tensor(exact_inversion(identity(x)), exact_inversion(identity(x)));
  const Measure corr(xx, {0.5, 0.0, 0.0, 0.5});
  const Measure lax = id_lens.apply(corr, 0);
  const Measure ex = exact_inversion(tensor(identity(x), identity(x))).apply(corr, 0);
  EXPECT_EQ(ex, Measure::dirac(xx, 0));
  EXPECT_EQ(lax, Measure::dirac(xx, 0));
  const auto noisy = random_model(rng, x, FiniteSpace::unit(), x);
  const auto nl = lens_tensor(exact_inversion(noisy), exact_inversion(noisy));
  const auto ne = exact_inversion(tensor(noisy, noisy));
  EXPECT_GT(kl_divergence(ne.apply(corr, 1), nl.apply(corr, 1)), 1e-6);
}

TEST(Lens, CompositePolicyIsStrictIfEitherPartIs) {
  fx::F1 f;
  const auto c = exact_inversion(OpenModel::pure(f.c), SupportPolicy::lenient);
  const auto d = exact_inversion(OpenModel::pure(f.d));
  EXPECT_EQ(lens_seq_compose(d, c).policy(), SupportPolicy::strict);
  EXPECT_EQ(lens_seq_compose(d.with_policy(SupportPolicy::lenient), c).policy(),
            SupportPolicy::lenient);
  EXPECT_EQ(lens_tensor(c, d).policy(), SupportPolicy::strict);
}

TEST(Lens, CupAndCap) {
  const auto a = FiniteSpace::indexed("A", 3);
  const auto cu = lens_cup(a);
  EXPECT_EQ(cu.row(Measure::unit(), 4)[0], 1.0);
  EXPECT_FALSE(cu.in_support(Measure::unit(), 1));
  const auto ca = lens_cap(a);
  const Measure r = ca.row(Measure::uniform(FiniteSpace::product(a, a)), 0);
  EXPECT_EQ(r[0], 1.0);
  EXPECT_EQ(r[1], 0.0);
}

TEST(Lens, IdentityLens) {
  const auto a = FiniteSpace::indexed("A", 3);
  const auto id = identity_lens(a);
  const Measure pi(a, {0.2, 0.3, 0.5});
  EXPECT_EQ(id.apply(pi, 2), Measure::dirac(a, 2));
}
