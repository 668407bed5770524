#include <gtest/gtest.h>

#include <cmath>

#include "autobayes/errors.hpp"
#include "autobayes/families.hpp"
#include "autobayes/param.hpp"
#include "autobayes/random_models.hpp"
#include "autobayes/scenarios.hpp"
#include "oracles.hpp"

using namespace autobayes;

namespace {

// Row-softmax kernel X ~> Y; with a table the inversion ignores theta.
ParameterizedGame softmax_kernel(const FiniteSpace& xs, const FiniteSpace& ys, const std::string& label,
                                 std::optional<Kernel> table) {
  ParameterizedGame g;
  for (std::size_t x = 0; x < xs.size(); ++x) g.params.add_softmax(label + std::to_string(x), ys.size());
  g.unobserved = xs;
  g.observed = ys;
  g.build = [xs, ys, table](std::span<const double> theta) {
    std::vector<double> w;
    for (std::size_t x = 0; x < xs.size(); ++x) {
      const auto r = softmax(theta.subspan(x * ys.size(), ys.size()));
      w.insert(w.end(), r.begin(), r.end());
    }
    const auto m = OpenModel::pure(Kernel(xs, ys, std::move(w)));
    if (table) return StatisticalGame(table_lens(m, *table), EnergyFn::neg_log_likelihood(m), EntropyFn::zero());
    return vfe_game(m);
  };
  return g;
}

std::vector<double> normals(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.normal();
  return v;
}

}  // namespace

TEST(ParamSpace, LabelsBoundsAndBlocks) {
  ParamSpace p;
  p.add("mu", std::pair{-1.0, 1.0}).add_softmax("alpha", 3);
  EXPECT_EQ(p.dimension(), 4u);
  EXPECT_EQ(p.labels()[2], "alpha[1]");
  EXPECT_EQ(p.softmax_blocks().at(0).offset, 1u);
  EXPECT_THROW(p.add("mu"), InvalidArgument);
  EXPECT_THROW(p.add("nu", std::pair{1.0, 0.0}), InvalidArgument);
  const std::vector<double> theta{3.0, 0, 0, 0};
  EXPECT_EQ(p.clamp(theta)[0], 1.0);
  EXPECT_THROW(p.clamp(std::vector<double>{1.0}), InvalidArgument);

  const ParamSpace both = ParamSpace::concat(p, p);
  EXPECT_EQ(both.dimension(), 8u);
  EXPECT_EQ(both.labels()[4], "mu#2");
  EXPECT_EQ(both.softmax_blocks().at(1).offset, 5u);
  EXPECT_EQ(ParamSpace().dimension(), 0u);
}

TEST(Param, FdGradientOfKnownFunction) {
  const auto f = [](std::span<const double> t) { return t[0] * t[0] * t[1] + std::sin(t[1]); };
  const std::vector<double> x{0.7, -1.3};
  const auto g = fd_gradient(f, x);
  EXPECT_NEAR(g[0], 2 * 0.7 * -1.3, 1e-9);
  EXPECT_NEAR(g[1], 0.49 + std::cos(-1.3), 1e-9);
  EXPECT_THROW(fd_gradient([](std::span<const double>) { return kInf; }, x), NonFiniteLoss);
}

TEST(Param, AtChecksDimensionAndBoundaries) {
  const auto xs = FiniteSpace::indexed("X", 2), ys = FiniteSpace::indexed("Y", 3);
  auto g = softmax_kernel(xs, ys, "t", std::nullopt);
  EXPECT_THROW(g.at(std::vector<double>(5, 0.0)), InvalidArgument);
  g.observed = xs;
  EXPECT_THROW(g.at(std::vector<double>(6, 0.0)), BoundaryMismatch);
}

TEST(Param, SeqComposeOrdersPhiThenTheta) {
  const auto xs = FiniteSpace::indexed("X", 2), ys = FiniteSpace::indexed("Y", 2),
             zs = FiniteSpace::indexed("Z", 3);
  const auto c = softmax_kernel(xs, ys, "theta", std::nullopt);
  const auto d = softmax_kernel(ys, zs, "phi", std::nullopt);
  const auto dc = pgame_seq_compose(d, c);
  EXPECT_EQ(dc.params.dimension(), 10u);
  EXPECT_EQ(dc.params.labels()[0], "phi0[0]");
  EXPECT_EQ(dc.params.labels()[6], "theta0[0]");
  EXPECT_THROW(pgame_seq_compose(c, d), BoundaryMismatch);
  const auto t = pgame_tensor(c, d);
  EXPECT_EQ(t.params.labels()[0], "theta0[0]");
  EXPECT_EQ(t.unobserved, FiniteSpace::product(xs, ys));
}

TEST(Param, GradientOfSoftmaxPriorMatchesClosedForm) {
  // F of a softmax prior then an exact likelihood is -log sum_k softmax(psi)_k w_k(y)
  Rng rng(9);
  const auto ts = FiniteSpace::indexed("T", 3), ys = FiniteSpace::indexed("Y", 4);
  const auto lik = random_model(rng, ts, FiniteSpace::unit(), ys);
  const auto g = pgame_seq_compose(constant_pgame(vfe_game(lik)), softmax_prior_pgame(ts, "psi"));
  const auto psi = normals(rng, 3);
  for (std::size_t y = 0; y < 4; ++y) {
    const auto f = [&](const std::vector<double>& p) {
      const auto q = softmax(p);
      double ev = 0;
      for (std::size_t k = 0; k < 3; ++k) ev += q[k] * lik.weight(k, 0, y);
      return -std::log(ev);
    };
    const auto expected = oracle::numeric_gradient(f, psi);
    const auto got = grad_fd(g, psi, Measure::unit(), y);
    EXPECT_LE(oracle::max_diff(got, expected), 1e-7);
    EXPECT_NEAR(eval_loss(g, psi, Measure::unit(), y), f(psi), 1e-12);
  }
}

TEST(Param, LaxnessBookkeeping) {
  Rng rng(13);
  for (int trial = 0; trial < 6; ++trial) {
    const auto xs = random_space(rng, "X", 2, 3), ys = random_space(rng, "Y", 2, 3),
               zs = random_space(rng, "Z", 2, 3);
    const bool table = trial % 2 == 0;
    const auto c = softmax_kernel(xs, ys, "theta", std::nullopt);
    const auto d = softmax_kernel(ys, zs, "phi", table ? std::optional(random_kernel(rng, zs, ys)) : std::nullopt);
    const auto phi = normals(rng, d.params.dimension());
    const auto theta = normals(rng, c.params.dimension());
    const Measure prior = random_measure(rng, xs);
    const auto rep = laxness_report(d, c, phi, theta, prior, 0);
    for (std::size_t i = 0; i < rep.point.size(); ++i)
      EXPECT_NEAR(rep.composed_gradient[i] + rep.laxness[i], rep.full_gradient[i], 1e-12);
    EXPECT_TRUE(rep.phi_laxness_ok);
    EXPECT_LE(rep.phi_laxness_residual, kTolLaxness);
    if (table) {
      for (std::size_t i = phi.size(); i < rep.point.size(); ++i) EXPECT_NEAR(rep.laxness[i], 0.0, kTolLaxness);
    }
  }
}

TEST(Param, MeanLossNeedsData) {
  const auto ts = FiniteSpace::indexed("T", 2);
  const auto g = softmax_prior_pgame(ts, "psi");
  EXPECT_THROW(mean_loss(g, std::vector<double>{0, 0}, Measure::unit(), {}), InvalidArgument);
  const std::vector<std::size_t> data{0, 1, 1};
  const std::vector<double> psi{0.0, 0.0};
  EXPECT_NEAR(mean_loss(g, psi, Measure::unit(), data), std::log(2.0), 1e-12);
}
