// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "algebra.hpp"
#include "autobayes/dsl/elaborate.hpp"
#include "autobayes/dsl/format.hpp"
#include "autobayes/dsl/parser.hpp"
#include "autobayes/families.hpp"
#include "autobayes/game.hpp"
#include "autobayes/lens.hpp"
#include "autobayes/optimize.hpp"
#include "autobayes/random_models.hpp"
#include "autobayes/scenarios.hpp"
#include "autobayes/verify.hpp"
#include "oracles.hpp"
#include "program_gen.hpp"

using namespace autobayes;

namespace {

struct Outcome {
  bool ok = true;
  double worst = 0.0;
  std::string detail;
};

void track(Outcome& o, double residual, double tol) {
  if (std::isnan(residual) || !(residual <= tol)) o.ok = false;
  if (std::isnan(residual)) residual = INFINITY;
  o.worst = std::max(o.worst, residual);
}

FiniteSpace latent(Rng& rng, const std::string& label) {
  const auto n = rng.index(1, 3);
  return n == 1 ? FiniteSpace::unit() : FiniteSpace::indexed(label, n);
}

// 1. Inversions chain in reverse.
Outcome chain_rule() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  for (std::uint64_t t = 0; t < 200; ++t) {
    Rng rng(trial_seed(1, t));
    const auto xs = random_space(rng, "X", 2, 6), ys = random_space(rng, "Y", 2, 6),
               zs = random_space(rng, "Z", 2, 6);
    const auto la = latent(rng, "A"), lb = latent(rng, "B");
    const auto c = random_model(rng, xs, la, ys, 0.3);
    const auto d = random_model(rng, ys, lb, zs, 0.3);
    const auto prior = random_measure(rng, xs);
    const auto composite = lens_seq_compose(exact_inversion(d), exact_inversion(c));
    const auto direct = exact_inversion(seq_compose(d, c));
    const auto pi = oracle::weights(prior);
    for (std::size_t z = 0; z < zs.size(); ++z) {
      // brute-force posterior over (x, a, y, b)
      oracle::Vec post;
      double ev = 0;
      for (std::size_t x = 0; x < xs.size(); ++x)
        for (std::size_t a = 0; a < la.size(); ++a)
          for (std::size_t y = 0; y < ys.size(); ++y)
            for (std::size_t b = 0; b < lb.size(); ++b) {
              post.push_back(pi[x] * c.weight(x, a, y) * d.weight(y, b, z));
              ev += post.back();
            }
      if (ev <= 0) continue;
      for (auto& v : post) v /= ev;
      track(o, oracle::max_diff(oracle::weights(composite.apply(prior, z)), post), 1e-9);
      track(o, oracle::max_diff(oracle::weights(direct.apply(prior, z)), post), 1e-9);
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (secs >= 5.0) o.ok = false;
  char buf[64];
  std::snprintf(buf, sizeof buf, "200 trials in %.2fs", secs);
  o.detail = buf;
  return o;
}

// Reference free energy: sum_{x,a} q (log q - log pi(x) - log c(a, y | x)).
double vfe_oracle(const OpenModel& c, const oracle::Vec& pi, const oracle::Vec& q, std::size_t y) {
  const std::size_t nl = c.latent().size();
  double f = 0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i] == 0) continue;
    const std::size_t x = i / nl, a = i % nl;
    f += q[i] * (std::log(q[i]) - std::log(pi[x]) - std::log(c.weight(x, a, y)));
  }
  return f;
}

// 2. The equivalent forms of the variational free energy.
Outcome vfe_forms_check() {
  Outcome o;
  {
    const auto xs = FiniteSpace::make("X", {"x0", "x1"}), ys = FiniteSpace::make("Y", {"y0", "y1"});
    const auto c = OpenModel::pure(Kernel::from_rows(xs, ys, {{0.8, 0.2}, {0.2, 0.8}}));
    const auto lens = table_lens(c, Kernel::from_rows(ys, xs, {{0.5, 0.5}, {0.5, 0.5}}));
    const auto f = vfe_forms(lens, Measure::uniform(xs), 0);
    for (double v : {f.definition, f.relative, f.joint, f.helmholtz}) track(o, std::abs(v - std::log(2.5)), 1e-9);
    char buf[80];
    std::snprintf(buf, sizeof buf, "noisy channel F = %.9f", f.definition);
    o.detail = buf;
  }
  for (std::uint64_t t = 0; t < 200; ++t) {
    Rng rng(trial_seed(2, t));
    const auto xs = random_space(rng, "X", 2, 5), ys = random_space(rng, "Y", 2, 5);
    const auto c = random_model(rng, xs, latent(rng, "A"), ys);
    const auto table = random_kernel(rng, ys, FiniteSpace::product(xs, c.latent()));
    const auto lens = table_lens(c, table);
    const auto prior = random_measure(rng, xs);
    const auto y = rng.index(0, ys.size() - 1);
    oracle::Vec q;
    for (std::size_t j = 0; j < table.cols(); ++j) q.push_back(table(y, j));
    const double ref = vfe_oracle(c, oracle::weights(prior), q, y);
    const auto f = vfe_forms(lens, prior, y);
    for (double v : {f.definition, f.relative, f.joint, f.helmholtz}) track(o, std::abs(v - ref), 1e-9);
  }
  return o;
}

// 3. Free energies compose by the chain rule.
Outcome fe_chain() {
  Outcome o;
  // even trials are three-factor, odd trials two-factor: 100 of each
  const auto r = run_suite("fe-chain", 200, 3);
  track(o, r.max_residual, 1e-9);
  o.ok = o.ok && r.ok();
  o.detail = std::to_string(r.passed) + "/" + std::to_string(r.trials) + " composites";
  return o;
}

// 4. Prior game then model recovers the variational free energy.
Outcome prior_recovery() {
  Outcome o;
  for (std::uint64_t t = 0; t < 100; ++t) {
    Rng rng(trial_seed(4, t));
    const auto xs = random_space(rng, "X", 2, 5), ys = random_space(rng, "Y", 2, 5);
    const auto c = random_model(rng, xs, latent(rng, "A"), ys);
    const bool exact = rng.coin();
    const auto table = random_kernel(rng, ys, FiniteSpace::product(xs, c.latent()));
    const auto lens = exact ? exact_inversion(c) : table_lens(c, table);
    const auto prior = random_measure(rng, xs);
    const auto g = game_seq_compose(vfe_game(lens), prior_game(OpenModel::distribution(prior)));
    for (std::size_t y = 0; y < ys.size(); ++y) {
      oracle::Vec q;
      if (exact) {
        q = oracle::posterior(c, oracle::weights(prior), y);
      } else {
        for (std::size_t j = 0; j < table.cols(); ++j) q.push_back(table(y, j));
      }
      const double ref = vfe_oracle(c, oracle::weights(prior), q, y);
      track(o, std::abs(free_energy(g, Measure::unit(), y) - ref), 1e-9);
    }
  }
  return o;
}

// 5. Exact inversion collapses F to the surprisal on the mixture scenario.
Outcome exact_collapse() {
  Outcome o;
  ScenarioSpec spec;
  spec.name = "gmm";
  const auto s = build_gmm(spec);
  const auto model = s.game.at(s.theta0).lens.model();
  for (std::size_t y = 0; y < s.game.observed.size(); ++y) {
    double p = 0;
    for (std::size_t l = 0; l < model.latent().size(); ++l) p += model.weight(0, l, y);
    track(o, std::abs(eval_loss(s.game, s.theta0, s.prior, y) + std::log(p)), 1e-9);
  }
  o.detail = std::to_string(s.game.observed.size()) + " grid points";
  return o;
}

// 6. Laxness of the tensor is the mutual information.
Outcome lax_tensor() {
  Outcome o;
  const auto a = FiniteSpace::indexed("X", 2), b = FiniteSpace::indexed("W", 2);
  const auto gap = [&](const Measure& joint) {
    const auto da = exact_inversion(discard(a)), db = exact_inversion(discard(b));
    const auto g = game_tensor(StatisticalGame(da, EnergyFn::zero(da.model()), EntropyFn::shannon_of_inversion(da)),
                               StatisticalGame(db, EnergyFn::zero(db.model()), EntropyFn::shannon_of_inversion(db)));
    const auto exact = exact_inversion(g.lens.model());
    return g.entropy(joint, 0) - oracle::entropy(oracle::weights(exact.apply(joint, 0)));
  };
  const Measure corr(FiniteSpace::product(a, b), {0.5, 0.0, 0.0, 0.5});
  const double g = gap(corr);
  track(o, std::abs(g - std::log(2.0)), 1e-9);
  for (std::uint64_t t = 0; t < 50; ++t) {
    Rng rng(trial_seed(6, t));
    const auto pa = oracle::weights(random_measure(rng, a)), pb = oracle::weights(random_measure(rng, b));
    track(o, std::abs(gap(Measure(corr.space(), {pa[0] * pb[0], pa[0] * pb[1], pa[1] * pb[0], pa[1] * pb[1]}))), 1e-9);
  }
  const auto r = run_suite("lax-tensor", 200, 6);
  o.ok = o.ok && r.ok();
  char buf[96];
  std::snprintf(buf, sizeof buf, "correlated gap %.12f, random joints %zu/%zu", g, r.passed, r.trials);
  o.detail = buf;
  return o;
}

// Row-softmax kernel game with an exact or fixed-table inversion.
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

// 7. Gradients: analytic against finite differences, and the laxness blocks.
Outcome gradients() {
  Outcome o;
  double rel = 0, theta_block = 0, phi_block = 0;
  const char* names[] = {"gmm", "em", "vbem", "bdl"};
  for (std::uint64_t t = 0; t < 50; ++t) {
    Rng rng(trial_seed(7, t));
    ScenarioSpec spec;
    spec.name = names[t % 4];
    spec.seed = rng.bits();
    spec.grid_size = 16;
    spec.shannon = rng.coin();
    spec.components = rng.index(2, 3);
    const auto s = build_scenario(spec);
    const auto theta = normals(rng, s.game.params.dimension());
    const auto y = s.data[rng.index(0, s.data.size() - 1)];
    const auto f = [&](const oracle::Vec& th) { return eval_loss(s.game, th, s.prior, y); };
    const auto fd = oracle::numeric_gradient(f, theta, 1e-5);
    const auto an = s.game.analytic_gradient(theta, s.prior, y);
    double num = 0, den = 1e-6;
    for (std::size_t i = 0; i < fd.size(); ++i) {
      num = std::max(num, std::abs(fd[i] - an[i]));
      den = std::max(den, std::abs(an[i]));
    }
    track(o, num / den, 1e-4);
    rel = std::max(rel, num / den);

    const auto xs = random_space(rng, "X", 2, 3), ys = random_space(rng, "Y", 2, 3),
               zs = random_space(rng, "Z", 2, 3);
    const auto c = softmax_kernel(xs, ys, "theta", std::nullopt);
    const auto d = softmax_kernel(ys, zs, "phi", random_kernel(rng, zs, ys));
    const auto phi = normals(rng, d.params.dimension());
    const auto th = normals(rng, c.params.dimension());
    const auto prior = random_measure(rng, xs);
    const auto z = rng.index(0, zs.size() - 1);
    const auto rep = laxness_report(d, c, phi, th, prior, z);
    // the full gradient computed here from scratch
    std::vector<double> point = phi;
    point.insert(point.end(), th.begin(), th.end());
    const auto full = oracle::numeric_gradient(
        [&](const oracle::Vec& p) {
          const auto dc = pgame_seq_compose(d, c);
          return eval_loss(dc, p, prior, z);
        },
        point, 1e-5);
    for (std::size_t i = phi.size(); i < point.size(); ++i) {
      const double r = std::abs(rep.composed_gradient[i] - full[i]);
      track(o, r, kTolLaxness);
      theta_block = std::max(theta_block, r);
    }
    track(o, rep.phi_laxness_residual, kTolLaxness);
    phi_block = std::max(phi_block, rep.phi_laxness_residual);
  }
  char buf[128];
  std::snprintf(buf, sizeof buf, "relative %.2g, theta block %.2g, phi laxness %.2g", rel, theta_block, phi_block);
  o.detail = buf;
  return o;
}

// 8. EM never lowers the marginal likelihood, and lands where gradient descent does.
Outcome em() {
  Outcome o;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    ScenarioSpec spec;
    spec.name = "em";
    spec.components = 2;
    spec.seed = seed;
    const auto s = build_em(spec);
    Rng rng(trial_seed(8, seed));
    const auto t = em_loop(s.game, s.prior, s.data, normals(rng, s.game.params.dimension()), 50);
    for (std::size_t i = 1; i < t.log_likelihoods.size(); ++i)
      track(o, std::max(0.0, t.log_likelihoods[i - 1] - t.log_likelihoods[i]), 1e-8);
  }
  ScenarioSpec spec;
  spec.name = "gmm";
  spec.seed = 8;
  const auto s = build_gmm(spec);
  const auto e = em_loop(s.game, s.prior, s.data, s.theta0, 500);
  const auto g = gd_train(s.game, s.prior, s.data, s.theta0, 1.0, 3000);
  const auto a = softmax(e.thetas.back()), b = softmax(g.thetas.back());
  double diff = 0;
  for (std::size_t k = 0; k < a.size(); ++k) diff = std::max(diff, std::abs(a[k] - b[k]));
  if (!(diff <= 1e-3)) o.ok = false;
  char buf[96];
  std::snprintf(buf, sizeof buf, "20 seeds x 50 steps, alpha gap %.2g", diff);
  o.detail = buf;
  return o;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 9. DSL round trip, elaboration soundness and single-fault diagnostics.
Outcome dsl_roundtrip() {
  using namespace autobayes::dsl;
  Outcome o;
  std::size_t files = 0, faults = 0;
  std::vector<ModelAst> programs;
  for (const auto& e : std::filesystem::directory_iterator(AUTOBAYES_MODELS_DIR)) {
    if (e.path().extension() != ".abm") continue;
    const auto r = parse(slurp(e.path()));
    if (!r.ast) {
      o.ok = false;
      continue;
    }
    ++files;
    if (e.path().filename() != "mismatch.abm") programs.push_back(*r.ast);
  }
  for (std::uint64_t seed = 0; seed < 200; ++seed) programs.push_back(gen::Generator(seed).program().ast);
  for (const auto& ast : programs) {
    const std::string text = format_ast(ast);
    const auto back = parse(text);
    if (!back.ast || !equivalent(*back.ast, ast) || format_ast(*back.ast) != text) o.ok = false;
    const auto el = elaborate(ast);
    if (!el.ok() || !el.model) {
      o.ok = false;
      continue;
    }
    // invariants: nonnegative finite weights shaped by the boundaries
    const auto& k = el.model->kernel();
    if (k.rows() != el.model->unobserved().size() ||
        k.cols() != el.model->latent().size() * el.model->observed().size())
      o.ok = false;
    for (std::size_t x = 0; x < k.rows(); ++x)
      for (std::size_t j = 0; j < k.cols(); ++j)
        if (!(k(x, j) >= 0) || !std::isfinite(k(x, j))) o.ok = false;
  }
  Rng rng(9);
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    auto p = gen::Generator(seed).program();
    if (!gen::inject_boundary_fault(p.ast, rng)) continue;
    ++faults;
    const auto el = elaborate(p.ast);
    std::size_t boundary = 0;
    for (const auto& d : el.diagnostics) boundary += d.is_boundary();
    if (el.diagnostics.size() != 1 || boundary != 1) o.ok = false;
  }
  o.detail = std::to_string(files) + " corpus files, 200 generated, " + std::to_string(faults) + " faulted";
  return o;
}

// 10. Structural identities of open models and lenses.
Outcome structure() {
  Outcome o;
  for (std::uint64_t t = 0; t < 100; ++t) {
    Rng rng(trial_seed(10, t));
    auto sp = [&](const char* l) { return random_space(rng, l, 1, 3); };
    const auto w = sp("W"), x = sp("X"), y = sp("Y"), z = sp("Z"), w2 = sp("V"), x2 = sp("U");
    const auto p = random_model(rng, w, latent(rng, "A"), x, 0.3);
    const auto q = random_model(rng, x, latent(rng, "B"), y, 0.3);
    const auto r = random_model(rng, y, latent(rng, "C"), z, 0.3);
    const auto p2 = random_model(rng, w2, latent(rng, "D"), x2);
    const auto q2 = random_model(rng, x2, latent(rng, "E"), sp("T"));
    track(o, algebra::associativity(p, q, r), 1e-9);
    track(o, algebra::unitality(p), 1e-9);
    track(o, algebra::interchange(p, p2, q, q2), 1e-9);
    track(o, algebra::snake(x), 1e-9);

    // lens composition is associative on every observation
    const auto lp = exact_inversion(p, SupportPolicy::lenient), lq = exact_inversion(q, SupportPolicy::lenient),
               lr = exact_inversion(r, SupportPolicy::lenient);
    const auto left = lens_seq_compose(lr, lens_seq_compose(lq, lp));
    const auto right = lens_seq_compose(lens_seq_compose(lr, lq), lp);
    const auto prior = random_measure(rng, w);
    for (std::size_t obs = 0; obs < z.size(); ++obs)
      track(o, oracle::max_diff(oracle::weights(left.row(prior, obs)), oracle::weights(right.row(prior, obs))), 1e-9);
  }
  return o;
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"bayesian chain rule", chain_rule},
      {"free energy forms agree", vfe_forms_check},
      {"free energy chain rule", fe_chain},
      {"prior game recovers VFE", prior_recovery},
      {"exact inversion collapse", exact_collapse},
      {"lax tensor equals mutual information", lax_tensor},
      {"gradient checks", gradients},
      {"EM monotone and agrees with GD", em},
      {"DSL round trip and soundness", dsl_roundtrip},
      {"structural algebra", structure},
  };
  int failed = 0, i = 0;
  for (const auto& [name, run] : criteria) {
    ++i;
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.ok = false;
      o.detail = std::string("threw: ") + e.what();
    }
    failed += !o.ok;
    std::printf("[%s] %2d %-38s max residual %.3g%s%s\n", o.ok ? "PASS" : "FAIL", i, name, o.worst,
                o.detail.empty() ? "" : "; ", o.detail.c_str());
  }
  std::printf("%d/10 criteria passed\n", 10 - failed);
  return failed == 0 ? 0 : 1;
}
