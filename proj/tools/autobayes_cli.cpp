#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <regex>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "autobayes/dsl/elaborate.hpp"
#include "autobayes/errors.hpp"
#include "autobayes/families.hpp"
#include "autobayes/scenarios.hpp"
#include "autobayes/verify.hpp"
#include "autobayes/version.hpp"

namespace ab = autobayes;
namespace dsl = autobayes::dsl;
using json = nlohmann::ordered_json;

namespace {

// Exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// Exit code 1, already reported.
struct Reported {};

struct Globals {
  std::string format = "text";
  bool no_timing = false;
  std::optional<std::uint64_t> seed;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
};

// Finite numbers travel as marked strings and are unquoted by dump_doc, so
// every double is printed with %.17g.
constexpr char kNumMark = '\x01';

std::string g17(double v);

json num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return std::string(1, kNumMark) + g17(v);
}

std::string dump_doc(const json& doc) {
  static const std::regex marked("\"\\\\u0001([^\"]*)\"");
  return std::regex_replace(doc.dump(2), marked, "$1");
}

json nums(std::span<const double> v) {
  json a = json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

std::string g17(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string g10(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::uint64_t parse_u64(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &used, 0);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw UsageError(what + " is not an unsigned integer: '" + s + "'");
  return v;
}

std::uint64_t resolve_seed(const Globals& g) {
  if (g.seed) return *g.seed;
  if (const char* env = std::getenv("AUTOBAYES_SEED")) return parse_u64(env, "AUTOBAYES_SEED");
  return 0;
}

double tolerance_scale() {
  const char* env = std::getenv("AUTOBAYES_TOL_SCALE");
  if (!env) return 1.0;
  const std::string s(env);
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size() || std::isnan(v)) {
    throw UsageError("AUTOBAYES_TOL_SCALE is not a number: '" + s + "'");
  }
  return v;
}

void emit(const Globals& g, std::uint64_t seed, const json& result, const std::string& text,
          const std::string& out_path = {}) {
  json doc;
  doc["meta"] = {{"seed", seed},
                 {"version", ab::kVersion},
                 {"ms", g.no_timing ? 0
                                    : std::chrono::duration_cast<std::chrono::milliseconds>(
                                          std::chrono::steady_clock::now() - g.start)
                                          .count()}};
  doc["result"] = result;
  if (g.format == "json") {
    std::cout << dump_doc(doc) << "\n";
  } else {
    std::cout << text;
  }
  if (!out_path.empty()) {
    std::ofstream f(out_path);
    if (!f) throw UsageError("cannot write '" + out_path + "'");
    f << dump_doc(doc) << "\n";
    if (!f) throw UsageError("cannot write '" + out_path + "'");
  }
}

json diagnostic_json(const dsl::Diagnostic& d) {
  json j = {{"severity", dsl::severity_name(d.severity)},
            {"line", d.span.line},
            {"col", d.span.col},
            {"message", d.message}};
  if (d.is_boundary()) {
    j["expected"] = d.expected;
    j["actual"] = d.actual;
  }
  return j;
}

struct Loaded {
  std::string path;
  dsl::Elaborated e;
};

Loaded load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot read '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return Loaded{path, dsl::elaborate_source(ss.str())};
}

void report_diagnostics(const Loaded& l) {
  for (const auto& d : l.e.diagnostics) std::cerr << dsl::render(l.path, d) << "\n";
}

// Elaborated model or exit 1 after printing the diagnostics.
void require_ok(const Loaded& l) {
  if (!l.e.ok() || !l.e.model) {
    report_diagnostics(l);
    throw Reported{};
  }
}

ab::Measure choose_prior(const dsl::Elaborated& e, const std::string& name,
                         const ab::FiniteSpace& space) {
  if (!name.empty()) {
    auto it = e.priors.find(name);
    if (it == e.priors.end()) throw UsageError("no prior named '" + name + "'");
    if (!(it->second.space() == space)) {
      throw ab::BoundaryMismatch("prior '" + name + "' lives on " + it->second.space().describe() +
                                 " but the model expects " + space.describe());
    }
    return it->second;
  }
  if (space.is_unit()) return ab::Measure::unit();
  std::optional<ab::Measure> found;
  for (const auto& [n, m] : e.priors) {
    if (!(m.space() == space)) continue;
    if (found) throw UsageError("several priors fit " + space.describe() + "; pass --prior");
    found = m;
  }
  if (!found) throw UsageError("the model needs a prior on " + space.describe() + "; pass --prior");
  return *found;
}

ab::BayesianLens file_lens(const dsl::Elaborated& e) {
  if (e.game) return e.game->at(e.initial_params).lens;
  return ab::exact_inversion(*e.model);
}

// "y0,y1" or "(a,b),(c,d)": commas inside parentheses belong to a point.
std::vector<std::string> split_points(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  int depth = 0;
  for (char c : s) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && depth == 0) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::size_t find_obs(const ab::FiniteSpace& space, const std::string& label) {
  auto idx = space.find_point(label);
  if (!idx) throw UsageError("'" + label + "' is not a point of " + space.describe());
  return *idx;
}

std::vector<std::size_t> data_indices(const dsl::Elaborated& e,
                                      const std::vector<std::string>& args) {
  if (args.empty()) {
    if (e.data.empty()) throw UsageError("no data: pass --data or declare data in the file");
    return e.data;
  }
  std::vector<std::size_t> out;
  for (const auto& a : args) {
    for (const auto& p : split_points(a)) out.push_back(find_obs(e.model->observed(), p));
  }
  return out;
}

json space_json(const ab::FiniteSpace& s) { return {{"space", s.describe()}, {"size", s.size()}}; }

// ---------------------------------------------------------------- check

int cmd_check(const Globals& g, const std::string& path) {
  const Loaded l = load(path);
  const auto seed = resolve_seed(g);
  if (!l.e.ok() || !l.e.model) {
    report_diagnostics(l);
    if (g.format == "json") {
      json diags = json::array();
      for (const auto& d : l.e.diagnostics) diags.push_back(diagnostic_json(d));
      emit(g, seed, {{"ok", false}, {"diagnostics", diags}}, "");
    }
    return 1;
  }
  const auto& m = *l.e.model;
  json r = {{"ok", true},
            {"unobserved", space_json(m.unobserved())},
            {"latent", space_json(m.latent())},
            {"observed", space_json(m.observed())},
            {"markov", m.is_markov()}};
  std::ostringstream t;
  t << "unobserved " << m.unobserved().describe() << " (" << m.unobserved().size() << ")\n"
    << "latent     " << m.latent().describe() << " (" << m.latent().size() << ")\n"
    << "observed   " << m.observed().describe() << " (" << m.observed().size() << ")\n"
    << "markov     " << (m.is_markov() ? "yes" : "no") << "\n";
  if (l.e.game) {
    r["params"] = l.e.game->params.labels();
    t << "params     " << l.e.game->params.dimension() << "\n";
  }
  if (!l.e.data.empty()) {
    r["data"] = l.e.data.size();
    t << "data       " << l.e.data.size() << " points\n";
  }
  emit(g, seed, r, t.str());
  return 0;
}

// ---------------------------------------------------------------- invert

int cmd_invert(const Globals& g, const std::string& path, const std::string& prior_name,
               const std::string& obs_label, const std::string& policy) {
  const Loaded l = load(path);
  require_ok(l);
  const auto seed = resolve_seed(g);
  const auto& m = *l.e.model;
  const ab::Measure prior = choose_prior(l.e, prior_name, m.unobserved());
  const std::size_t obs = find_obs(m.observed(), obs_label);
  const auto pol = policy == "lenient" ? ab::SupportPolicy::lenient : ab::SupportPolicy::strict;
  const ab::BayesianLens lens = file_lens(l.e).with_policy(pol);
  const bool supported = lens.in_support(prior, obs);
  const ab::Measure row = lens.apply(prior, obs);

  const auto& space = row.space();
  json table = json::array();
  std::ostringstream t;
  t << "posterior on " << space.describe() << " given " << obs_label << "\n";
  for (std::size_t i = 0; i < row.size(); ++i) {
    table.push_back({{"point", space.point_label(i)}, {"weight", num(row[i])}});
    t << "  " << space.point_label(i) << "  " << g10(row[i]) << "\n";
  }
  json r = {{"observation", obs_label},
            {"policy", policy},
            {"in_support", supported},
            {"space", space.describe()},
            {"posterior", table}};
  if (!m.latent().is_unit() && !m.unobserved().is_unit()) {
    std::vector<std::size_t> keep(m.unobserved().atom_count());
    for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = i;
    const ab::Measure xm = ab::project(row, keep);
    json mt = json::array();
    t << "marginal on " << xm.space().describe() << "\n";
    for (std::size_t i = 0; i < xm.size(); ++i) {
      mt.push_back({{"point", xm.space().point_label(i)}, {"weight", num(xm[i])}});
      t << "  " << xm.space().point_label(i) << "  " << g10(xm[i]) << "\n";
    }
    r["marginal"] = mt;
  }
  if (!supported) t << "note: observation outside the support, uniform row\n";
  emit(g, seed, r, t.str());
  return 0;
}

// ---------------------------------------------------------------- loss

int cmd_loss(const Globals& g, const std::string& path, const std::string& prior_name,
             const std::vector<std::string>& data_args, const std::string& form) {
  const Loaded l = load(path);
  require_ok(l);
  const auto seed = resolve_seed(g);
  const auto& m = *l.e.model;
  const ab::Measure prior = choose_prior(l.e, prior_name, m.unobserved());
  const auto data = data_indices(l.e, data_args);
  const ab::BayesianLens lens = file_lens(l.e);
  const ab::StatisticalGame game =
      l.e.game ? l.e.game->at(l.e.initial_params) : ab::vfe_game(lens);

  std::vector<std::string> keys;
  if (form == "vfe") keys = {"definition", "relative", "joint", "helmholtz"};
  else keys = {form == "kl" ? "kl" : "free_energy"};
  std::vector<double> sums(keys.size(), 0.0);

  json points = json::array();
  std::ostringstream t;
  for (std::size_t y : data) {
    std::vector<double> v;
    if (form == "vfe") {
      const auto f = ab::vfe_forms(lens, prior, y);
      v = {f.definition, f.relative, f.joint, f.helmholtz};
    } else if (form == "kl") {
      v = {ab::kl_loss(lens, prior, y)};
    } else {
      v = {ab::free_energy(game, prior, y)};
    }
    json p = {{"obs", m.observed().point_label(y)}};
    t << m.observed().point_label(y);
    for (std::size_t k = 0; k < keys.size(); ++k) {
      p[keys[k]] = num(v[k]);
      sums[k] += v[k];
      t << "  " << keys[k] << "=" << g17(v[k]);
    }
    t << "\n";
    points.push_back(p);
  }
  json mean;
  t << "mean";
  for (std::size_t k = 0; k < keys.size(); ++k) {
    const double mu = sums[k] / static_cast<double>(data.size());
    mean[keys[k]] = num(mu);
    t << "  " << keys[k] << "=" << g17(mu);
  }
  t << "\n";
  emit(g, seed, {{"form", form}, {"points", points}, {"mean", mean}}, t.str());
  return 0;
}

// ---------------------------------------------------------------- train

struct TrainSetup {
  ab::ParameterizedGame game;
  std::vector<double> theta0;
  ab::Measure prior;
  std::vector<std::size_t> data;
  std::string source;
};

int cmd_train(const Globals& g, const std::string& path, const std::string& scenario,
              const std::string& prior_name, const std::vector<std::string>& data_args,
              const std::string& algo, int steps, double lr, const std::string& out_path) {
  if (path.empty() == scenario.empty()) throw UsageError("train needs a model file or --scenario");
  if (steps < 0) throw UsageError("--steps must be nonnegative");
  const auto seed = resolve_seed(g);
  std::optional<TrainSetup> setup;
  if (!scenario.empty()) {
    ab::ScenarioSpec spec;
    spec.name = scenario;
    spec.seed = seed;
    ab::Scenario s = ab::build_scenario(spec);
    setup = TrainSetup{s.game, s.theta0, s.prior, s.data, "scenario " + scenario};
  } else {
    const Loaded l = load(path);
    require_ok(l);
    if (!l.e.game || l.e.game->params.dimension() == 0) {
      throw ab::InvalidArgument("'" + path + "' declares no parameters to train");
    }
    setup = TrainSetup{*l.e.game, l.e.initial_params,
                       choose_prior(l.e, prior_name, l.e.game->unobserved),
                       data_indices(l.e, data_args), path};
  }
  auto& s = *setup;

  json r = {{"source", s.source}, {"algo", algo}, {"steps", steps}, {"lr", num(lr)},
            {"params", s.game.params.labels()}};
  std::vector<std::vector<double>> thetas;
  std::vector<double> losses;
  if (algo == "em") {
    const auto em = ab::em_loop(s.game, s.prior, s.data, s.theta0, steps);
    thetas = em.thetas;
    losses = em.free_energies;
    r["log_likelihoods"] = nums(em.log_likelihoods);
  } else if (steps == 0) {
    thetas = {s.theta0};
    losses = {ab::mean_loss(s.game, s.theta0, s.prior, s.data)};
  } else {
    const auto tr = algo == "ngd" ? ab::ngd_train(s.game, s.prior, s.data, s.theta0, lr, steps)
                                  : ab::gd_train(s.game, s.prior, s.data, s.theta0, lr, steps);
    thetas = tr.thetas;
    losses = tr.losses;
  }
  json th = json::array();
  for (const auto& t : thetas) th.push_back(nums(t));
  r["losses"] = nums(losses);
  r["thetas"] = th;
  r["initial_loss"] = num(losses.front());
  r["final_loss"] = num(losses.back());
  r["final_theta"] = nums(thetas.back());

  std::ostringstream t;
  t << s.source << ": " << algo << ", " << steps << " steps\n"
    << "initial loss " << g17(losses.front()) << "\n"
    << "final loss   " << g17(losses.back()) << "\n";
  const auto& labels = s.game.params.labels();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    t << "  " << labels[i] << " = " << g10(thetas.back()[i]) << "\n";
  }
  json dists = json::array();
  for (const auto& b : s.game.params.softmax_blocks()) {
    const auto p = ab::softmax(std::span<const double>(thetas.back()).subspan(b.offset, b.size));
    dists.push_back({{"offset", b.offset}, {"probabilities", nums(p)}});
    t << "  softmax[" << labels[b.offset] << "..] =";
    for (double x : p) t << " " << g10(x);
    t << "\n";
  }
  r["softmax"] = dists;
  emit(g, seed, r, t.str(), out_path);
  return 0;
}

// ---------------------------------------------------------------- verify

int cmd_verify(const Globals& g, const std::string& suite, std::size_t trials) {
  const auto seed = resolve_seed(g);
  const double scale = tolerance_scale();
  std::vector<std::string> names = suite == "all" ? ab::suite_names() : std::vector{suite};
  if (trials == 0) std::cerr << "warning: 0 trials requested, every suite passes vacuously\n";
  if (scale < 0) std::cerr << "warning: negative tolerance scale " << scale << "\n";

  json suites = json::array();
  std::ostringstream t;
  bool all = true;
  for (const auto& n : names) {
    const ab::SuiteReport rep = ab::run_suite(n, trials, seed, scale);
    all = all && rep.ok();
    suites.push_back({{"name", rep.name},
                      {"trials", rep.trials},
                      {"passed", rep.passed},
                      {"ok", rep.ok()},
                      {"tolerance", num(rep.tolerance)},
                      {"max_residual", num(rep.max_residual)},
                      {"notes", rep.notes}});
    t << (rep.ok() ? "PASS " : "FAIL ") << rep.name << "  " << rep.passed << "/" << rep.trials
      << "  max residual " << g10(rep.max_residual) << " (tol " << g10(rep.tolerance) << ")\n";
    for (const auto& note : rep.notes) t << "     " << note << "\n";
  }
  emit(g, seed, {{"suites", suites}, {"ok", all}}, t.str());
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  Globals g;
  CLI::App app{"autobayes: compositional Bayesian inversion and free-energy games"};
  app.set_version_flag("--version", ab::kVersion);
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--format", g.format, "Output format")
      ->check(CLI::IsMember({"text", "json"}));
  app.add_flag("--no-timing", g.no_timing, "Report 0 ms so output is byte-reproducible");
  app.add_option("--seed", g.seed, "Seed (overrides AUTOBAYES_SEED)");

  std::string file, prior, obs, policy = "strict", form = "vfe", algo = "gd", scenario, out,
                          suite = "all";
  std::vector<std::string> data;
  int steps = 100;
  double lr = 0.1;
  std::size_t trials = 200;

  auto* check = app.add_subcommand("check", "Parse and elaborate a model file");
  check->add_option("file", file, "Model file (.abm)")->required();

  auto* invert = app.add_subcommand("invert", "Exact or declared inversion at one observation");
  invert->add_option("file", file, "Model file (.abm)")->required();
  invert->add_option("--prior", prior, "Prior declared in the file");
  invert->add_option("--obs", obs, "Observed point, e.g. y1 or (a0,b1)")->required();
  invert->add_option("--policy", policy, "Out-of-support behaviour")
      ->check(CLI::IsMember({"strict", "lenient"}));

  auto* loss = app.add_subcommand("loss", "Evaluate losses at observations");
  loss->add_option("file", file, "Model file (.abm)")->required();
  loss->add_option("--prior", prior, "Prior declared in the file");
  loss->add_option("--data", data, "Observed points (repeatable, comma separated)");
  loss->add_option("--form", form, "vfe prints every equivalent form")
      ->check(CLI::IsMember({"vfe", "kl", "game"}));

  auto* train = app.add_subcommand("train", "Optimize the parameters of a game");
  train->add_option("file", file, "Model file (.abm) with param declarations");
  train->add_option("--scenario", scenario, "Built-in scenario instead of a file")
      ->check(CLI::IsMember({"gmm", "em", "vbem", "supervised", "bdl"}));
  train->add_option("--prior", prior, "Prior declared in the file");
  train->add_option("--data", data, "Observed points (default: the file's data)");
  train->add_option("--algo", algo, "Optimizer")->capture_default_str()->check(CLI::IsMember({"gd", "ngd", "em"}));
  train->add_option("--steps", steps, "Optimizer steps")->capture_default_str();
  train->add_option("--lr", lr, "Learning rate")->capture_default_str()->check(CLI::NonNegativeNumber);
  train->add_option("--out", out, "Also write the JSON document here");

  auto* verify = app.add_subcommand("verify", "Run the randomized property suites");
  std::vector<std::string> choices = ab::suite_names();
  choices.push_back("all");
  verify->add_option("--suite", suite, "Suite to run")->capture_default_str()->check(CLI::IsMember(choices));
  verify->add_option("--trials", trials, "Trials per suite")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (check->parsed()) return cmd_check(g, file);
    if (invert->parsed()) return cmd_invert(g, file, prior, obs, policy);
    if (loss->parsed()) return cmd_loss(g, file, prior, data, form);
    if (train->parsed()) return cmd_train(g, file, scenario, prior, data, algo, steps, lr, out);
    if (verify->parsed()) return cmd_verify(g, suite, trials);
  } catch (const Reported&) {
    return 1;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ab::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
