#include <cmath>
#include <memory>
#include <sstream>

#include "autobayes/dsl/elaborate.hpp"
#include "autobayes/dsl/format.hpp"
#include "autobayes/dsl/parser.hpp"
#include "autobayes/errors.hpp"
#include "autobayes/families.hpp"

namespace autobayes::dsl {

bool Elaborated::ok() const { return error_count() == 0; }

std::size_t Elaborated::error_count() const {
  std::size_t n = 0;
  for (const auto& d : diagnostics) n += d.severity == Severity::error;
  return n;
}

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

using Table = std::vector<std::vector<double>>;

struct AtomInfo {
  std::string name;
  bool prior = false;
  FiniteSpace in, out;
  bool typed = false;
  bool valid = false;
  bool unnormalized = false;
  Table rows;
  Span span;

  std::optional<Table> inversion;
  std::optional<EnergyDecl> energy;
  std::optional<EntropyDecl::Kind> entropy;
  bool param = false;
};

struct Typed {
  std::optional<OpenModel> model;
  std::optional<ParameterizedGame> game;
  std::vector<double> init;
  std::optional<FiniteSpace> in, out;
};

std::string where(Span s) { return std::to_string(s.line) + ":" + std::to_string(s.col); }

std::string fmt(double v) { return format_number(v); }

ParameterizedGame structural_game(const BayesianLens& lens) {
  return constant_pgame(
      StatisticalGame(lens, EnergyFn::zero(lens.model()), EntropyFn::zero()));
}

ParameterizedGame atom_game(const AtomInfo& a, std::vector<double>& init) {
  ParamSpace ps;
  const std::size_t ncols = a.out.size();
  if (a.param) {
    for (std::size_t r = 0; r < a.rows.size(); ++r) {
      ps.add_softmax(a.prior ? a.name : a.name + "[" + std::to_string(r) + "]", ncols);
      for (double w : a.rows[r]) init.push_back(std::log(w));
    }
  }
  auto info = std::make_shared<const AtomInfo>(a);
  ParameterizedGame g;
  g.params = ps;
  g.unobserved = a.in;
  g.observed = a.out;
  g.build = [info, ncols](std::span<const double> theta) {
    Table rows = info->rows;
    if (info->param) {
      for (std::size_t r = 0; r < rows.size(); ++r) {
        rows[r] = softmax(theta.subspan(r * ncols, ncols));
      }
    }
    const OpenModel m = OpenModel::pure(Kernel::from_rows(info->in, info->out, rows));
    const BayesianLens lens =
        info->inversion
            ? table_lens(m, Kernel::from_rows(info->out, info->in, *info->inversion))
            : exact_inversion(m, info->prior ? SupportPolicy::lenient : SupportPolicy::strict);
    const EnergyDecl::Kind ek = info->energy ? info->energy->kind : EnergyDecl::Kind::nll;
    EnergyFn energy = EnergyFn::zero(m);
    if (ek == EnergyDecl::Kind::nll) {
      energy = EnergyFn::neg_log_likelihood(m);
    } else if (ek == EnergyDecl::Kind::table) {
      std::vector<double> flat;
      for (const auto& row : info->energy->rows) flat.insert(flat.end(), row.begin(), row.end());
      energy = EnergyFn(info->in, FiniteSpace::unit(), info->out, std::move(flat));
    }
    const bool shannon = info->entropy.value_or(EntropyDecl::Kind::shannon) ==
                         EntropyDecl::Kind::shannon;
    EntropyFn entropy = shannon ? EntropyFn::shannon_of_inversion(lens) : EntropyFn::zero();
    return StatisticalGame(lens, std::move(energy), std::move(entropy));
  };
  return g;
}

class Elaborator {
 public:
  Elaborated run(const ModelAst& ast) {
    for (const auto& d : ast.decls) {
      if (const auto* s = std::get_if<SpaceDecl>(&d)) declare_space(*s);
    }
    for (const auto& d : ast.decls) {
      if (const auto* p = std::get_if<PriorDecl>(&d)) declare_prior(*p);
      if (const auto* k = std::get_if<KernelDecl>(&d)) declare_kernel(*k);
    }
    for (const auto& d : ast.decls) {
      std::visit(Overloaded{
                     [&](const InversionDecl& i) { annotate_inversion(i); },
                     [&](const EnergyDecl& e) { annotate_energy(e); },
                     [&](const EntropyDecl& e) { annotate_entropy(e); },
                     [&](const ParamDecl& p) { annotate_param(p); },
                     [](const auto&) {},
                 },
                 d);
    }

    Typed t;
    try {
      t = expr(ast.model);
    } catch (const Error& e) {
      error(ast.model.span, e.what());
      t = Typed{};
    }
    if (!out_.ok()) return std::move(out_);
    out_.model = t.model;
    if (game_layer_) {
      out_.game = t.game;
      out_.initial_params = t.init;
    }
    if (out_.model) {
      for (const auto& d : ast.decls) {
        if (const auto* dd = std::get_if<DataDecl>(&d)) resolve_data(*dd);
      }
    }
    return std::move(out_);
  }

 private:
  Elaborated out_;
  std::map<std::string, AtomInfo> atoms_;
  std::map<std::string, Span> declared_;
  bool game_layer_ = false;

  void error(Span s, std::string msg, std::string expected = {}, std::string actual = {}) {
    out_.diagnostics.push_back(
        Diagnostic{Severity::error, s, std::move(msg), std::move(expected), std::move(actual)});
  }

  bool fresh_name(const std::string& name, Span s) {
    auto [it, inserted] = declared_.emplace(name, s);
    if (!inserted) error(s, "'" + name + "' is already declared at " + where(it->second));
    return inserted;
  }

  std::optional<FiniteSpace> space_named(const std::string& name, Span s) {
    auto it = out_.spaces.find(name);
    if (it == out_.spaces.end()) {
      error(s, "undeclared space '" + name + "'");
      return std::nullopt;
    }
    return it->second;
  }

  std::optional<FiniteSpace> resolve(const Boundary& b) {
    std::vector<FiniteSpace> parts;
    for (const auto& a : b.atoms) {
      auto s = space_named(a, b.span);
      if (!s) return std::nullopt;
      parts.push_back(*s);
    }
    return FiniteSpace::product(parts);
  }

  void declare_space(const SpaceDecl& s) {
    if (!fresh_name(s.name, s.span)) return;
    try {
      out_.spaces.emplace(s.name, FiniteSpace::make(s.name, s.points));
    } catch (const Error& e) {
      error(s.span, "space '" + s.name + "': " + e.what());
    }
  }

  // First problem with a weight table, if any.
  std::optional<std::string> table_problem(const std::string& what, const Table& rows,
                                           std::size_t nrows, std::size_t ncols,
                                           bool allow_inf) {
    if (rows.size() != nrows) {
      return what + " has " + std::to_string(rows.size()) + " rows, expected " +
             std::to_string(nrows);
    }
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != ncols) {
        return "row " + std::to_string(r) + " of " + what + " has " +
               std::to_string(rows[r].size()) + " entries, expected " + std::to_string(ncols);
      }
      for (double w : rows[r]) {
        if (w < 0) return "negative weight " + fmt(w) + " in row " + std::to_string(r) + " of " + what;
        if (!allow_inf && !std::isfinite(w)) {
          return "non-finite weight in row " + std::to_string(r) + " of " + what;
        }
      }
    }
    return std::nullopt;
  }

  void check_weights(AtomInfo& a, const std::string& what) {
    if (auto p = table_problem(what, a.rows, a.in.size(), a.out.size(), false)) {
      error(a.span, *p);
      return;
    }
    if (!a.unnormalized) {
      for (std::size_t r = 0; r < a.rows.size(); ++r) {
        double sum = 0;
        for (double w : a.rows[r]) sum += w;
        if (std::abs(sum - 1.0) > kTolNorm) {
          error(a.span, (a.prior ? what : "row " + std::to_string(r) + " of " + what) +
                            " sums to " + fmt(sum) +
                            ", not 1; tag it 'unnormalized' if this is intended");
          return;
        }
      }
    }
    a.valid = true;
  }

  void declare_prior(const PriorDecl& p) {
    if (!fresh_name(p.name, p.span)) return;
    AtomInfo a;
    a.name = p.name;
    a.prior = true;
    a.span = p.span;
    a.unnormalized = p.unnormalized;
    a.rows = {p.weights};
    if (auto s = resolve(p.on)) {
      a.in = FiniteSpace::unit();
      a.out = *s;
      a.typed = true;
      check_weights(a, "prior '" + p.name + "'");
      if (a.valid) out_.priors.emplace(p.name, Measure(a.out, p.weights));
    }
    atoms_.emplace(p.name, std::move(a));
  }

  void declare_kernel(const KernelDecl& k) {
    if (!fresh_name(k.name, k.span)) return;
    AtomInfo a;
    a.name = k.name;
    a.span = k.span;
    a.unnormalized = k.unnormalized;
    a.rows = k.rows;
    auto from = resolve(k.from);
    auto to = resolve(k.to);
    if (from && to) {
      a.in = *from;
      a.out = *to;
      a.typed = true;
      check_weights(a, "kernel '" + k.name + "'");
    }
    atoms_.emplace(k.name, std::move(a));
  }

  AtomInfo* annotated(const std::string& name, Span s, const char* what) {
    game_layer_ = true;
    auto it = atoms_.find(name);
    if (it == atoms_.end()) {
      error(s, std::string(what) + " for undeclared kernel or prior '" + name + "'");
      return nullptr;
    }
    return it->second.typed ? &it->second : nullptr;
  }

  void annotate_inversion(const InversionDecl& i) {
    AtomInfo* a = annotated(i.name, i.span, "inversion");
    if (!a) return;
    if (a->inversion) return error(i.span, "duplicate inversion for '" + i.name + "'");
    if (auto p = table_problem("inversion '" + i.name + "'", i.rows, a->out.size(), a->in.size(),
                               false)) {
      return error(i.span, *p);
    }
    a->inversion = i.rows;
  }

  void annotate_energy(const EnergyDecl& e) {
    AtomInfo* a = annotated(e.name, e.span, "energy");
    if (!a) return;
    if (a->energy) return error(e.span, "duplicate energy for '" + e.name + "'");
    if (e.kind == EnergyDecl::Kind::table) {
      if (auto p = table_problem("energy '" + e.name + "'", e.rows, a->in.size(), a->out.size(),
                                 true)) {
        return error(e.span, *p);
      }
    }
    a->energy = e;
  }

  void annotate_entropy(const EntropyDecl& e) {
    AtomInfo* a = annotated(e.name, e.span, "entropy");
    if (!a) return;
    if (a->entropy) return error(e.span, "duplicate entropy for '" + e.name + "'");
    a->entropy = e.kind;
  }

  void annotate_param(const ParamDecl& p) {
    AtomInfo* a = annotated(p.name, p.span, "param");
    if (!a) return;
    if (a->param) return error(p.span, "duplicate param for '" + p.name + "'");
    if (a->unnormalized) {
      return error(p.span, "param '" + p.name + "' needs a normalized table");
    }
    for (const auto& row : a->rows) {
      for (double w : row) {
        if (w == 0.0) {
          return error(p.span, "param '" + p.name + "': a zero weight has no finite logit");
        }
      }
    }
    a->param = true;
  }

  void resolve_data(const DataDecl& d) {
    for (const auto& pt : d.points) {
      auto idx = out_.model->observed().find_point(std::span<const std::string>(pt));
      if (!idx) {
        std::string label = pt.size() == 1 ? pt[0] : "(" + pt[0];
        for (std::size_t i = 1; i < pt.size(); ++i) label += "," + pt[i];
        if (pt.size() != 1) label += ")";
        error(d.span, "data point " + label + " is not a point of " +
                          out_.model->observed().describe());
        continue;
      }
      out_.data.push_back(*idx);
    }
  }

  Typed structural(const OpenModel& m, const BayesianLens& lens) {
    Typed t;
    t.model = m;
    t.in = m.unobserved();
    t.out = m.observed();
    if (game_layer_) t.game = structural_game(lens);
    return t;
  }

  Typed expr(const Expr& e) {
    switch (e.kind) {
      case Expr::Kind::ref: {
        auto it = atoms_.find(e.name);
        if (it == atoms_.end()) {
          error(e.span, out_.spaces.count(e.name)
                            ? "'" + e.name + "' is a space, not a kernel or prior"
                            : "undeclared identifier '" + e.name + "'");
          return {};
        }
        const AtomInfo& a = it->second;
        Typed t;
        if (a.typed) {
          t.in = a.in;
          t.out = a.out;
        }
        if (a.valid) {
          t.model = OpenModel::pure(Kernel::from_rows(a.in, a.out, a.rows));
          if (game_layer_) t.game = atom_game(a, t.init);
        }
        return t;
      }
      case Expr::Kind::id: {
        auto s = resolve(e.bnd);
        if (!s) return {};
        return structural(identity(*s), identity_lens(*s));
      }
      case Expr::Kind::copy: {
        auto s = space_named(e.name, e.span);
        if (!s) return {};
        const OpenModel m = copier(*s);
        return structural(m, exact_inversion(m));
      }
      case Expr::Kind::cup: {
        auto s = space_named(e.name, e.span);
        if (!s) return {};
        const BayesianLens lens = lens_cup(*s);
        return structural(lens.model(), lens);
      }
      case Expr::Kind::cap: {
        auto s = space_named(e.name, e.span);
        if (!s) return {};
        const BayesianLens lens = lens_cap(*s);
        return structural(lens.model(), lens);
      }
      case Expr::Kind::reveal: {
        Typed inner = expr(e.children.at(0));
        Typed t;
        t.in = inner.in;
        if (game_layer_) {
          error(e.span, "reveal cannot be used in a file that declares a game");
          return t;
        }
        if (inner.model) {
          if (inner.model->is_pure()) {
            error(e.span, "reveal of a model with no latent space");
            return t;
          }
          t.model = reveal_all(*inner.model);
          t.out = t.model->observed();
        }
        return t;
      }
      case Expr::Kind::seq: return seq(e);
      case Expr::Kind::tensor: return tensor_expr(e);
    }
    return {};
  }

  Typed seq(const Expr& e) {
    Typed acc = expr(e.children.at(0));
    for (std::size_t i = 1; i < e.children.size(); ++i) {
      const Expr& child = e.children[i];
      Typed next = expr(child);
      bool matched = true;
      if (acc.out && next.in && !(*acc.out == *next.in)) {
        error(child.span,
              "boundary mismatch: expected " + next.in->describe() + ", got " +
                  acc.out->describe(),
              next.in->describe(), acc.out->describe());
        matched = false;
      }
      Typed t;
      t.in = acc.in;
      t.out = next.out;
      if (matched && acc.model && next.model) t.model = seq_compose(*next.model, *acc.model);
      if (matched && acc.game && next.game) {
        t.game = pgame_seq_compose(*next.game, *acc.game);
        t.init = next.init;
        t.init.insert(t.init.end(), acc.init.begin(), acc.init.end());
      }
      acc = std::move(t);
    }
    return acc;
  }

  Typed tensor_expr(const Expr& e) {
    Typed acc = expr(e.children.at(0));
    for (std::size_t i = 1; i < e.children.size(); ++i) {
      Typed next = expr(e.children[i]);
      Typed t;
      if (acc.in && next.in) t.in = FiniteSpace::product(*acc.in, *next.in);
      if (acc.out && next.out) t.out = FiniteSpace::product(*acc.out, *next.out);
      if (acc.model && next.model) t.model = tensor(*acc.model, *next.model);
      if (acc.game && next.game) {
        t.game = pgame_tensor(*acc.game, *next.game);
        t.init = acc.init;
        t.init.insert(t.init.end(), next.init.begin(), next.init.end());
      }
      acc = std::move(t);
    }
    return acc;
  }
};

}  // namespace

Elaborated elaborate(const ModelAst& ast) { return Elaborator().run(ast); }

Elaborated elaborate_source(std::string_view source) {
  ParseResult parsed = parse(source);
  if (!parsed.ast) {
    Elaborated out;
    out.diagnostics = std::move(parsed.diagnostics);
    return out;
  }
  return elaborate(*parsed.ast);
}

}  // namespace autobayes::dsl
