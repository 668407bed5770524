#include <charconv>
#include <cmath>
#include <sstream>

#include "autobayes/dsl/format.hpp"

namespace autobayes::dsl {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string join(const std::vector<std::string>& xs, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += sep;
    out += xs[i];
  }
  return out;
}

std::string vec(const std::vector<double>& v) {
  std::vector<std::string> parts;
  for (double x : v) parts.push_back(format_number(x));
  return "[" + join(parts, ", ") + "]";
}

std::string table(const std::vector<std::vector<double>>& rows) {
  std::vector<std::string> parts;
  for (const auto& r : rows) parts.push_back(vec(r));
  return "[" + join(parts, ", ") + "]";
}

std::string operand(const Expr& child, Expr::Kind parent) {
  const bool wrap = child.kind == Expr::Kind::seq ||
                    (child.kind == Expr::Kind::tensor && parent == Expr::Kind::tensor);
  const std::string s = format_expr(child);
  return wrap ? "(" + s + ")" : s;
}

bool same_boundary(const Boundary& a, const Boundary& b) { return a.atoms == b.atoms; }

}  // namespace

std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string format_boundary(const Boundary& b) {
  return b.atoms.empty() ? "1" : join(b.atoms, "*");
}

std::string format_expr(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::ref: return e.name;
    case Expr::Kind::id: return "id[" + format_boundary(e.bnd) + "]";
    case Expr::Kind::copy: return "copy[" + e.name + "]";
    case Expr::Kind::cup: return "cup[" + e.name + "]";
    case Expr::Kind::cap: return "cap[" + e.name + "]";
    case Expr::Kind::reveal: return "reveal[" + format_expr(e.children.at(0)) + "]";
    case Expr::Kind::seq:
    case Expr::Kind::tensor: {
      std::vector<std::string> parts;
      for (const auto& c : e.children) parts.push_back(operand(c, e.kind));
      return join(parts, e.kind == Expr::Kind::seq ? " ; " : " @ ");
    }
  }
  return {};
}

std::string format_ast(const ModelAst& ast) {
  std::ostringstream out;
  for (const auto& d : ast.decls) {
    std::visit(
        Overloaded{
            [&](const SpaceDecl& s) {
              out << "space " << s.name << " {" << join(s.points, ", ") << "}";
            },
            [&](const PriorDecl& p) {
              out << "prior " << p.name << " on " << format_boundary(p.on)
                  << (p.unnormalized ? " unnormalized" : "") << " = " << vec(p.weights);
            },
            [&](const KernelDecl& k) {
              out << "kernel " << k.name << " : " << format_boundary(k.from) << " -> "
                  << format_boundary(k.to) << (k.unnormalized ? " unnormalized" : "") << " = "
                  << table(k.rows);
            },
            [&](const InversionDecl& i) { out << "inversion " << i.name << " = " << table(i.rows); },
            [&](const EnergyDecl& e) {
              out << "energy " << e.name << " = ";
              if (e.kind == EnergyDecl::Kind::nll) out << "nll";
              else if (e.kind == EnergyDecl::Kind::zero) out << "zero";
              else out << table(e.rows);
            },
            [&](const EntropyDecl& e) {
              out << "entropy " << e.name << " = "
                  << (e.kind == EntropyDecl::Kind::shannon ? "shannon" : "zero");
            },
            [&](const ParamDecl& p) { out << "param " << p.name << " softmax"; },
            [&](const DataDecl& dd) {
              std::vector<std::string> pts;
              for (const auto& p : dd.points) {
                pts.push_back(p.size() == 1 ? p[0] : "(" + join(p, ", ") + ")");
              }
              out << "data [" << join(pts, ", ") << "]";
            },
        },
        d);
    out << "\n";
  }
  out << "model " << format_expr(ast.model) << "\n";
  return out.str();
}

bool equivalent(const Expr& a, const Expr& b) {
  if (a.kind != b.kind || a.name != b.name || !same_boundary(a.bnd, b.bnd) ||
      a.children.size() != b.children.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.children.size(); ++i) {
    if (!equivalent(a.children[i], b.children[i])) return false;
  }
  return true;
}

bool equivalent(const ModelAst& a, const ModelAst& b) {
  if (a.decls.size() != b.decls.size() || !equivalent(a.model, b.model)) return false;
  for (std::size_t i = 0; i < a.decls.size(); ++i) {
    const Decl& x = a.decls[i];
    const Decl& y = b.decls[i];
    if (x.index() != y.index()) return false;
    const bool same = std::visit(
        Overloaded{
            [&](const SpaceDecl& s) {
              const auto& t = std::get<SpaceDecl>(y);
              return s.name == t.name && s.points == t.points;
            },
            [&](const PriorDecl& p) {
              const auto& q = std::get<PriorDecl>(y);
              return p.name == q.name && same_boundary(p.on, q.on) &&
                     p.unnormalized == q.unnormalized && p.weights == q.weights;
            },
            [&](const KernelDecl& k) {
              const auto& m = std::get<KernelDecl>(y);
              return k.name == m.name && same_boundary(k.from, m.from) &&
                     same_boundary(k.to, m.to) && k.unnormalized == m.unnormalized &&
                     k.rows == m.rows;
            },
            [&](const InversionDecl& i) {
              const auto& j = std::get<InversionDecl>(y);
              return i.name == j.name && i.rows == j.rows;
            },
            [&](const EnergyDecl& e) {
              const auto& f = std::get<EnergyDecl>(y);
              return e.name == f.name && e.kind == f.kind && e.rows == f.rows;
            },
            [&](const EntropyDecl& e) {
              const auto& f = std::get<EntropyDecl>(y);
              return e.name == f.name && e.kind == f.kind;
            },
            [&](const ParamDecl& p) { return p.name == std::get<ParamDecl>(y).name; },
            [&](const DataDecl& d) { return d.points == std::get<DataDecl>(y).points; },
        },
        x);
    if (!same) return false;
  }
  return true;
}

}  // namespace autobayes::dsl
