#pragma once

// Random well-typed .abm programs, plus single-fault injection.

#include <string>
#include <vector>

#include "autobayes/dsl/ast.hpp"
#include "autobayes/dsl/elaborate.hpp"
#include "autobayes/random_models.hpp"

namespace gen {

using autobayes::Rng;
using namespace autobayes::dsl;

struct Program {
  ModelAst ast;
  std::vector<std::string> in, out;  // boundary atoms of the model expression
  bool markov = true;                // no unnormalized kernel, cup or cap
};

class Generator {
 public:
  explicit Generator(std::uint64_t seed) : rng_(seed) {}

  Program program() {
    Program p;
    prog_ = &p;
    sizes_.clear();
    kernels_.clear();
    const std::size_t nspaces = rng_.index(1, 4);
    for (std::size_t i = 0; i < nspaces; ++i) {
      SpaceDecl s;
      s.name = "S" + std::to_string(i);
      const std::size_t n = rng_.index(1, 3);
      for (std::size_t k = 0; k < n; ++k) s.points.push_back("s" + std::to_string(i) + "_" + std::to_string(k));
      sizes_.push_back(n);
      p.ast.decls.push_back(s);
    }
    p.in = boundary(rng_.coin(0.3) ? 0 : 1);
    p.out = boundary(rng_.index(1, 2));
    p.ast.model = expr(p.in, p.out, rng_.index(1, 3));
    for (const auto& k : kernels_) {
      if (rng_.coin(0.2)) p.ast.decls.push_back(EntropyDecl{k.name, rng_.coin() ? EntropyDecl::Kind::shannon : EntropyDecl::Kind::zero, {}});
      if (rng_.coin(0.2)) p.ast.decls.push_back(EnergyDecl{k.name, rng_.coin() ? EnergyDecl::Kind::nll : EnergyDecl::Kind::zero, {}, {}});
      if (k.positive && !k.unnormalized && rng_.coin(0.2)) p.ast.decls.push_back(ParamDecl{k.name, {}});
    }
    if (rng_.coin(0.4)) {
      DataDecl d;
      const std::size_t n = rng_.index(1, 4);
      for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::string> pt;
        for (const auto& a : p.out) {
          const std::size_t s = std::stoul(a.substr(1));
          pt.push_back("s" + std::to_string(s) + "_" + std::to_string(rng_.index(0, sizes_[s] - 1)));
        }
        if (!pt.empty()) d.points.push_back(pt);
      }
      if (!d.points.empty()) p.ast.decls.push_back(d);
    }
    prog_ = nullptr;
    return p;
  }

 private:
  struct KernelInfo {
    std::string name;
    bool positive;
    bool unnormalized;
  };

  Rng rng_;
  Program* prog_ = nullptr;
  std::vector<std::size_t> sizes_;
  std::vector<KernelInfo> kernels_;

  std::vector<std::string> boundary(std::size_t atoms) {
    std::vector<std::string> b;
    for (std::size_t i = 0; i < atoms; ++i) b.push_back("S" + std::to_string(rng_.index(0, sizes_.size() - 1)));
    return b;
  }

  std::size_t size(const std::vector<std::string>& b) const {
    std::size_t n = 1;
    for (const auto& a : b) n *= sizes_[std::stoul(a.substr(1))];
    return n;
  }

  std::vector<double> row(std::size_t n, bool positive, bool unnormalized) {
    std::vector<int> counts(n);
    int total = 0;
    for (auto& c : counts) {
      c = static_cast<int>(rng_.index(positive ? 1 : 0, 9));
      total += c;
    }
    if (total == 0) {
      counts[0] = 1;
      total = 1;
    }
    std::vector<double> r;
    for (int c : counts) r.push_back(unnormalized ? c * 0.25 : static_cast<double>(c) / total);
    return r;
  }

  Expr ref(const std::vector<std::string>& in, const std::vector<std::string>& out) {
    KernelDecl k;
    k.name = "k" + std::to_string(kernels_.size());
    k.from.atoms = in;
    k.to.atoms = out;
    const bool positive = rng_.coin(0.7);
    k.unnormalized = rng_.coin(0.1);
    if (k.unnormalized) prog_->markov = false;
    for (std::size_t r = 0; r < size(in); ++r) k.rows.push_back(row(size(out), positive, k.unnormalized));
    kernels_.push_back({k.name, positive, k.unnormalized});
    prog_->ast.decls.push_back(k);
    Expr e;
    e.kind = Expr::Kind::ref;
    e.name = k.name;
    return e;
  }

  Expr expr(const std::vector<std::string>& in, const std::vector<std::string>& out, std::size_t depth) {
    const std::size_t choice = depth == 0 ? 0 : rng_.index(0, 5);
    if (choice == 1 || choice == 2) {
      Expr e;
      e.kind = Expr::Kind::seq;
      const auto mid = boundary(rng_.index(0, 2));
      e.children.push_back(expr(in, mid, depth - 1));
      e.children.push_back(expr(mid, out, depth - 1));
      if (rng_.coin(0.3)) {
        Expr id;
        id.kind = Expr::Kind::id;
        id.bnd.atoms = out;
        e.children.push_back(id);
      }
      return e;
    }
    if (choice == 3 && !in.empty() && !out.empty()) {
      const std::size_t i = rng_.index(0, in.size());
      const std::size_t o = rng_.index(0, out.size());
      Expr e;
      e.kind = Expr::Kind::tensor;
      e.children.push_back(expr({in.begin(), in.begin() + i}, {out.begin(), out.begin() + o}, depth - 1));
      e.children.push_back(expr({in.begin() + i, in.end()}, {out.begin() + o, out.end()}, depth - 1));
      return e;
    }
    if (choice == 4) {
      // structural generators when the boundaries allow them
      Expr e;
      if (in.size() == 1 && out.size() == 2 && out[0] == in[0] && out[1] == in[0]) {
        e.kind = Expr::Kind::copy;
        e.name = in[0];
        return e;
      }
      if (in.empty() && out.size() == 2 && out[0] == out[1]) {
        prog_->markov = false;
        e.kind = Expr::Kind::cup;
        e.name = out[0];
        return e;
      }
      if (out.empty() && in.size() == 2 && in[0] == in[1]) {
        prog_->markov = false;
        e.kind = Expr::Kind::cap;
        e.name = in[0];
        return e;
      }
      if (in == out) {
        e.kind = Expr::Kind::id;
        e.bnd.atoms = in;
        return e;
      }
    }
    if (choice == 5 && !out.empty()) {
      // copy then consume both copies
      Expr e;
      e.kind = Expr::Kind::seq;
      Expr first = expr(in, {out[0]}, depth - 1);
      Expr cp;
      cp.kind = Expr::Kind::copy;
      cp.name = out[0];
      e.children.push_back(first);
      e.children.push_back(cp);
      std::vector<std::string> pair{out[0], out[0]};
      e.children.push_back(ref(pair, out));
      return e;
    }
    return ref(in, out);
  }
};

// Replace one operand of a sequential composition by a kernel whose input is
// a fresh space, leaving its output unchanged. Returns false when the program
// has no sequential composition.
inline bool inject_boundary_fault(ModelAst& ast, Rng& rng) {
  std::vector<Expr*> seqs;
  std::vector<Expr*> stack{&ast.model};
  while (!stack.empty()) {
    Expr* e = stack.back();
    stack.pop_back();
    if (e->kind == Expr::Kind::seq) seqs.push_back(e);
    for (auto& c : e->children) stack.push_back(&c);
  }
  if (seqs.empty()) return false;
  Expr* s = seqs[rng.index(0, seqs.size() - 1)];
  const std::size_t j = rng.index(1, s->children.size() - 1);

  ModelAst probe = ast;
  probe.model = s->children[j];
  const Elaborated sub = elaborate(probe);
  if (!sub.model) return false;
  std::vector<std::string> out;
  for (const auto& a : sub.model->observed().atoms()) out.push_back(a.label);

  ast.decls.push_back(SpaceDecl{"Fault", {"f0", "f1"}, {}});
  KernelDecl k;
  k.name = "fault";
  k.from.atoms = {"Fault"};
  k.to.atoms = out;
  const std::size_t n = sub.model->observed().size();
  for (int r = 0; r < 2; ++r) k.rows.push_back(std::vector<double>(n, 1.0 / static_cast<double>(n)));
  k.unnormalized = true;
  ast.decls.push_back(k);
  Expr bad;
  bad.kind = Expr::Kind::ref;
  bad.name = "fault";
  bad.span = s->children[j].span;
  s->children[j] = bad;
  return true;
}

}  // namespace gen
