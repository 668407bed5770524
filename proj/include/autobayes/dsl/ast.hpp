#pragma once

#include <string>
#include <variant>
#include <vector>

namespace autobayes::dsl {

// 1-based source position.
struct Span {
  std::size_t line = 1;
  std::size_t col = 1;
};

enum class Severity { error, warning, note };

struct Diagnostic {
  Severity severity = Severity::error;
  Span span;
  std::string message;
  std::string expected;  // boundary types, when the diagnostic is about a boundary
  std::string actual;

  bool is_boundary() const { return !expected.empty() || !actual.empty(); }
};

// "file:line:col: severity: message"
std::string render(const std::string& file, const Diagnostic& d);
const char* severity_name(Severity s);

// Empty atom list is the unit boundary "1".
struct Boundary {
  std::vector<std::string> atoms;
  Span span;
};

struct SpaceDecl {
  std::string name;
  std::vector<std::string> points;
  Span span;
};

struct PriorDecl {
  std::string name;
  Boundary on;
  bool unnormalized = false;
  std::vector<double> weights;
  Span span;
};

struct KernelDecl {
  std::string name;
  Boundary from;
  Boundary to;
  bool unnormalized = false;
  std::vector<std::vector<double>> rows;
  Span span;
};

// Fixed inversion table Y ~> X for a kernel or prior.
struct InversionDecl {
  std::string name;
  std::vector<std::vector<double>> rows;
  Span span;
};

struct EnergyDecl {
  enum class Kind { nll, zero, table };
  std::string name;
  Kind kind = Kind::nll;
  std::vector<std::vector<double>> rows;
  Span span;
};

struct EntropyDecl {
  enum class Kind { shannon, zero };
  std::string name;
  Kind kind = Kind::shannon;
  Span span;
};

struct ParamDecl {
  std::string name;
  Span span;
};

// Observed points; each is a list of atom point labels.
struct DataDecl {
  std::vector<std::vector<std::string>> points;
  Span span;
};

using Decl = std::variant<SpaceDecl, PriorDecl, KernelDecl, InversionDecl, EnergyDecl,
                          EntropyDecl, ParamDecl, DataDecl>;

struct Expr {
  enum class Kind { ref, id, copy, cup, cap, reveal, seq, tensor };
  Kind kind = Kind::ref;
  std::string name;  // ref target, or the space of copy/cup/cap
  Boundary bnd;      // id[...]
  std::vector<Expr> children;  // seq and tensor operands, reveal's body
  Span span;
};

struct ModelAst {
  std::vector<Decl> decls;
  Expr model;
};

// Structural equality ignoring source spans; numbers compare exactly.
bool equivalent(const ModelAst& a, const ModelAst& b);
bool equivalent(const Expr& a, const Expr& b);

}  // namespace autobayes::dsl
