#include <set>
#include <stdexcept>

#include "autobayes/dsl/parser.hpp"
#include "autobayes/measure.hpp"

namespace autobayes::dsl {

namespace {

const std::set<std::string, std::less<>> kReserved = {
    "space", "prior", "on",  "kernel", "inversion", "energy", "entropy", "param",
    "data",  "model", "id",  "copy",   "cup",       "cap",    "reveal",  "unnormalized"};

struct SyntaxError {
  Span span;
  std::string message;
};

std::string describe(const Token& t) {
  if (t.kind == TokenKind::ident) return "'" + t.text + "'";
  if (t.kind == TokenKind::number) return "number " + t.text;
  return token_name(t.kind);
}

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  ModelAst file() {
    ModelAst ast;
    while (!keyword("model")) {
      if (peek().kind == TokenKind::end) fail(peek().span, "expected 'model' before end of input");
      ast.decls.push_back(decl());
    }
    next();
    ast.model = expr();
    if (peek().kind != TokenKind::end) {
      fail(peek().span, "expected end of input after the model expression, found " +
                            describe(peek()));
    }
    return ast;
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(Span s, std::string msg) { throw SyntaxError{s, std::move(msg)}; }

  const Token& peek() const { return toks_[pos_]; }
  Token next() {
    Token t = toks_[pos_];
    if (t.kind != TokenKind::end) ++pos_;
    return t;
  }
  bool keyword(std::string_view kw) const {
    return peek().kind == TokenKind::ident && peek().text == kw;
  }
  bool accept(TokenKind k) {
    if (peek().kind != k) return false;
    next();
    return true;
  }
  Token expect(TokenKind k, std::string_view context) {
    if (peek().kind != k) {
      fail(peek().span, std::string("expected ") + token_name(k) + " " + std::string(context) +
                            ", found " + describe(peek()));
    }
    return next();
  }
  void expect_keyword(std::string_view kw, std::string_view context) {
    if (!keyword(kw)) {
      fail(peek().span, "expected '" + std::string(kw) + "' " + std::string(context) +
                            ", found " + describe(peek()));
    }
    next();
  }
  std::string name(std::string_view context) {
    const Token t = expect(TokenKind::ident, context);
    if (kReserved.count(t.text)) fail(t.span, "'" + t.text + "' is a reserved word");
    return t.text;
  }
  // Point labels may be any identifier.
  std::string label(std::string_view context) { return expect(TokenKind::ident, context).text; }

  double number() {
    const Token t = next();
    if (t.kind == TokenKind::number) return t.value;
    if (t.kind == TokenKind::ident && t.text == "inf") return kInf;
    fail(t.span, "expected a number, found " + describe(t));
  }

  std::vector<double> vector() {
    expect(TokenKind::lbracket, "to open a vector");
    std::vector<double> v{number()};
    while (accept(TokenKind::comma)) v.push_back(number());
    expect(TokenKind::rbracket, "to close the vector");
    return v;
  }

  std::vector<std::vector<double>> rows() {
    expect(TokenKind::lbracket, "to open a table");
    std::vector<std::vector<double>> r{vector()};
    while (accept(TokenKind::comma)) r.push_back(vector());
    expect(TokenKind::rbracket, "to close the table");
    return r;
  }

  Boundary boundary() {
    Boundary b;
    b.span = peek().span;
    if (peek().kind == TokenKind::number && peek().text == "1") {
      next();
      return b;
    }
    b.atoms.push_back(name("in a boundary"));
    while (accept(TokenKind::star)) b.atoms.push_back(name("after '*'"));
    return b;
  }

  Decl decl() {
    const Token kw = peek();
    if (kw.kind != TokenKind::ident) {
      fail(kw.span, "expected a declaration or 'model', found " + describe(kw));
    }
    next();
    if (kw.text == "space") {
      SpaceDecl d{name("after 'space'"), {}, kw.span};
      expect(TokenKind::lbrace, "to open the point list");
      d.points.push_back(label("in the point list"));
      while (accept(TokenKind::comma)) d.points.push_back(label("in the point list"));
      expect(TokenKind::rbrace, "to close the point list");
      return d;
    }
    if (kw.text == "prior") {
      PriorDecl d;
      d.span = kw.span;
      d.name = name("after 'prior'");
      expect_keyword("on", "after the prior name");
      d.on = boundary();
      if (keyword("unnormalized")) {
        next();
        d.unnormalized = true;
      }
      expect(TokenKind::equals, "before the prior weights");
      d.weights = vector();
      return d;
    }
    if (kw.text == "kernel") {
      KernelDecl d;
      d.span = kw.span;
      d.name = name("after 'kernel'");
      expect(TokenKind::colon, "after the kernel name");
      d.from = boundary();
      expect(TokenKind::arrow, "between kernel boundaries");
      d.to = boundary();
      if (keyword("unnormalized")) {
        next();
        d.unnormalized = true;
      }
      expect(TokenKind::equals, "before the kernel rows");
      d.rows = rows();
      return d;
    }
    if (kw.text == "inversion") {
      InversionDecl d;
      d.span = kw.span;
      d.name = name("after 'inversion'");
      expect(TokenKind::equals, "before the inversion rows");
      d.rows = rows();
      return d;
    }
    if (kw.text == "energy") {
      EnergyDecl d;
      d.span = kw.span;
      d.name = name("after 'energy'");
      expect(TokenKind::equals, "before the energy");
      if (keyword("nll")) {
        next();
        d.kind = EnergyDecl::Kind::nll;
      } else if (keyword("zero")) {
        next();
        d.kind = EnergyDecl::Kind::zero;
      } else if (peek().kind == TokenKind::lbracket) {
        d.kind = EnergyDecl::Kind::table;
        d.rows = rows();
      } else {
        fail(peek().span, "expected 'nll', 'zero' or a table, found " + describe(peek()));
      }
      return d;
    }
    if (kw.text == "entropy") {
      EntropyDecl d;
      d.span = kw.span;
      d.name = name("after 'entropy'");
      expect(TokenKind::equals, "before the entropy");
      if (keyword("shannon")) {
        d.kind = EntropyDecl::Kind::shannon;
      } else if (keyword("zero")) {
        d.kind = EntropyDecl::Kind::zero;
      } else {
        fail(peek().span, "expected 'shannon' or 'zero', found " + describe(peek()));
      }
      next();
      return d;
    }
    if (kw.text == "param") {
      ParamDecl d{name("after 'param'"), kw.span};
      expect_keyword("softmax", "after the parameter name");
      return d;
    }
    if (kw.text == "data") {
      DataDecl d;
      d.span = kw.span;
      expect(TokenKind::lbracket, "to open the data list");
      d.points.push_back(point());
      while (accept(TokenKind::comma)) d.points.push_back(point());
      expect(TokenKind::rbracket, "to close the data list");
      return d;
    }
    fail(kw.span, "expected a declaration or 'model', found " + describe(kw));
  }

  std::vector<std::string> point() {
    if (accept(TokenKind::lparen)) {
      std::vector<std::string> p{label("in a point")};
      while (accept(TokenKind::comma)) p.push_back(label("in a point"));
      expect(TokenKind::rparen, "to close the point");
      return p;
    }
    return {label("as a data point")};
  }

  Expr expr() {
    Expr first = term();
    if (peek().kind != TokenKind::semicolon) return first;
    Expr e;
    e.kind = Expr::Kind::seq;
    e.span = first.span;
    e.children.push_back(std::move(first));
    while (accept(TokenKind::semicolon)) e.children.push_back(term());
    return e;
  }

  Expr term() {
    Expr first = atom();
    if (peek().kind != TokenKind::at) return first;
    Expr e;
    e.kind = Expr::Kind::tensor;
    e.span = first.span;
    e.children.push_back(std::move(first));
    while (accept(TokenKind::at)) e.children.push_back(atom());
    return e;
  }

  Expr atom() {
    const Token t = peek();
    if (t.kind == TokenKind::lparen) {
      next();
      Expr inner = expr();
      if (peek().kind != TokenKind::rparen) {
        fail(peek().span, "expected ')' to close '(' opened at " + std::to_string(t.span.line) +
                              ":" + std::to_string(t.span.col) + ", found " + describe(peek()));
      }
      next();
      return inner;
    }
    if (t.kind != TokenKind::ident) {
      fail(t.span, "expected a model expression, found " + describe(t));
    }
    next();
    Expr e;
    e.span = t.span;
    if (t.text == "id") {
      e.kind = Expr::Kind::id;
      expect(TokenKind::lbracket, "after 'id'");
      e.bnd = boundary();
      expect(TokenKind::rbracket, "to close 'id['");
      return e;
    }
    if (t.text == "copy" || t.text == "cup" || t.text == "cap") {
      e.kind = t.text == "copy" ? Expr::Kind::copy
               : t.text == "cup" ? Expr::Kind::cup
                                 : Expr::Kind::cap;
      expect(TokenKind::lbracket, "after '" + t.text + "'");
      e.name = name("as the space");
      expect(TokenKind::rbracket, "to close '" + t.text + "['");
      return e;
    }
    if (t.text == "reveal") {
      e.kind = Expr::Kind::reveal;
      expect(TokenKind::lbracket, "after 'reveal'");
      e.children.push_back(expr());
      expect(TokenKind::rbracket, "to close 'reveal['");
      return e;
    }
    if (kReserved.count(t.text)) fail(t.span, "'" + t.text + "' is a reserved word");
    e.kind = Expr::Kind::ref;
    e.name = t.text;
    return e;
  }
};

}  // namespace

ParseResult parse(std::string_view source) {
  ParseResult out;
  LexResult lexed = lex(source);
  if (lexed.error) {
    out.diagnostics.push_back(*lexed.error);
    return out;
  }
  try {
    out.ast = Parser(std::move(lexed.tokens)).file();
  } catch (const SyntaxError& e) {
    out.diagnostics.push_back(Diagnostic{Severity::error, e.span, e.message, {}, {}});
  }
  return out;
}

}  // namespace autobayes::dsl
