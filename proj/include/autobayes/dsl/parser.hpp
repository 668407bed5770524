#pragma once

#include <optional>
#include <string_view>

#include "autobayes/dsl/ast.hpp"

namespace autobayes::dsl {

enum class TokenKind {
  ident,
  number,
  lbrace,
  rbrace,
  lbracket,
  rbracket,
  lparen,
  rparen,
  comma,
  colon,
  equals,
  semicolon,
  at,
  star,
  arrow,
  end,
};

struct Token {
  TokenKind kind;
  std::string text;
  double value = 0.0;  // numbers only
  Span span;
};

const char* token_name(TokenKind k);

struct LexResult {
  std::vector<Token> tokens;  // always terminated by an end token
  std::optional<Diagnostic> error;
};

// '#' starts a comment running to the end of the line.
LexResult lex(std::string_view source);

struct ParseResult {
  std::optional<ModelAst> ast;
  std::vector<Diagnostic> diagnostics;  // at most one: parsing stops at the first error
};

ParseResult parse(std::string_view source);

}  // namespace autobayes::dsl
