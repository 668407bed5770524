#include <cctype>
#include <charconv>

#include "autobayes/dsl/parser.hpp"

namespace autobayes::dsl {

const char* severity_name(Severity s) {
  switch (s) {
    case Severity::error: return "error";
    case Severity::warning: return "warning";
    case Severity::note: return "note";
  }
  return "error";
}

std::string render(const std::string& file, const Diagnostic& d) {
  return file + ":" + std::to_string(d.span.line) + ":" + std::to_string(d.span.col) + ": " +
         severity_name(d.severity) + ": " + d.message;
}

const char* token_name(TokenKind k) {
  switch (k) {
    case TokenKind::ident: return "identifier";
    case TokenKind::number: return "number";
    case TokenKind::lbrace: return "'{'";
    case TokenKind::rbrace: return "'}'";
    case TokenKind::lbracket: return "'['";
    case TokenKind::rbracket: return "']'";
    case TokenKind::lparen: return "'('";
    case TokenKind::rparen: return "')'";
    case TokenKind::comma: return "','";
    case TokenKind::colon: return "':'";
    case TokenKind::equals: return "'='";
    case TokenKind::semicolon: return "';'";
    case TokenKind::at: return "'@'";
    case TokenKind::star: return "'*'";
    case TokenKind::arrow: return "'->'";
    case TokenKind::end: return "end of input";
  }
  return "token";
}

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
}
bool digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

}  // namespace

LexResult lex(std::string_view src) {
  LexResult out;
  std::size_t i = 0, line = 1, col = 1;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < src.size(); ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  auto fail = [&](Span s, std::string msg) {
    out.error = Diagnostic{Severity::error, s, std::move(msg), {}, {}};
    out.tokens.push_back({TokenKind::end, "", 0.0, s});
    return out;
  };
  while (i < src.size()) {
    const char c = src[i];
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    const Span here{line, col};
    if (ident_start(c)) {
      std::size_t j = i;
      while (j < src.size() && ident_char(src[j])) ++j;
      out.tokens.push_back({TokenKind::ident, std::string(src.substr(i, j - i)), 0.0, here});
      advance(j - i);
      continue;
    }
    if (c == '-' && i + 1 < src.size() && src[i + 1] == '>') {
      out.tokens.push_back({TokenKind::arrow, "->", 0.0, here});
      advance(2);
      continue;
    }
    if (digit(c) || c == '.' || (c == '-' && i + 1 < src.size() &&
                                 (digit(src[i + 1]) || src[i + 1] == '.'))) {
      std::size_t j = i + (c == '-' ? 1 : 0);
      while (j < src.size() && (digit(src[j]) || src[j] == '.')) ++j;
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
        if (k < src.size() && digit(src[k])) {
          j = k;
          while (j < src.size() && digit(src[j])) ++j;
        }
      }
      double v = 0.0;
      const auto* first = src.data() + i;
      const auto* last = src.data() + j;
      auto [ptr, ec] = std::from_chars(first, last, v);
      if (ec != std::errc() || ptr != last) {
        return fail(here, "malformed number '" + std::string(src.substr(i, j - i)) + "'");
      }
      out.tokens.push_back({TokenKind::number, std::string(src.substr(i, j - i)), v, here});
      advance(j - i);
      continue;
    }
    TokenKind k;
    switch (c) {
      case '{': k = TokenKind::lbrace; break;
      case '}': k = TokenKind::rbrace; break;
      case '[': k = TokenKind::lbracket; break;
      case ']': k = TokenKind::rbracket; break;
      case '(': k = TokenKind::lparen; break;
      case ')': k = TokenKind::rparen; break;
      case ',': k = TokenKind::comma; break;
      case ':': k = TokenKind::colon; break;
      case '=': k = TokenKind::equals; break;
      case ';': k = TokenKind::semicolon; break;
      case '@': k = TokenKind::at; break;
      case '*': k = TokenKind::star; break;
      default:
        return fail(here, "unexpected character '" + std::string(1, c) + "'");
    }
    out.tokens.push_back({k, std::string(1, c), 0.0, here});
    advance(1);
  }
  out.tokens.push_back({TokenKind::end, "", 0.0, Span{line, col}});
  return out;
}

}  // namespace autobayes::dsl
