#pragma once

#include <cctype>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "rtlscan/diag.hpp"

namespace rtlscan {

enum class TokenKind {
  Keyword,
  Identifier,
  Number,
  String,
  Operator,
  Punct,
  Error,
  Eof,
};

enum class NumberBase { Binary, Octal, Decimal, Hex };

struct NumberValue {
  // Explicit width prefix was written (the 8 in 8'h00). Width is only
  // meaningful when sized is true.
  bool sized = false;
  int width = 0;
  NumberBase base = NumberBase::Decimal;
  uint64_t value = 0;
  // '0 / '1 / 'x / 'z unbased unsized literals; width is context-determined.
  bool unbased = false;
  // literal contained x/z/? digits; value bits for those positions are 0
  bool has_unknown_bits = false;
};

struct Token {
  TokenKind kind = TokenKind::Eof;
  std::string lexeme;
  // Whitespace, comments and ignored ` directives preceding this token.
  // Concatenating leading + lexeme over the whole stream (including the
  // trailing Eof token) reproduces the input byte-for-byte.
  std::string leading;
  SourceSpan span;
  NumberValue number;  // valid when kind == Number

  bool is(TokenKind k) const { return kind == k; }
  bool is_kw(std::string_view kw) const {
    return kind == TokenKind::Keyword && lexeme == kw;
  }
  bool is_op(std::string_view op) const {
    return kind == TokenKind::Operator && lexeme == op;
  }
  bool is_punct(std::string_view p) const {
    return kind == TokenKind::Punct && lexeme == p;
  }
};

namespace detail {

inline const std::unordered_set<std::string_view>& keywords() {
  static const std::unordered_set<std::string_view> kw = {
      "module", "endmodule", "input", "output", "inout", "wire", "reg",
      "logic", "integer", "genvar", "assign", "always", "always_comb",
      "always_ff", "always_latch", "begin", "end", "if", "else", "case",
      "casez", "casex", "endcase", "default", "for", "while", "repeat",
      "posedge", "negedge", "or", "and", "not", "initial", "function",
      "endfunction", "task", "endtask", "generate", "endgenerate",
      "parameter", "localparam", "defparam", "interface", "endinterface",
      "class", "endclass", "package", "endpackage", "typedef", "enum",
      "struct", "union", "signed", "unsigned", "assert", "property",
      "endproperty", "sequence", "endsequence", "bind", "disable", "iff",
      "wait", "forever", "fork", "join", "specify", "endspecify", "primitive",
      "endprimitive", "timeunit", "timeprecision",
  };
  return kw;
}

inline bool ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
inline bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

}  // namespace detail

// Hand-rolled lexer for the supported Verilog subset. Never throws: unknown
// bytes become Error tokens with spans and a diagnostic.
class Lexer {
 public:
  Lexer(std::string_view source, std::string file)
      : src_(source), file_(std::move(file)) {}

  std::vector<Token> run(Diagnostics& diags) {
    std::vector<Token> out;
    for (;;) {
      std::string leading = consume_trivia(diags);
      if (pos_ >= src_.size()) {
        Token eof;
        eof.kind = TokenKind::Eof;
        eof.leading = std::move(leading);
        eof.span = here(0);
        out.push_back(std::move(eof));
        break;
      }
      Token t = next_token(diags);
      t.leading = std::move(leading);
      out.push_back(std::move(t));
    }
    return out;
  }

 private:
  std::string_view src_;
  std::string file_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;

  char peek(size_t off = 0) const {
    return pos_ + off < src_.size() ? src_[pos_ + off] : '\0';
  }

  void advance(size_t n = 1) {
    for (size_t i = 0; i < n && pos_ < src_.size(); ++i) {
      if (src_[pos_] == '\n') {
        ++line_;
        col_ = 1;
      } else {
        ++col_;
      }
      ++pos_;
    }
  }

  SourceSpan here(size_t len) const {
    SourceSpan s;
    s.file = file_;
    s.line_start = s.line_end = line_;
    s.col_start = col_;
    s.col_end = col_ + static_cast<int>(len == 0 ? 0 : len - 1);
    return s;
  }

  // Whitespace, // and /* */ comments, plus ` compiler directives, which are
  // reported once per file and otherwise skipped (macros are not expanded).
  std::string consume_trivia(Diagnostics& diags) {
    size_t start = pos_;
    for (;;) {
      char c = peek();
      if (c == '\0') break;
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
        continue;
      }
      if (c == '/' && peek(1) == '/') {
        while (peek() != '\n' && peek() != '\0') advance();
        continue;
      }
      if (c == '/' && peek(1) == '*') {
        advance(2);
        while (pos_ < src_.size() && !(peek() == '*' && peek(1) == '/')) advance();
        advance(2);
        continue;
      }
      if (c == '`') {
        SourceSpan s = here(1);
        size_t dstart = pos_;
        // Directive and its same-line payload; honor \ line continuations
        // so a multi-line `define stays trivia.
        while (peek() != '\0') {
          if (peek() == '\n') {
            bool continued = false;
            for (size_t i = pos_; i > dstart; --i) {
              char b = src_[i - 1];
              if (b == '\r') continue;
              continued = (b == '\\');
              break;
            }
            if (!continued) break;
          }
          advance();
        }
        add_diag(diags, Severity::Note, "macro-ignored",
                 "compiler directive skipped (macros are reported, not expanded)",
                 s);
        continue;
      }
      break;
    }
    return std::string(src_.substr(start, pos_ - start));
  }

  Token make(TokenKind kind, size_t len) {
    Token t;
    t.kind = kind;
    t.span = here(len);
    t.lexeme = std::string(src_.substr(pos_, len));
    advance(len);
    return t;
  }

  Token next_token(Diagnostics& diags) {
    char c = peek();
    if (detail::ident_start(c)) return lex_ident();
    if (std::isdigit(static_cast<unsigned char>(c))) return lex_number(diags);
    if (c == '\'') return lex_based_number(diags, /*size_len=*/0);
    if (c == '\\') return lex_escaped_ident();
    if (c == '$') return lex_system_ident();
    if (c == '"') return lex_string();
    return lex_operator(diags);
  }

  Token lex_ident() {
    size_t len = 0;
    while (detail::ident_char(peek(len))) ++len;
    Token t = make(TokenKind::Identifier, len);
    if (detail::keywords().count(t.lexeme)) t.kind = TokenKind::Keyword;
    return t;
  }

  // \escaped.identifiers! end at whitespace
  Token lex_escaped_ident() {
    size_t len = 1;
    while (peek(len) != '\0' &&
           !std::isspace(static_cast<unsigned char>(peek(len))))
      ++len;
    return make(TokenKind::Identifier, len);
  }

  // $stable, $display, ... kept as identifiers with the $ prefix
  Token lex_system_ident() {
    size_t len = 1;
    while (detail::ident_char(peek(len))) ++len;
    return make(TokenKind::Identifier, len);
  }

  Token lex_string() {
    size_t len = 1;
    while (peek(len) != '\0' && peek(len) != '"' && peek(len) != '\n') {
      if (peek(len) == '\\' && peek(len + 1) != '\0') ++len;
      ++len;
    }
    if (peek(len) == '"') ++len;
    return make(TokenKind::String, len);
  }

  static int base_radix(NumberBase b) {
    switch (b) {
      case NumberBase::Binary: return 2;
      case NumberBase::Octal: return 8;
      case NumberBase::Decimal: return 10;
      case NumberBase::Hex: return 16;
    }
    return 10;
  }

  Token lex_number(Diagnostics& diags) {
    size_t len = 0;
    while (std::isdigit(static_cast<unsigned char>(peek(len))) || peek(len) == '_')
      ++len;
    // A digit run directly followed by ' is the size prefix of a based
    // literal: 8'h00 is one token.
    if (peek(len) == '\'') return lex_based_number(diags, len);
    Token t = make(TokenKind::Number, len);
    t.number.sized = false;
    t.number.base = NumberBase::Decimal;
    t.number.value = parse_digits(t.lexeme, 10, t.number.has_unknown_bits);
    return t;
  }

  // size_len digits already scanned before the quote (0 for 'h.. / '1 forms)
  Token lex_based_number(Diagnostics& diags, size_t size_len) {
    size_t len = size_len + 1;  // through '
    char bc = peek(len);
    NumberValue num;
    if (bc == 's' || bc == 'S') {
      ++len;
      bc = peek(len);
    }
    switch (std::tolower(static_cast<unsigned char>(bc))) {
      case 'b': num.base = NumberBase::Binary; break;
      case 'o': num.base = NumberBase::Octal; break;
      case 'd': num.base = NumberBase::Decimal; break;
      case 'h': num.base = NumberBase::Hex; break;
      case '0':
      case '1':
      case 'x':
      case 'z': {
        // unbased unsized literal: '0 '1 'x 'z
        ++len;
        Token t = make(TokenKind::Number, len);
        t.number.unbased = true;
        char v = t.lexeme.back();
        t.number.value = (v == '1') ? 1 : 0;
        t.number.has_unknown_bits = (v == 'x' || v == 'z');
        return t;
      }
      default: {
        Token t = make(TokenKind::Error, len);
        add_diag(diags, Severity::Error, "bad-literal",
                 "malformed based literal '" + t.lexeme + "'", t.span);
        return t;
      }
    }
    ++len;  // base char
    size_t digits_start = len;
    while (true) {
      char d = peek(len);
      if (d == '_' || d == '?' || std::isxdigit(static_cast<unsigned char>(d)) ||
          d == 'x' || d == 'X' || d == 'z' || d == 'Z') {
        ++len;
        continue;
      }
      break;
    }
    if (len == digits_start) {
      Token t = make(TokenKind::Error, len);
      add_diag(diags, Severity::Error, "bad-literal",
               "based literal missing digits", t.span);
      return t;
    }
    Token t = make(TokenKind::Number, len);
    num.sized = size_len > 0;
    if (num.sized) {
      bool dummy = false;
      num.width = static_cast<int>(
          parse_digits(t.lexeme.substr(0, size_len), 10, dummy));
    }
    num.value = parse_digits(t.lexeme.substr(digits_start),
                             base_radix(num.base), num.has_unknown_bits);
    if (num.sized && num.width > 0 && num.width < 64)
      num.value &= (1ull << num.width) - 1;
    t.number = num;
    return t;
  }

  static uint64_t parse_digits(std::string_view text, int radix,
                               bool& has_unknown) {
    uint64_t v = 0;
    for (char c : text) {
      if (c == '_') continue;
      int d;
      if (c == 'x' || c == 'X' || c == 'z' || c == 'Z' || c == '?') {
        has_unknown = true;
        d = 0;
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        d = c - '0';
      } else {
        d = std::tolower(static_cast<unsigned char>(c)) - 'a' + 10;
      }
      v = v * static_cast<uint64_t>(radix) + static_cast<uint64_t>(d);
    }
    return v;
  }

  Token lex_operator(Diagnostics& diags) {
    static const std::string_view three[] = {"===", "!==", "<<<", ">>>"};
    static const std::string_view two[] = {"==", "!=", "<=", ">=", "&&", "||",
                                           "<<", ">>", "~&", "~|", "~^", "^~",
                                           "+:", "-:", "->"};
    for (auto op : three) {
      if (src_.substr(pos_).starts_with(op)) return make(TokenKind::Operator, 3);
    }
    for (auto op : two) {
      if (src_.substr(pos_).starts_with(op)) return make(TokenKind::Operator, 2);
    }
    char c = peek();
    switch (c) {
      case '+': case '-': case '*': case '/': case '%': case '&': case '|':
      case '^': case '~': case '!': case '<': case '>': case '=': case '?':
        return make(TokenKind::Operator, 1);
      case '(': case ')': case '[': case ']': case '{': case '}': case ';':
      case ':': case ',': case '.': case '@': case '#':
        return make(TokenKind::Punct, 1);
      default: {
        Token t = make(TokenKind::Error, 1);
        add_diag(diags, Severity::Error, "bad-character",
                 "unexpected character in input", t.span);
        return t;
      }
    }
  }
};

/// Lex `source` into tokens. Lexical problems become Error tokens plus
/// diagnostics; this never throws.
inline std::vector<Token> tokenize(std::string_view source, std::string file,
                                   Diagnostics& diags) {
  return Lexer(source, std::move(file)).run(diags);
}

}  // namespace rtlscan
