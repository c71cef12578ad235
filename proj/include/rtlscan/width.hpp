#pragma once

#include <cstdint>
#include <optional>

#include "rtlscan/ast.hpp"

namespace rtlscan {

// Small constant folder for range bounds, replication counts and part-select
// widths. Anything it cannot decide is nullopt, never a guess.
inline std::optional<int64_t> const_eval(const Expr& e) {
  using K = Expr::Kind;
  switch (e.kind) {
    case K::Number:
      if (e.number.has_unknown_bits) return std::nullopt;
      return static_cast<int64_t>(e.number.value);
    case K::Unary: {
      auto v = const_eval(*e.operands[0]);
      if (!v) return std::nullopt;
      if (e.text == "-") return -*v;
      if (e.text == "+") return *v;
      if (e.text == "!") return *v == 0 ? 1 : 0;
      return std::nullopt;  // ~ and reductions need a width
    }
    case K::Binary: {
      auto a = const_eval(*e.operands[0]);
      auto b = const_eval(*e.operands[1]);
      if (!a || !b) return std::nullopt;
      const auto& op = e.text;
      if (op == "+") return *a + *b;
      if (op == "-") return *a - *b;
      if (op == "*") return *a * *b;
      if (op == "/") return *b == 0 ? std::nullopt : std::optional<int64_t>(*a / *b);
      if (op == "%") return *b == 0 ? std::nullopt : std::optional<int64_t>(*a % *b);
      if (op == "<<" || op == "<<<")
        return (*b < 0 || *b > 62) ? std::nullopt : std::optional<int64_t>(*a << *b);
      if (op == ">>" || op == ">>>")
        return (*b < 0 || *b > 62) ? std::nullopt
                                   : std::optional<int64_t>(
                                         static_cast<int64_t>(
                                             static_cast<uint64_t>(*a) >> *b));
      if (op == "&") return *a & *b;
      if (op == "|") return *a | *b;
      if (op == "^") return *a ^ *b;
      if (op == "==") return *a == *b;
      if (op == "!=") return *a != *b;
      if (op == "<") return *a < *b;
      if (op == "<=") return *a <= *b;
      if (op == ">") return *a > *b;
      if (op == ">=") return *a >= *b;
      if (op == "&&") return (*a != 0 && *b != 0) ? 1 : 0;
      if (op == "||") return (*a != 0 || *b != 0) ? 1 : 0;
      return std::nullopt;
    }
    case K::Ternary: {
      auto c = const_eval(*e.operands[0]);
      if (!c) return std::nullopt;
      return const_eval(*e.operands[*c != 0 ? 1 : 2]);
    }
    default:
      return std::nullopt;
  }
}

// Self-determined expression width, simplified IEEE rules:
//   identifier -> declared width; concat -> sum; replication -> count * w;
//   sized literal -> its width; unsized literal -> unknown;
//   arithmetic/bitwise -> max of operands; comparisons/reductions -> 1;
//   shifts -> left operand width.
// Context-determined extension is out of scope.
inline std::optional<int> expr_width(const Expr& e, const SymbolTable& symbols,
                                     Diagnostics* diags = nullptr) {
  using K = Expr::Kind;
  switch (e.kind) {
    case K::Identifier: {
      const SignalDecl* decl = symbols.lookup(e.text);
      if (!decl) {
        if (diags)
          add_diag(*diags, Severity::Warning, "unresolved-reference",
                   "identifier '" + e.text + "' does not resolve", e.span);
        return std::nullopt;
      }
      if (decl->is_array) return std::nullopt;  // whole-array reference
      return decl->width();
    }
    case K::Number:
      if (e.number.sized) return e.number.width;
      return std::nullopt;  // unsized: width is context-determined
    case K::Index: {
      // Array element selects have the element width; bit selects are 1 wide.
      const Expr& base = *e.operands[0];
      if (base.kind == K::Identifier) {
        const SignalDecl* decl = symbols.lookup(base.text);
        if (!decl) {
          if (diags)
            add_diag(*diags, Severity::Warning, "unresolved-reference",
                     "identifier '" + base.text + "' does not resolve",
                     base.span);
          return std::nullopt;
        }
        if (decl->is_array) return decl->width();
      }
      return 1;
    }
    case K::PartSelect: {
      auto m = const_eval(*e.operands[1]);
      auto l = const_eval(*e.operands[2]);
      if (!m || !l) return std::nullopt;
      return static_cast<int>(std::abs(*m - *l)) + 1;
    }
    case K::Concat: {
      int total = 0;
      for (const auto& op : e.operands) {
        auto w = expr_width(*op, symbols, diags);
        if (!w) return std::nullopt;
        total += *w;
      }
      return total;
    }
    case K::Replication: {
      auto count = const_eval(*e.operands[0]);
      auto w = expr_width(*e.operands[1], symbols, diags);
      if (!count || !w) return std::nullopt;
      return static_cast<int>(*count) * *w;
    }
    case K::Unary: {
      const auto& op = e.text;
      if (op == "~" || op == "-" || op == "+")
        return expr_width(*e.operands[0], symbols, diags);
      return 1;  // reductions and logical not
    }
    case K::Binary: {
      const auto& op = e.text;
      if (op == "==" || op == "!=" || op == "===" || op == "!==" || op == "<" ||
          op == "<=" || op == ">" || op == ">=" || op == "&&" || op == "||")
        return 1;
      if (op == "<<" || op == ">>" || op == "<<<" || op == ">>>")
        return expr_width(*e.operands[0], symbols, diags);
      auto a = expr_width(*e.operands[0], symbols, diags);
      auto b = expr_width(*e.operands[1], symbols, diags);
      if (!a || !b) return std::nullopt;
      return std::max(*a, *b);
    }
    case K::Ternary: {
      auto a = expr_width(*e.operands[1], symbols, diags);
      auto b = expr_width(*e.operands[2], symbols, diags);
      if (!a || !b) return std::nullopt;
      return std::max(*a, *b);
    }
    case K::SysCall:
      if (e.text == "$stable") return 1;
      return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace rtlscan
