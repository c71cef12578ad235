#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rtlscan/ast.hpp"
#include "rtlscan/lexer.hpp"
#include "rtlscan/width.hpp"

namespace rtlscan {

struct ParseResult {
  std::vector<DesignUnit> units;
  Diagnostics diags;
};

namespace detail {

// Thrown on a syntax error that invalidates the enclosing module; parsing
// resumes at the next module boundary. Never escapes parse_source.
struct ModuleError {};

class Parser {
 public:
  Parser(std::vector<Token> tokens, std::string_view source, std::string file)
      : toks_(std::move(tokens)), source_(source), file_(std::move(file)) {}

  std::vector<DesignUnit> run(Diagnostics& diags) {
    diags_ = &diags;
    std::vector<DesignUnit> units;
    while (!at_eof()) {
      if (cur().is_kw("module")) {
        size_t mark = pos_;
        try {
          units.push_back(parse_module());
        } catch (const ModuleError&) {
          pos_ = mark + 1;
          recover_to_module_boundary();
        }
        continue;
      }
      skip_top_level_construct();
    }
    return units;
  }

 private:
  std::vector<Token> toks_;
  std::string_view source_;
  std::string file_;
  Diagnostics* diags_ = nullptr;
  size_t pos_ = 0;

  // -- token helpers ------------------------------------------------------

  const Token& cur() const { return toks_[std::min(pos_, toks_.size() - 1)]; }
  const Token& peek(size_t off = 1) const {
    return toks_[std::min(pos_ + off, toks_.size() - 1)];
  }
  bool at_eof() const { return cur().is(TokenKind::Eof); }
  const Token& advance() {
    const Token& t = cur();
    if (!at_eof()) ++pos_;
    return t;
  }

  bool accept_kw(std::string_view kw) {
    if (cur().is_kw(kw)) { advance(); return true; }
    return false;
  }
  bool accept_punct(std::string_view p) {
    if (cur().is_punct(p)) { advance(); return true; }
    return false;
  }
  bool accept_op(std::string_view op) {
    if (cur().is_op(op)) { advance(); return true; }
    return false;
  }

  [[noreturn]] void fail(const std::string& what) {
    add_diag(*diags_, Severity::Error, "syntax-error",
             what + " (found '" + (at_eof() ? "<eof>" : cur().lexeme) + "')",
             cur().span);
    throw ModuleError{};
  }

  void expect_punct(std::string_view p) {
    if (!accept_punct(p)) fail("expected '" + std::string(p) + "'");
  }
  void expect_kw(std::string_view kw) {
    if (!accept_kw(kw)) fail("expected '" + std::string(kw) + "'");
  }
  std::string expect_ident() {
    if (!cur().is(TokenKind::Identifier)) fail("expected identifier");
    return advance().lexeme;
  }

  void note_skipped(std::string_view what, const SourceSpan& span) {
    add_diag(*diags_, Severity::Note, "skipped-construct",
             std::string(what) + " is outside the supported subset; skipped",
             span);
  }

  static SourceSpan merge(const SourceSpan& a, const SourceSpan& b) {
    SourceSpan s = a;
    if (b.line_end > s.line_end ||
        (b.line_end == s.line_end && b.col_end > s.col_end)) {
      s.line_end = b.line_end;
      s.col_end = b.col_end;
    }
    return s;
  }

  // -- recovery ------------------------------------------------------------

  void recover_to_module_boundary() {
    while (!at_eof()) {
      if (cur().is_kw("endmodule")) { advance(); return; }
      if (cur().is_kw("module")) return;
      advance();
    }
  }

  void skip_to_semicolon() {
    while (!at_eof() && !cur().is_punct(";") && !cur().is_kw("endmodule"))
      advance();
    accept_punct(";");
  }

  void skip_balanced_parens() {
    if (!cur().is_punct("(")) return;
    int depth = 0;
    while (!at_eof()) {
      if (cur().is_punct("(")) ++depth;
      if (cur().is_punct(")")) {
        --depth;
        advance();
        if (depth == 0) return;
        continue;
      }
      advance();
    }
  }

  void skip_until_kw(std::string_view end_kw) {
    while (!at_eof() && !cur().is_kw(end_kw)) {
      if (cur().is_kw("endmodule") || cur().is_kw("module")) return;
      advance();
    }
    accept_kw(end_kw);
  }

  void skip_top_level_construct() {
    const Token& t = cur();
    if (t.is_kw("interface")) { note_skipped("interface", t.span); advance(); skip_until_kw("endinterface"); return; }
    if (t.is_kw("package")) { note_skipped("package", t.span); advance(); skip_until_kw("endpackage"); return; }
    if (t.is_kw("class")) { note_skipped("class", t.span); advance(); skip_until_kw("endclass"); return; }
    if (t.is_kw("primitive")) { note_skipped("primitive", t.span); advance(); skip_until_kw("endprimitive"); return; }
    // Anything else at the top level: swallow the run up to the next module.
    SourceSpan s = t.span;
    note_skipped("top-level construct", s);
    while (!at_eof() && !cur().is_kw("module")) advance();
  }

  // -- module --------------------------------------------------------------

  DesignUnit parse_module() {
    DesignUnit unit;
    unit.file = file_;
    const Token& kw = cur();
    expect_kw("module");
    unit.span = kw.span;
    unit.name = expect_ident();
    if (cur().is_punct("#")) {
      note_skipped("module parameter list", cur().span);
      advance();
      skip_balanced_parens();
    }
    if (accept_punct("(")) parse_port_list(unit);
    expect_punct(";");
    while (!at_eof() && !cur().is_kw("endmodule")) parse_module_item(unit);
    if (!cur().is_kw("endmodule")) {
      add_diag(*diags_, Severity::Error, "unbalanced-module",
               "module '" + unit.name + "' has no matching endmodule",
               unit.span);
    } else {
      unit.span = merge(unit.span, cur().span);
      advance();
    }
    unit.source = slice_span(source_, unit.span);
    return unit;
  }

  std::optional<std::pair<int, int>> parse_range() {
    // '[' const ':' const ']'
    if (!accept_punct("[")) return std::nullopt;
    ExprPtr msb = parse_expr();
    expect_punct(":");
    ExprPtr lsb = parse_expr();
    expect_punct("]");
    auto m = const_eval(*msb), l = const_eval(*lsb);
    if (!m || !l) {
      add_diag(*diags_, Severity::Warning, "nonconst-range",
               "range bounds are not constant; treated as [0:0]", msb->span);
      return std::make_pair(0, 0);
    }
    return std::make_pair(static_cast<int>(*m), static_cast<int>(*l));
  }

  static SignalKind dir_signal_kind(Direction d) {
    switch (d) {
      case Direction::Input: return SignalKind::Input;
      case Direction::Output: return SignalKind::Output;
      case Direction::Inout: return SignalKind::Inout;
    }
    return SignalKind::Input;
  }

  std::optional<Direction> cur_direction() const {
    if (cur().is_kw("input")) return Direction::Input;
    if (cur().is_kw("output")) return Direction::Output;
    if (cur().is_kw("inout")) return Direction::Inout;
    return std::nullopt;
  }

  void parse_port_list(DesignUnit& unit) {
    if (accept_punct(")")) return;
    bool ansi = cur_direction().has_value();
    if (!ansi) {
      // plain name list
      for (;;) {
        const Token& t = cur();
        PortDecl p;
        p.name = expect_ident();
        p.span = t.span;
        unit.ports.push_back(std::move(p));
        if (!accept_punct(",")) break;
      }
      expect_punct(")");
      return;
    }
    Direction dir = Direction::Input;
    bool has_range = false;
    int msb = 0, lsb = 0;
    for (;;) {
      if (auto d = cur_direction()) {
        dir = *d;
        advance();
        while (cur().is_kw("wire") || cur().is_kw("reg") || cur().is_kw("logic") ||
               cur().is_kw("signed") || cur().is_kw("unsigned"))
          advance();
        has_range = false;
        msb = lsb = 0;
        if (cur().is_punct("[")) {
          auto r = parse_range();
          if (r) { has_range = true; msb = r->first; lsb = r->second; }
        }
      }
      const Token& t = cur();
      std::string name = expect_ident();
      PortDecl p;
      p.name = name;
      p.direction = dir;
      p.has_range = has_range;
      p.msb = msb;
      p.lsb = lsb;
      p.span = t.span;
      unit.ports.push_back(p);
      SignalDecl sig;
      sig.name = name;
      sig.kind = dir_signal_kind(dir);
      sig.msb = msb;
      sig.lsb = lsb;
      sig.span = t.span;
      unit.signals.push_back(std::move(sig));
      if (accept_punct(",")) continue;
      expect_punct(")");
      return;
    }
  }

  void parse_module_item(DesignUnit& unit) {
    const Token& t = cur();
    if (auto dir = cur_direction()) {
      parse_body_port_decl(unit, *dir);
      return;
    }
    if (t.is_kw("wire")) { parse_net_decl(unit, SignalKind::Wire); return; }
    if (t.is_kw("reg")) { parse_net_decl(unit, SignalKind::Reg); return; }
    if (t.is_kw("logic")) { parse_net_decl(unit, SignalKind::Logic); return; }
    if (t.is_kw("integer")) { parse_integer_decl(unit); return; }
    if (t.is_kw("assign")) { parse_continuous_assign(unit); return; }
    if (t.is_kw("always") || t.is_kw("always_comb") || t.is_kw("always_ff") ||
        t.is_kw("always_latch")) {
      parse_always(unit);
      return;
    }
    if (t.is_kw("initial")) {
      note_skipped("initial block", t.span);
      advance();
      skip_statement_tokens();
      return;
    }
    if (t.is_kw("function")) { note_skipped("function", t.span); advance(); skip_until_kw("endfunction"); return; }
    if (t.is_kw("task")) { note_skipped("task", t.span); advance(); skip_until_kw("endtask"); return; }
    if (t.is_kw("generate")) { note_skipped("generate block", t.span); advance(); skip_until_kw("endgenerate"); return; }
    if (t.is_kw("specify")) { note_skipped("specify block", t.span); advance(); skip_until_kw("endspecify"); return; }
    if (t.is_kw("parameter") || t.is_kw("localparam") || t.is_kw("defparam") ||
        t.is_kw("typedef") || t.is_kw("genvar") || t.is_kw("enum") ||
        t.is_kw("struct")) {
      note_skipped(t.lexeme, t.span);
      skip_to_semicolon();
      return;
    }
    if (t.is_kw("assert") || t.is_kw("property") || t.is_kw("sequence") ||
        t.is_kw("bind")) {
      note_skipped(t.lexeme, t.span);
      skip_to_semicolon();
      return;
    }
    if (t.is_punct(";")) { advance(); return; }
    if (t.is(TokenKind::Identifier)) {
      if (t.lexeme[0] == '$') {  // stray system task at module level
        note_skipped("system task", t.span);
        skip_to_semicolon();
        return;
      }
      parse_instance(unit);
      return;
    }
    fail("unexpected token in module body");
  }

  void parse_body_port_decl(DesignUnit& unit, Direction dir) {
    advance();  // direction keyword
    while (cur().is_kw("wire") || cur().is_kw("reg") || cur().is_kw("logic") ||
           cur().is_kw("signed") || cur().is_kw("unsigned"))
      advance();
    bool has_range = false;
    int msb = 0, lsb = 0;
    if (cur().is_punct("[")) {
      auto r = parse_range();
      if (r) { has_range = true; msb = r->first; lsb = r->second; }
    }
    for (;;) {
      const Token& t = cur();
      std::string name = expect_ident();
      PortDecl* port = nullptr;
      for (auto& p : unit.ports)
        if (p.name == name) { port = &p; break; }
      if (!port) {
        unit.ports.push_back({});
        port = &unit.ports.back();
        port->name = name;
        port->span = t.span;
      }
      port->direction = dir;
      port->has_range = has_range;
      port->msb = msb;
      port->lsb = lsb;
      SignalDecl* sig = nullptr;
      for (auto& s : unit.signals)
        if (s.name == name) { sig = &s; break; }
      if (!sig) {
        unit.signals.push_back({});
        sig = &unit.signals.back();
        sig->name = name;
        sig->span = t.span;
      }
      sig->kind = dir_signal_kind(dir);
      sig->msb = msb;
      sig->lsb = lsb;
      if (!accept_punct(",")) break;
    }
    expect_punct(";");
  }

  void parse_net_decl(DesignUnit& unit, SignalKind kind) {
    advance();  // wire/reg/logic
    accept_kw("signed");
    accept_kw("unsigned");
    bool has_range = false;
    int msb = 0, lsb = 0;
    if (cur().is_punct("[")) {
      auto r = parse_range();
      if (r) { has_range = true; msb = r->first; lsb = r->second; }
    }
    (void)has_range;
    for (;;) {
      const Token& t = cur();
      std::string name = expect_ident();
      SignalDecl* existing = nullptr;
      for (auto& s : unit.signals)
        if (s.name == name) { existing = &s; break; }
      SignalDecl fresh;
      SignalDecl& sig = existing ? *existing : fresh;
      if (!existing) {
        sig.name = name;
        sig.kind = kind;
        sig.msb = msb;
        sig.lsb = lsb;
        sig.span = t.span;
      }
      // Re-declaration of a port as wire/reg keeps the port kind and range.
      if (cur().is_punct("[")) {
        auto r = parse_range();
        if (r) {
          sig.is_array = true;
          sig.array_left = r->first;
          sig.array_right = r->second;
        }
      }
      if (accept_op("=")) {
        ExprPtr init = parse_expr();
        auto v = const_eval(*init);
        if (v) sig.init_value = static_cast<uint64_t>(*v);
        else
          add_diag(*diags_, Severity::Warning, "nonconst-init",
                   "non-constant initializer ignored", init->span);
      }
      if (!existing) unit.signals.push_back(sig);
      if (!accept_punct(",")) break;
    }
    expect_punct(";");
  }

  void parse_integer_decl(DesignUnit& unit) {
    const Token& t = cur();
    advance();
    for (;;) {
      SignalDecl sig;
      sig.name = expect_ident();
      sig.kind = SignalKind::Reg;  // integer behaves as a 32-bit reg here
      sig.msb = 31;
      sig.lsb = 0;
      sig.span = t.span;
      unit.signals.push_back(std::move(sig));
      if (!accept_punct(",")) break;
    }
    expect_punct(";");
  }

  void parse_continuous_assign(DesignUnit& unit) {
    const Token& kw = cur();
    expect_kw("assign");
    for (;;) {
      Assign a;
      a.lhs = parse_lvalue();
      if (!accept_op("=")) fail("expected '=' in continuous assign");
      a.rhs = parse_expr();
      a.span = merge(kw.span, a.rhs->span);
      unit.continuous_assigns.push_back(std::move(a));
      if (!accept_punct(",")) break;
    }
    expect_punct(";");
  }

  Sensitivity parse_sensitivity() {
    Sensitivity s;
    expect_punct("@");
    if (accept_op("*")) { s.star = true; return s; }
    expect_punct("(");
    if (accept_op("*")) { s.star = true; expect_punct(")"); return s; }
    for (;;) {
      if (cur().is_kw("posedge") || cur().is_kw("negedge")) {
        EdgeEvent e;
        e.posedge = cur().is_kw("posedge");
        advance();
        e.signal = expect_ident();
        s.edges.push_back(std::move(e));
      } else {
        s.level_signals.push_back(expect_ident());
      }
      if (accept_kw("or") || accept_punct(",")) continue;
      break;
    }
    expect_punct(")");
    return s;
  }

  void parse_always(DesignUnit& unit) {
    const Token& kw = cur();
    AlwaysBlock block;
    if (accept_kw("always_comb") || accept_kw("always_latch")) {
      block.sensitivity.star = true;
    } else if (accept_kw("always_ff")) {
      block.sensitivity = parse_sensitivity();
    } else {
      expect_kw("always");
      block.sensitivity = parse_sensitivity();
    }
    block.body = parse_statement();
    block.span = merge(kw.span, block.body->span);
    unit.always_blocks.push_back(std::move(block));
  }

  void parse_instance(DesignUnit& unit) {
    Instance inst;
    const Token& t = cur();
    inst.module_name = expect_ident();
    inst.span = t.span;
    if (cur().is_punct("#")) {
      note_skipped("instance parameter override", cur().span);
      advance();
      skip_balanced_parens();
    }
    inst.instance_name = expect_ident();
    expect_punct("(");
    if (!cur().is_punct(")")) {
      for (;;) {
        PortConnection conn;
        if (accept_punct(".")) {
          const Token& pt = cur();
          conn.port = expect_ident();
          conn.span = pt.span;
          expect_punct("(");
          if (!cur().is_punct(")")) conn.expr = parse_expr();
          expect_punct(")");
        } else {
          conn.span = cur().span;
          conn.expr = parse_expr();
        }
        inst.connections.push_back(std::move(conn));
        if (!accept_punct(",")) break;
      }
    }
    expect_punct(")");
    inst.span = merge(inst.span, cur().span);
    expect_punct(";");
    unit.instances.push_back(std::move(inst));
  }

  // Token-level skip of one statement (for initial blocks): a begin/end tree
  // or everything through ';'.
  void skip_statement_tokens() {
    if (cur().is_punct("#")) { advance(); if (cur().is(TokenKind::Number)) advance(); }
    if (cur().is_kw("begin")) {
      int depth = 0;
      while (!at_eof()) {
        if (cur().is_kw("begin")) ++depth;
        if (cur().is_kw("end")) {
          advance();
          if (--depth == 0) return;
          continue;
        }
        if (cur().is_kw("endmodule")) return;
        advance();
      }
      return;
    }
    skip_to_semicolon();
  }

  // -- statements -----------------------------------------------------------

  StmtPtr parse_statement() {
    const Token& t = cur();
    if (t.is_punct("#")) {  // delay control: drop and keep going
      note_skipped("delay control", t.span);
      advance();
      if (cur().is(TokenKind::Number)) advance();
      return parse_statement();
    }
    if (t.is_kw("begin")) return parse_block();
    if (t.is_kw("if")) return parse_if();
    if (t.is_kw("case") || t.is_kw("casez") || t.is_kw("casex")) return parse_case();
    if (t.is_kw("for")) return parse_for();
    if (t.is_punct(";")) {  // null statement
      advance();
      auto s = std::make_shared<Stmt>();
      s->kind = Stmt::Kind::Block;
      s->span = t.span;
      return s;
    }
    if (t.is_kw("while") || t.is_kw("repeat") || t.is_kw("forever") ||
        t.is_kw("wait") || t.is_kw("fork") || t.is_kw("disable")) {
      note_skipped(t.lexeme, t.span);
      advance();
      skip_to_semicolon();
      auto s = std::make_shared<Stmt>();
      s->kind = Stmt::Kind::Block;
      s->span = t.span;
      return s;
    }
    if (t.is(TokenKind::Identifier) && t.lexeme[0] == '$') {
      // system task statement ($display, ...)
      note_skipped("system task", t.span);
      advance();
      skip_balanced_parens();
      expect_punct(";");
      auto s = std::make_shared<Stmt>();
      s->kind = Stmt::Kind::Block;
      s->span = t.span;
      return s;
    }
    return parse_assignment();
  }

  StmtPtr parse_block() {
    const Token& kw = cur();
    expect_kw("begin");
    if (accept_punct(":")) expect_ident();  // block label
    auto s = std::make_shared<Stmt>();
    s->kind = Stmt::Kind::Block;
    s->span = kw.span;
    while (!at_eof() && !cur().is_kw("end")) {
      if (cur().is_kw("endmodule")) fail("unterminated begin/end block");
      s->stmts.push_back(parse_statement());
    }
    s->span = merge(kw.span, cur().span);
    expect_kw("end");
    if (accept_punct(":")) expect_ident();
    return s;
  }

  StmtPtr parse_if() {
    const Token& kw = cur();
    expect_kw("if");
    auto s = std::make_shared<Stmt>();
    s->kind = Stmt::Kind::If;
    expect_punct("(");
    s->cond = parse_expr();
    expect_punct(")");
    s->then_branch = parse_statement();
    s->span = merge(kw.span, s->then_branch->span);
    if (accept_kw("else")) {
      s->else_branch = parse_statement();
      s->span = merge(s->span, s->else_branch->span);
    }
    return s;
  }

  StmtPtr parse_case() {
    const Token& kw = cur();
    advance();  // case/casez/casex (wildcard digits are matched literally)
    auto s = std::make_shared<Stmt>();
    s->kind = Stmt::Kind::Case;
    expect_punct("(");
    s->cond = parse_expr();
    expect_punct(")");
    while (!at_eof() && !cur().is_kw("endcase")) {
      if (cur().is_kw("endmodule")) fail("unterminated case statement");
      if (accept_kw("default")) {
        accept_punct(":");
        s->case_default = parse_statement();
        continue;
      }
      CaseItem item;
      item.span = cur().span;
      for (;;) {
        item.labels.push_back(parse_expr());
        if (!accept_punct(",")) break;
      }
      expect_punct(":");
      item.body = parse_statement();
      item.span = merge(item.span, item.body->span);
      s->case_items.push_back(std::move(item));
    }
    s->span = merge(kw.span, cur().span);
    expect_kw("endcase");
    return s;
  }

  StmtPtr parse_for() {
    const Token& kw = cur();
    expect_kw("for");
    auto s = std::make_shared<Stmt>();
    s->kind = Stmt::Kind::For;
    expect_punct("(");
    s->for_init = parse_plain_assign();
    expect_punct(";");
    s->cond = parse_expr();
    expect_punct(";");
    s->for_step = parse_plain_assign();
    expect_punct(")");
    s->body = parse_statement();
    s->span = merge(kw.span, s->body->span);
    return s;
  }

  StmtPtr parse_plain_assign() {
    auto s = std::make_shared<Stmt>();
    s->kind = Stmt::Kind::BlockingAssign;
    s->lhs = parse_lvalue();
    if (!accept_op("=")) fail("expected '=' in for header");
    s->rhs = parse_expr();
    s->span = merge(s->lhs->span, s->rhs->span);
    return s;
  }

  StmtPtr parse_assignment() {
    auto s = std::make_shared<Stmt>();
    s->lhs = parse_lvalue();
    if (accept_op("=")) {
      s->kind = Stmt::Kind::BlockingAssign;
    } else if (accept_op("<=")) {
      s->kind = Stmt::Kind::NonblockingAssign;
    } else {
      fail("expected '=' or '<=' in assignment");
    }
    s->rhs = parse_expr();
    s->span = merge(s->lhs->span, s->rhs->span);
    const Token& semi = cur();
    expect_punct(";");
    s->span = merge(s->span, semi.span);
    return s;
  }

  // lvalue: identifier with select chain, or a concat of lvalues
  ExprPtr parse_lvalue() {
    if (cur().is_punct("{")) {
      const Token& open = cur();
      advance();
      auto e = std::make_shared<Expr>();
      e->kind = Expr::Kind::Concat;
      e->span = open.span;
      for (;;) {
        e->operands.push_back(parse_lvalue());
        if (!accept_punct(",")) break;
      }
      e->span = merge(open.span, cur().span);
      expect_punct("}");
      return e;
    }
    if (!cur().is(TokenKind::Identifier)) fail("expected lvalue");
    return parse_postfix(make_ident(advance()));
  }

  // -- expressions -----------------------------------------------------------

  static ExprPtr make_ident(const Token& t) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::Identifier;
    e->text = t.lexeme;
    e->span = t.span;
    return e;
  }

  ExprPtr parse_expr() { return parse_ternary(); }

  ExprPtr parse_ternary() {
    ExprPtr cond = parse_binary(1);
    if (!cur().is_op("?")) return cond;
    advance();
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::Ternary;
    e->text = "?:";
    ExprPtr then_e = parse_expr();
    expect_punct(":");
    ExprPtr else_e = parse_expr();
    e->span = merge(cond->span, else_e->span);
    e->operands = {cond, then_e, else_e};
    return e;
  }

  std::optional<int> cur_binary_prec() const {
    if (!cur().is(TokenKind::Operator)) return std::nullopt;
    const std::string& op = cur().lexeme;
    if (op == "||") return 1;
    if (op == "&&") return 2;
    if (op == "|") return 3;
    if (op == "^" || op == "^~" || op == "~^") return 4;
    if (op == "&") return 5;
    if (op == "==" || op == "!=" || op == "===" || op == "!==") return 6;
    if (op == "<" || op == "<=" || op == ">" || op == ">=") return 7;
    if (op == "<<" || op == ">>" || op == "<<<" || op == ">>>") return 8;
    if (op == "+" || op == "-") return 9;
    if (op == "*" || op == "/" || op == "%") return 10;
    return std::nullopt;
  }

  ExprPtr parse_binary(int min_prec) {
    ExprPtr lhs = parse_unary();
    for (;;) {
      auto prec = cur_binary_prec();
      if (!prec || *prec < min_prec) return lhs;
      std::string op = advance().lexeme;
      ExprPtr rhs = parse_binary(*prec + 1);
      auto e = std::make_shared<Expr>();
      e->kind = Expr::Kind::Binary;
      e->text = std::move(op);
      e->span = merge(lhs->span, rhs->span);
      e->operands = {lhs, rhs};
      lhs = e;
    }
  }

  ExprPtr parse_unary() {
    if (cur().is(TokenKind::Operator)) {
      const std::string& op = cur().lexeme;
      if (op == "~" || op == "!" || op == "-" || op == "+" || op == "&" ||
          op == "|" || op == "^" || op == "~&" || op == "~|" || op == "~^" ||
          op == "^~") {
        const Token& t = advance();
        ExprPtr operand = parse_unary();
        auto e = std::make_shared<Expr>();
        e->kind = Expr::Kind::Unary;
        e->text = t.lexeme;
        e->span = merge(t.span, operand->span);
        e->operands = {operand};
        return e;
      }
    }
    return parse_postfix(parse_primary());
  }

  ExprPtr parse_postfix(ExprPtr base) {
    while (cur().is_punct("[")) {
      const Token& open = cur();
      advance();
      ExprPtr first = parse_expr();
      if (accept_punct(":")) {
        ExprPtr second = parse_expr();
        auto e = std::make_shared<Expr>();
        e->kind = Expr::Kind::PartSelect;
        e->operands = {base, first, second};
        e->span = merge(base->span, cur().span);
        expect_punct("]");
        base = e;
        continue;
      }
      if (cur().is_op("+:") || cur().is_op("-:")) {
        note_skipped("indexed part-select", cur().span);
        advance();
        parse_expr();  // width part, dropped
        auto e = std::make_shared<Expr>();
        e->kind = Expr::Kind::Index;
        e->operands = {base, first};
        e->span = merge(base->span, cur().span);
        expect_punct("]");
        base = e;
        continue;
      }
      auto e = std::make_shared<Expr>();
      e->kind = Expr::Kind::Index;
      e->operands = {base, first};
      e->span = merge(base->span, cur().span);
      expect_punct("]");
      base = e;
      (void)open;
    }
    return base;
  }

  ExprPtr parse_primary() {
    const Token& t = cur();
    if (t.is(TokenKind::Number)) {
      advance();
      auto e = std::make_shared<Expr>();
      e->kind = Expr::Kind::Number;
      e->text = t.lexeme;
      e->number = t.number;
      e->span = t.span;
      return e;
    }
    if (t.is(TokenKind::Identifier)) {
      advance();
      if (t.lexeme[0] == '$' && cur().is_punct("(")) {
        auto e = std::make_shared<Expr>();
        e->kind = Expr::Kind::SysCall;
        e->text = t.lexeme;
        e->span = t.span;
        advance();
        if (!cur().is_punct(")")) {
          for (;;) {
            e->operands.push_back(parse_expr());
            if (!accept_punct(",")) break;
          }
        }
        e->span = merge(e->span, cur().span);
        expect_punct(")");
        return e;
      }
      return make_ident(t);
    }
    if (t.is_punct("(")) {
      advance();
      ExprPtr inner = parse_expr();
      expect_punct(")");
      return inner;
    }
    if (t.is_punct("{")) return parse_concat();
    fail("expected expression");
  }

  ExprPtr parse_concat() {
    const Token& open = cur();
    expect_punct("{");
    ExprPtr first = parse_expr();
    if (cur().is_punct("{")) {
      // replication {count{items}}
      advance();
      auto e = std::make_shared<Expr>();
      e->kind = Expr::Kind::Replication;
      std::vector<ExprPtr> items;
      for (;;) {
        items.push_back(parse_expr());
        if (!accept_punct(",")) break;
      }
      expect_punct("}");
      ExprPtr operand;
      if (items.size() == 1) {
        operand = items[0];
      } else {
        auto c = std::make_shared<Expr>();
        c->kind = Expr::Kind::Concat;
        c->operands = std::move(items);
        c->span = merge(open.span, cur().span);
        operand = c;
      }
      e->operands = {first, operand};
      e->span = merge(open.span, cur().span);
      expect_punct("}");
      return e;
    }
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::Concat;
    e->operands.push_back(first);
    while (accept_punct(",")) e->operands.push_back(parse_expr());
    e->span = merge(open.span, cur().span);
    expect_punct("}");
    return e;
  }
};

}  // namespace detail

/// Parse Verilog source into design units. Syntax errors drop the offending
/// module and recover at the next module boundary; out-of-subset constructs
/// are skipped with diagnostics. Never throws on any byte input.
inline ParseResult parse_source(std::string_view source, std::string file) {
  ParseResult result;
  Diagnostics lex_diags;
  std::vector<Token> tokens = tokenize(source, file, lex_diags);
  result.diags = std::move(lex_diags);
  try {
    detail::Parser p(std::move(tokens), source, file);
    result.units = p.run(result.diags);
  } catch (const std::exception& e) {
    add_diag(result.diags, Severity::Error, "internal-error",
             std::string("parser aborted: ") + e.what());
  } catch (...) {
    add_diag(result.diags, Severity::Error, "internal-error", "parser aborted");
  }
  return result;
}

/// Parse a standalone expression (LLM-provided condition text). Returns null
/// and a diagnostic when the text does not parse as a complete expression.
inline ExprPtr parse_expression_text(std::string_view text, Diagnostics& diags) {
  // Reuse the full grammar by parsing the text as the RHS of a synthetic
  // continuous assign; stray tokens or embedded statements make the wrapper
  // module fail to parse, which is exactly a rejection.
  std::string wrapped =
      "module __expr_probe ();\nassign __x = " + std::string(text) +
      ";\nendmodule\n";
  ParseResult r = parse_source(wrapped, "<expr>");
  bool ok = r.units.size() == 1 && r.units[0].continuous_assigns.size() == 1;
  for (const auto& d : r.diags)
    if (d.severity == Severity::Error) ok = false;
  if (!ok) {
    add_diag(diags, Severity::Error, "bad-expression",
             "text does not parse as a single expression: '" +
                 std::string(text) + "'");
    return nullptr;
  }
  return r.units[0].continuous_assigns[0].rhs;
}

}  // namespace rtlscan
