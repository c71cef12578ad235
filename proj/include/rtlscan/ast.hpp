#pragma once

#include <algorithm>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "rtlscan/lexer.hpp"

namespace rtlscan {

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

// Expression node. Immutable after construction; shared freely across
// analysis workers.
struct Expr {
  enum class Kind {
    Identifier,
    Index,        // operands: base, index
    PartSelect,   // operands: base, msb, lsb (msb/lsb constant exprs)
    Concat,       // operands: items left to right
    Replication,  // operands: count, operand
    Unary,        // operands: operand
    Binary,       // operands: lhs, rhs
    Ternary,      // operands: cond, then, else
    Number,
    SysCall,      // operands: args ($stable, $signed, ...)
  };

  Kind kind = Kind::Number;
  SourceSpan span;
  // Identifier name, operator text, syscall name, or the raw number lexeme.
  std::string text;
  NumberValue number;
  std::vector<ExprPtr> operands;

  static ExprPtr ident(std::string name, SourceSpan s = {}) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Identifier;
    e->text = std::move(name);
    e->span = std::move(s);
    return e;
  }
};

inline bool expr_equal(const Expr& a, const Expr& b) {
  if (a.kind != b.kind || a.text != b.text) return false;
  if (a.kind == Expr::Kind::Number) {
    const auto &n = a.number, &m = b.number;
    if (n.sized != m.sized || n.value != m.value || n.unbased != m.unbased ||
        n.has_unknown_bits != m.has_unknown_bits)
      return false;
    if (n.sized && (n.width != m.width || n.base != m.base)) return false;
  }
  if (a.operands.size() != b.operands.size()) return false;
  for (size_t i = 0; i < a.operands.size(); ++i)
    if (!expr_equal(*a.operands[i], *b.operands[i])) return false;
  return true;
}

struct Stmt;
using StmtPtr = std::shared_ptr<const Stmt>;

struct CaseItem {
  std::vector<ExprPtr> labels;
  StmtPtr body;
  SourceSpan span;
};

struct Stmt {
  enum class Kind { BlockingAssign, NonblockingAssign, If, Case, Block, For };

  Kind kind = Kind::Block;
  SourceSpan span;

  ExprPtr lhs, rhs;  // assigns
  ExprPtr cond;      // if condition / case selector / for condition

  // If: else_branch null iff the source had no else (the distinction the
  // side-channel checks key on).
  StmtPtr then_branch, else_branch;

  std::vector<CaseItem> case_items;
  StmtPtr case_default;  // null when no default item

  std::vector<StmtPtr> stmts;  // Block

  StmtPtr for_init, for_step, body;  // For
};

inline bool stmt_equal(const Stmt& a, const Stmt& b);

inline bool stmt_ptr_equal(const StmtPtr& a, const StmtPtr& b) {
  if (!a || !b) return !a && !b;
  return stmt_equal(*a, *b);
}
inline bool expr_ptr_equal(const ExprPtr& a, const ExprPtr& b) {
  if (!a || !b) return !a && !b;
  return expr_equal(*a, *b);
}

inline bool stmt_equal(const Stmt& a, const Stmt& b) {
  if (a.kind != b.kind) return false;
  if (!expr_ptr_equal(a.lhs, b.lhs) || !expr_ptr_equal(a.rhs, b.rhs) ||
      !expr_ptr_equal(a.cond, b.cond))
    return false;
  if (!stmt_ptr_equal(a.then_branch, b.then_branch) ||
      !stmt_ptr_equal(a.else_branch, b.else_branch) ||
      !stmt_ptr_equal(a.case_default, b.case_default) ||
      !stmt_ptr_equal(a.for_init, b.for_init) ||
      !stmt_ptr_equal(a.for_step, b.for_step) || !stmt_ptr_equal(a.body, b.body))
    return false;
  if (a.case_items.size() != b.case_items.size()) return false;
  for (size_t i = 0; i < a.case_items.size(); ++i) {
    const auto &x = a.case_items[i], &y = b.case_items[i];
    if (x.labels.size() != y.labels.size()) return false;
    for (size_t j = 0; j < x.labels.size(); ++j)
      if (!expr_ptr_equal(x.labels[j], y.labels[j])) return false;
    if (!stmt_ptr_equal(x.body, y.body)) return false;
  }
  if (a.stmts.size() != b.stmts.size()) return false;
  for (size_t i = 0; i < a.stmts.size(); ++i)
    if (!stmt_ptr_equal(a.stmts[i], b.stmts[i])) return false;
  return true;
}

enum class Direction { Input, Output, Inout };

enum class SignalKind { Wire, Reg, Logic, Input, Output, Inout };

struct PortDecl {
  std::string name;
  Direction direction = Direction::Input;
  bool has_range = false;
  int msb = 0, lsb = 0;
  SourceSpan span;
};

struct SignalDecl {
  std::string name;
  SignalKind kind = SignalKind::Wire;
  int msb = 0, lsb = 0;  // packed range; scalar signals use 0,0
  bool is_array = false;
  int array_left = 0, array_right = 0;
  std::optional<uint64_t> init_value;  // declaration initializer, if any
  SourceSpan span;

  int width() const { return std::abs(msb - lsb) + 1; }
  int array_size() const {
    return is_array ? std::abs(array_left - array_right) + 1 : 0;
  }
  bool descending() const { return msb >= lsb; }
};

struct EdgeEvent {
  bool posedge = true;
  std::string signal;
};

struct Sensitivity {
  bool star = false;
  std::vector<EdgeEvent> edges;
  std::vector<std::string> level_signals;  // @(a or b) style lists

  bool combinational() const { return star || (edges.empty() && !level_signals.empty()); }
};

struct AlwaysBlock {
  Sensitivity sensitivity;
  StmtPtr body;
  SourceSpan span;
};

struct Assign {
  ExprPtr lhs, rhs;
  SourceSpan span;
};

struct PortConnection {
  std::string port;  // empty for positional connections
  ExprPtr expr;      // null for unconnected .port()
  SourceSpan span;
};

struct Instance {
  std::string module_name;
  std::string instance_name;
  std::vector<PortConnection> connections;
  SourceSpan span;
};

// One parsed Verilog module.
struct DesignUnit {
  std::string name;
  std::string file;
  // Exact source slice from `module` through `endmodule`; statement text in
  // violations is cut from this.
  std::string source;
  SourceSpan span;

  std::vector<PortDecl> ports;
  std::vector<SignalDecl> signals;
  std::vector<AlwaysBlock> always_blocks;
  std::vector<Assign> continuous_assigns;
  std::vector<Instance> instances;
};

// Name -> declaration lookup over a unit's signals (ports included; port
// declarations always have a matching SignalDecl).
class SymbolTable {
 public:
  SymbolTable() = default;
  explicit SymbolTable(const DesignUnit& unit) {
    for (const auto& s : unit.signals) map_.emplace(s.name, &s);
  }

  const SignalDecl* lookup(const std::string& name) const {
    auto it = map_.find(name);
    return it == map_.end() ? nullptr : it->second;
  }

 private:
  std::unordered_map<std::string, const SignalDecl*> map_;
};

// ---------------------------------------------------------------------------
// Signal reference collection

namespace detail {

inline void collect_expr_refs(const Expr& e, std::vector<std::string>& out) {
  switch (e.kind) {
    case Expr::Kind::Identifier:
      out.push_back(e.text);
      return;
    case Expr::Kind::Number:
      return;
    default:
      for (const auto& op : e.operands)
        if (op) collect_expr_refs(*op, out);
  }
}

inline void collect_stmt_refs(const Stmt& s, std::vector<std::string>& out) {
  if (s.lhs) collect_expr_refs(*s.lhs, out);
  if (s.rhs) collect_expr_refs(*s.rhs, out);
  if (s.cond) collect_expr_refs(*s.cond, out);
  if (s.then_branch) collect_stmt_refs(*s.then_branch, out);
  if (s.else_branch) collect_stmt_refs(*s.else_branch, out);
  for (const auto& item : s.case_items) {
    for (const auto& l : item.labels)
      if (l) collect_expr_refs(*l, out);
    if (item.body) collect_stmt_refs(*item.body, out);
  }
  if (s.case_default) collect_stmt_refs(*s.case_default, out);
  for (const auto& sub : s.stmts)
    if (sub) collect_stmt_refs(*sub, out);
  if (s.for_init) collect_stmt_refs(*s.for_init, out);
  if (s.for_step) collect_stmt_refs(*s.for_step, out);
  if (s.body) collect_stmt_refs(*s.body, out);
}

}  // namespace detail

/// Identifiers referenced by an expression, in first-occurrence textual order.
inline std::vector<std::string> collect_signal_refs_ordered(const Expr& e) {
  std::vector<std::string> raw, out;
  detail::collect_expr_refs(e, raw);
  for (auto& n : raw)
    if (std::find(out.begin(), out.end(), n) == out.end()) out.push_back(n);
  return out;
}

inline std::vector<std::string> collect_signal_refs_ordered(const Stmt& s) {
  std::vector<std::string> raw, out;
  detail::collect_stmt_refs(s, raw);
  for (auto& n : raw)
    if (std::find(out.begin(), out.end(), n) == out.end()) out.push_back(n);
  return out;
}

inline std::set<std::string> collect_signal_refs(const Expr& e) {
  auto v = collect_signal_refs_ordered(e);
  return {v.begin(), v.end()};
}

inline std::set<std::string> collect_signal_refs(const Stmt& s) {
  auto v = collect_signal_refs_ordered(s);
  return {v.begin(), v.end()};
}

// ---------------------------------------------------------------------------
// Rendering (canonical re-print; parse(render(ast)) is structurally identical
// to ast)

namespace detail {

inline int binary_precedence(const std::string& op) {
  if (op == "||") return 1;
  if (op == "&&") return 2;
  if (op == "|") return 3;
  if (op == "^" || op == "^~" || op == "~^") return 4;
  if (op == "&") return 5;
  if (op == "==" || op == "!=" || op == "===" || op == "!==") return 6;
  if (op == "<" || op == "<=" || op == ">" || op == ">=") return 7;
  if (op == "<<" || op == ">>" || op == "<<<" || op == ">>>") return 8;
  if (op == "+" || op == "-") return 9;
  return 10;  // * / %
}

}  // namespace detail

inline std::string render_expr(const Expr& e, int parent_prec = 0) {
  switch (e.kind) {
    case Expr::Kind::Identifier:
      return e.text;
    case Expr::Kind::Number:
      return e.text;
    case Expr::Kind::Index:
      return render_expr(*e.operands[0], 99) + "[" + render_expr(*e.operands[1]) + "]";
    case Expr::Kind::PartSelect:
      return render_expr(*e.operands[0], 99) + "[" + render_expr(*e.operands[1]) +
             ":" + render_expr(*e.operands[2]) + "]";
    case Expr::Kind::Concat: {
      std::string out = "{";
      for (size_t i = 0; i < e.operands.size(); ++i) {
        if (i) out += ", ";
        out += render_expr(*e.operands[i]);
      }
      return out + "}";
    }
    case Expr::Kind::Replication:
      return "{" + render_expr(*e.operands[0], 99) + "{" +
             render_expr(*e.operands[1]) + "}}";
    case Expr::Kind::Unary: {
      std::string out = e.text + render_expr(*e.operands[0], 98);
      return out;
    }
    case Expr::Kind::Binary: {
      int prec = detail::binary_precedence(e.text);
      std::string out = render_expr(*e.operands[0], prec - 1) + " " + e.text +
                        " " + render_expr(*e.operands[1], prec);
      if (prec <= parent_prec) out = "(" + out + ")";
      return out;
    }
    case Expr::Kind::Ternary: {
      std::string out = render_expr(*e.operands[0], 97) + " ? " +
                        render_expr(*e.operands[1]) + " : " +
                        render_expr(*e.operands[2]);
      if (parent_prec > 0) out = "(" + out + ")";
      return out;
    }
    case Expr::Kind::SysCall: {
      std::string out = e.text + "(";
      for (size_t i = 0; i < e.operands.size(); ++i) {
        if (i) out += ", ";
        out += render_expr(*e.operands[i]);
      }
      return out + ")";
    }
  }
  return {};
}

inline std::string render_stmt(const Stmt& s, int indent = 0) {
  std::string pad(static_cast<size_t>(indent) * 2, ' ');
  switch (s.kind) {
    case Stmt::Kind::BlockingAssign:
      return pad + render_expr(*s.lhs) + " = " + render_expr(*s.rhs) + ";\n";
    case Stmt::Kind::NonblockingAssign:
      return pad + render_expr(*s.lhs) + " <= " + render_expr(*s.rhs) + ";\n";
    case Stmt::Kind::If: {
      std::string out = pad + "if (" + render_expr(*s.cond) + ")\n";
      out += render_stmt(*s.then_branch, indent + 1);
      if (s.else_branch) {
        out += pad + "else\n";
        out += render_stmt(*s.else_branch, indent + 1);
      }
      return out;
    }
    case Stmt::Kind::Case: {
      std::string out = pad + "case (" + render_expr(*s.cond) + ")\n";
      for (const auto& item : s.case_items) {
        std::string labels;
        for (size_t i = 0; i < item.labels.size(); ++i) {
          if (i) labels += ", ";
          labels += render_expr(*item.labels[i]);
        }
        out += pad + "  " + labels + ":\n";
        out += render_stmt(*item.body, indent + 2);
      }
      if (s.case_default) {
        out += pad + "  default:\n";
        out += render_stmt(*s.case_default, indent + 2);
      }
      out += pad + "endcase\n";
      return out;
    }
    case Stmt::Kind::Block: {
      std::string out = pad + "begin\n";
      for (const auto& sub : s.stmts) out += render_stmt(*sub, indent + 1);
      out += pad + "end\n";
      return out;
    }
    case Stmt::Kind::For: {
      auto assign_text = [](const Stmt& a) {
        return render_expr(*a.lhs) + " = " + render_expr(*a.rhs);
      };
      std::string out = pad + "for (" + assign_text(*s.for_init) + "; " +
                        render_expr(*s.cond) + "; " + assign_text(*s.for_step) +
                        ")\n";
      out += render_stmt(*s.body, indent + 1);
      return out;
    }
  }
  return {};
}

inline std::string render_sensitivity(const Sensitivity& s) {
  if (s.star) return "@*";
  std::string out = "@(";
  bool first = true;
  for (const auto& e : s.edges) {
    if (!first) out += " or ";
    out += (e.posedge ? "posedge " : "negedge ") + e.signal;
    first = false;
  }
  for (const auto& l : s.level_signals) {
    if (!first) out += " or ";
    out += l;
    first = false;
  }
  return out + ")";
}

inline std::string render_unit(const DesignUnit& u) {
  std::string out = "module " + u.name + " (";
  for (size_t i = 0; i < u.ports.size(); ++i) {
    if (i) out += ", ";
    out += u.ports[i].name;
  }
  out += ");\n";
  // All declarations re-emit non-ANSI style in SignalDecl order, so the
  // re-parse reconstructs signals in the same order.
  for (const auto& sig : u.signals) {
    const char* kw = nullptr;
    switch (sig.kind) {
      case SignalKind::Wire: kw = "wire"; break;
      case SignalKind::Reg: kw = "reg"; break;
      case SignalKind::Logic: kw = "logic"; break;
      case SignalKind::Input: kw = "input"; break;
      case SignalKind::Output: kw = "output"; break;
      case SignalKind::Inout: kw = "inout"; break;
    }
    out += std::string("  ") + kw;
    if (sig.msb != 0 || sig.lsb != 0)
      out += " [" + std::to_string(sig.msb) + ":" + std::to_string(sig.lsb) + "]";
    out += " " + sig.name;
    if (sig.is_array)
      out += " [" + std::to_string(sig.array_left) + ":" +
             std::to_string(sig.array_right) + "]";
    if (sig.init_value) out += " = " + std::to_string(*sig.init_value);
    out += ";\n";
  }
  for (const auto& a : u.continuous_assigns)
    out += "  assign " + render_expr(*a.lhs) + " = " + render_expr(*a.rhs) + ";\n";
  for (const auto& b : u.always_blocks) {
    out += "  always " + render_sensitivity(b.sensitivity) + "\n";
    out += render_stmt(*b.body, 2);
  }
  for (const auto& inst : u.instances) {
    out += "  " + inst.module_name + " " + inst.instance_name + " (";
    for (size_t i = 0; i < inst.connections.size(); ++i) {
      if (i) out += ", ";
      const auto& c = inst.connections[i];
      if (!c.port.empty()) {
        out += "." + c.port + "(" + (c.expr ? render_expr(*c.expr) : "") + ")";
      } else if (c.expr) {
        out += render_expr(*c.expr);
      }
    }
    out += ");\n";
  }
  out += "endmodule\n";
  return out;
}

inline bool unit_equal(const DesignUnit& a, const DesignUnit& b) {
  if (a.name != b.name) return false;
  if (a.ports.size() != b.ports.size() || a.signals.size() != b.signals.size() ||
      a.always_blocks.size() != b.always_blocks.size() ||
      a.continuous_assigns.size() != b.continuous_assigns.size() ||
      a.instances.size() != b.instances.size())
    return false;
  for (size_t i = 0; i < a.ports.size(); ++i) {
    const auto &p = a.ports[i], &q = b.ports[i];
    if (p.name != q.name || p.direction != q.direction ||
        p.has_range != q.has_range || p.msb != q.msb || p.lsb != q.lsb)
      return false;
  }
  for (size_t i = 0; i < a.signals.size(); ++i) {
    const auto &p = a.signals[i], &q = b.signals[i];
    if (p.name != q.name || p.kind != q.kind || p.msb != q.msb ||
        p.lsb != q.lsb || p.is_array != q.is_array ||
        p.array_left != q.array_left || p.array_right != q.array_right ||
        p.init_value != q.init_value)
      return false;
  }
  for (size_t i = 0; i < a.always_blocks.size(); ++i) {
    const auto &p = a.always_blocks[i], &q = b.always_blocks[i];
    if (p.sensitivity.star != q.sensitivity.star ||
        p.sensitivity.edges.size() != q.sensitivity.edges.size() ||
        p.sensitivity.level_signals != q.sensitivity.level_signals)
      return false;
    for (size_t j = 0; j < p.sensitivity.edges.size(); ++j)
      if (p.sensitivity.edges[j].posedge != q.sensitivity.edges[j].posedge ||
          p.sensitivity.edges[j].signal != q.sensitivity.edges[j].signal)
        return false;
    if (!stmt_ptr_equal(p.body, q.body)) return false;
  }
  for (size_t i = 0; i < a.continuous_assigns.size(); ++i) {
    if (!expr_ptr_equal(a.continuous_assigns[i].lhs, b.continuous_assigns[i].lhs) ||
        !expr_ptr_equal(a.continuous_assigns[i].rhs, b.continuous_assigns[i].rhs))
      return false;
  }
  for (size_t i = 0; i < a.instances.size(); ++i) {
    const auto &p = a.instances[i], &q = b.instances[i];
    if (p.module_name != q.module_name || p.instance_name != q.instance_name ||
        p.connections.size() != q.connections.size())
      return false;
    for (size_t j = 0; j < p.connections.size(); ++j) {
      if (p.connections[j].port != q.connections[j].port ||
          !expr_ptr_equal(p.connections[j].expr, q.connections[j].expr))
        return false;
    }
  }
  return true;
}

}  // namespace rtlscan
