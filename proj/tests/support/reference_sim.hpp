#pragma once

// Reference interpreter used as the independent oracle for the bounded
// checker. Kept deliberately separate from rtlscan/sim.hpp: values live in a
// name-keyed map, combinational logic is evaluated to a fixpoint instead of
// being topologically sorted, and properties are evaluated definitionally
// over complete traces.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rtlscan/assertions.hpp"
#include "rtlscan/parser.hpp"

namespace refsim {

using rtlscan::DesignUnit;
using rtlscan::Expr;
using rtlscan::ExprPtr;
using rtlscan::Stmt;

using ValueMap = std::map<std::string, uint64_t>;

struct RefModel {
  const DesignUnit* unit = nullptr;
  std::map<std::string, int> widths;
  std::vector<std::string> state_names;   // assigned in clocked blocks
  std::vector<std::string> input_names;   // everything never assigned (no clk)
  std::string clock;

  static RefModel build(const DesignUnit& unit) {
    RefModel m;
    m.unit = &unit;
    for (const auto& s : unit.signals) m.widths[s.name] = s.width();
    std::map<std::string, bool> assigned;
    for (const auto& b : unit.always_blocks) {
      if (!b.sensitivity.edges.empty() && m.clock.empty())
        m.clock = b.sensitivity.edges[0].signal;
      mark_assigned(*b.body, assigned);
    }
    std::map<std::string, bool> comb_assigned;
    for (const auto& a : unit.continuous_assigns)
      if (a.lhs->kind == Expr::Kind::Identifier) comb_assigned[a.lhs->text] = true;
    for (const auto& b : unit.always_blocks)
      if (b.sensitivity.combinational()) mark_assigned(*b.body, comb_assigned);
    for (const auto& s : unit.signals) {
      bool seq = false;
      for (const auto& b : unit.always_blocks) {
        if (b.sensitivity.combinational()) continue;
        std::map<std::string, bool> block_assigned;
        mark_assigned(*b.body, block_assigned);
        if (block_assigned.count(s.name)) seq = true;
      }
      if (seq) {
        m.state_names.push_back(s.name);
      } else if (!comb_assigned.count(s.name) && s.name != m.clock) {
        m.input_names.push_back(s.name);
      }
    }
    return m;
  }

  static void mark_assigned(const Stmt& s, std::map<std::string, bool>& out) {
    if (s.lhs && (s.kind == Stmt::Kind::BlockingAssign ||
                  s.kind == Stmt::Kind::NonblockingAssign)) {
      const Expr* e = s.lhs.get();
      while (e->kind == Expr::Kind::Index || e->kind == Expr::Kind::PartSelect)
        e = e->operands[0].get();
      if (e->kind == Expr::Kind::Identifier) out[e->text] = true;
    }
    if (s.then_branch) mark_assigned(*s.then_branch, out);
    if (s.else_branch) mark_assigned(*s.else_branch, out);
    for (const auto& item : s.case_items) mark_assigned(*item.body, out);
    if (s.case_default) mark_assigned(*s.case_default, out);
    for (const auto& sub : s.stmts) mark_assigned(*sub, out);
    if (s.body) mark_assigned(*s.body, out);
  }

  uint64_t mask(const std::string& name) const {
    auto it = widths.find(name);
    int w = it == widths.end() ? 1 : it->second;
    return w >= 64 ? ~0ull : (1ull << w) - 1;
  }
  int width_of_name(const std::string& name) const {
    auto it = widths.find(name);
    return it == widths.end() ? 1 : it->second;
  }
};

inline int expr_width(const RefModel& m, const Expr& e) {
  using K = Expr::Kind;
  switch (e.kind) {
    case K::Identifier: return m.width_of_name(e.text);
    case K::Number: return e.number.sized ? e.number.width : 32;
    case K::Index: return 1;
    case K::PartSelect: {
      auto a = rtlscan::const_eval(*e.operands[1]);
      auto b = rtlscan::const_eval(*e.operands[2]);
      return a && b ? static_cast<int>(std::llabs(*a - *b)) + 1 : 1;
    }
    case K::Concat: {
      int w = 0;
      for (const auto& op : e.operands) w += expr_width(m, *op);
      return w;
    }
    case K::Replication: {
      auto c = rtlscan::const_eval(*e.operands[0]);
      return static_cast<int>(c.value_or(1)) * expr_width(m, *e.operands[1]);
    }
    case K::Unary:
      return (e.text == "~" || e.text == "-" || e.text == "+")
                 ? expr_width(m, *e.operands[0])
                 : 1;
    case K::Binary: {
      const auto& op = e.text;
      if (op == "==" || op == "!=" || op == "<" || op == "<=" || op == ">" ||
          op == ">=" || op == "&&" || op == "||")
        return 1;
      if (op == "<<" || op == ">>") return expr_width(m, *e.operands[0]);
      return std::max(expr_width(m, *e.operands[0]),
                      expr_width(m, *e.operands[1]));
    }
    case K::Ternary:
      return std::max(expr_width(m, *e.operands[1]),
                      expr_width(m, *e.operands[2]));
    case K::SysCall:
      return 1;
  }
  return 1;
}

inline uint64_t wmask(int w) { return w >= 64 ? ~0ull : (1ull << w) - 1; }

inline uint64_t eval(const RefModel& m, const Expr& e, const ValueMap& v) {
  using K = Expr::Kind;
  switch (e.kind) {
    case K::Identifier: {
      auto it = v.find(e.text);
      return it == v.end() ? 0 : it->second;
    }
    case K::Number: return e.number.value;
    case K::Index: {
      uint64_t base = eval(m, *e.operands[0], v);
      uint64_t idx = eval(m, *e.operands[1], v);
      return (base >> idx) & 1;
    }
    case K::PartSelect: {
      uint64_t base = eval(m, *e.operands[0], v);
      auto a = rtlscan::const_eval(*e.operands[1]);
      auto b = rtlscan::const_eval(*e.operands[2]);
      if (!a || !b) return 0;
      int lo = static_cast<int>(std::min(*a, *b));
      int w = static_cast<int>(std::llabs(*a - *b)) + 1;
      return (base >> lo) & wmask(w);
    }
    case K::Concat: {
      uint64_t out = 0;
      for (const auto& op : e.operands)
        out = (out << expr_width(m, *op)) | (eval(m, *op, v) & wmask(expr_width(m, *op)));
      return out;
    }
    case K::Replication: {
      auto c = rtlscan::const_eval(*e.operands[0]);
      if (!c) return 0;
      int w = expr_width(m, *e.operands[1]);
      uint64_t unit = eval(m, *e.operands[1], v) & wmask(w);
      uint64_t out = 0;
      for (int64_t i = 0; i < *c && i * w < 64; ++i) out = (out << w) | unit;
      return out;
    }
    case K::Unary: {
      int w = expr_width(m, *e.operands[0]);
      uint64_t a = eval(m, *e.operands[0], v) & wmask(w);
      if (e.text == "~") return ~a & wmask(w);
      if (e.text == "-") return (0 - a) & wmask(w);
      if (e.text == "+") return a;
      if (e.text == "!") return a == 0;
      if (e.text == "&") return a == wmask(w);
      if (e.text == "~&") return a != wmask(w);
      if (e.text == "|") return a != 0;
      if (e.text == "~|") return a == 0;
      int ones = __builtin_popcountll(a);
      if (e.text == "^") return ones & 1;
      return !(ones & 1);  // ~^ ^~
    }
    case K::Binary: {
      const auto& op = e.text;
      const Expr& le = *e.operands[0];
      const Expr& re = *e.operands[1];
      // '1/'0 equality takes the other operand's width
      auto unbased = [](const Expr& x) {
        return x.kind == K::Number && x.number.unbased;
      };
      if ((op == "==" || op == "!=") && (unbased(le) || unbased(re))) {
        const Expr& lit = unbased(le) ? le : re;
        const Expr& other = unbased(le) ? re : le;
        uint64_t fill = lit.number.value ? wmask(expr_width(m, other)) : 0;
        bool eq = eval(m, other, v) == fill;
        return (op == "==") == eq;
      }
      uint64_t a = eval(m, le, v);
      uint64_t b = eval(m, re, v);
      int w = expr_width(m, e);
      if (op == "+") return (a + b) & wmask(w);
      if (op == "-") return (a - b) & wmask(w);
      if (op == "*") return (a * b) & wmask(w);
      if (op == "&") return a & b;
      if (op == "|") return a | b;
      if (op == "^") return a ^ b;
      if (op == "==") return a == b;
      if (op == "!=") return a != b;
      if (op == "<") return a < b;
      if (op == "<=") return a <= b;
      if (op == ">") return a > b;
      if (op == ">=") return a >= b;
      if (op == "&&") return a != 0 && b != 0;
      if (op == "||") return a != 0 || b != 0;
      if (op == "<<") return b >= 64 ? 0 : (a << b) & wmask(w);
      if (op == ">>") return b >= 64 ? 0 : a >> b;
      return 0;
    }
    case K::Ternary:
      return eval(m, *e.operands[0], v) ? eval(m, *e.operands[1], v)
                                        : eval(m, *e.operands[2], v);
    case K::SysCall:
      return 0;
  }
  return 0;
}

inline void write_lvalue(const RefModel& m, const Expr& lhs, uint64_t value,
                         ValueMap& v) {
  if (lhs.kind == Expr::Kind::Identifier) {
    v[lhs.text] = value & m.mask(lhs.text);
    return;
  }
  if (lhs.kind == Expr::Kind::Index &&
      lhs.operands[0]->kind == Expr::Kind::Identifier) {
    const std::string& name = lhs.operands[0]->text;
    uint64_t idx = eval(m, *lhs.operands[1], v);
    uint64_t cur = v.count(name) ? v[name] : 0;
    v[name] = ((cur & ~(1ull << idx)) | ((value & 1) << idx)) & m.mask(name);
    return;
  }
  if (lhs.kind == Expr::Kind::PartSelect &&
      lhs.operands[0]->kind == Expr::Kind::Identifier) {
    const std::string& name = lhs.operands[0]->text;
    auto a = rtlscan::const_eval(*lhs.operands[1]);
    auto b = rtlscan::const_eval(*lhs.operands[2]);
    if (!a || !b) return;
    int lo = static_cast<int>(std::min(*a, *b));
    int w = static_cast<int>(std::llabs(*a - *b)) + 1;
    uint64_t cur = v.count(name) ? v[name] : 0;
    uint64_t field = wmask(w) << lo;
    v[name] = ((cur & ~field) | ((value & wmask(w)) << lo)) & m.mask(name);
    return;
  }
}

inline void exec(const RefModel& m, const Stmt& s, ValueMap& v,
                 std::vector<std::pair<const Expr*, uint64_t>>* nb) {
  switch (s.kind) {
    case Stmt::Kind::BlockingAssign:
      write_lvalue(m, *s.lhs, eval(m, *s.rhs, v), v);
      return;
    case Stmt::Kind::NonblockingAssign: {
      uint64_t value = eval(m, *s.rhs, v);
      if (nb)
        nb->push_back({s.lhs.get(), value});
      else
        write_lvalue(m, *s.lhs, value, v);
      return;
    }
    case Stmt::Kind::If:
      if (eval(m, *s.cond, v))
        exec(m, *s.then_branch, v, nb);
      else if (s.else_branch)
        exec(m, *s.else_branch, v, nb);
      return;
    case Stmt::Kind::Case: {
      uint64_t sel = eval(m, *s.cond, v);
      for (const auto& item : s.case_items)
        for (const auto& label : item.labels)
          if (eval(m, *label, v) == sel) {
            exec(m, *item.body, v, nb);
            return;
          }
      if (s.case_default) exec(m, *s.case_default, v, nb);
      return;
    }
    case Stmt::Kind::Block:
      for (const auto& sub : s.stmts) exec(m, *sub, v, nb);
      return;
    case Stmt::Kind::For: {
      exec(m, *s.for_init, v, nb);
      int guard = 0;
      while (eval(m, *s.cond, v) && guard++ < 10000) {
        exec(m, *s.body, v, nb);
        exec(m, *s.for_step, v, nb);
      }
      return;
    }
  }
}

// Evaluate combinational logic by iterating to a fixpoint.
inline void settle_comb(const RefModel& m, ValueMap& v) {
  for (int iter = 0; iter < 16; ++iter) {
    ValueMap before = v;
    for (const auto& a : m.unit->continuous_assigns)
      write_lvalue(m, *a.lhs, eval(m, *a.rhs, v), v);
    for (const auto& b : m.unit->always_blocks)
      if (b.sensitivity.combinational()) exec(m, *b.body, v, nullptr);
    if (v == before) return;
  }
}

// Values visible during one cycle given sampled state and applied inputs.
inline ValueMap cycle_values(const RefModel& m, const ValueMap& state,
                             const ValueMap& inputs) {
  ValueMap v = state;
  for (const auto& [k, x] : inputs) v[k] = x & m.mask(k);
  settle_comb(m, v);
  return v;
}

// One clock edge from the cycle's settled values.
inline ValueMap next_state(const RefModel& m, const ValueMap& cycle_vals) {
  ValueMap v = cycle_vals;
  std::vector<std::pair<const Expr*, uint64_t>> nb;
  for (const auto& b : m.unit->always_blocks)
    if (!b.sensitivity.combinational()) exec(m, *b.body, v, &nb);
  for (const auto& [lhs, value] : nb) write_lvalue(m, *lhs, value, v);
  ValueMap state;
  for (const auto& name : m.state_names)
    state[name] = v.count(name) ? v[name] : 0;
  return state;
}

// ---------------------------------------------------------------------------
// Definitional property evaluation over a complete trace

struct RefProperty {
  ExprPtr disable;  // may be null
  ExprPtr antecedent;
  ExprPtr consequent_plain;        // non-$stable consequent, or null
  std::vector<ExprPtr> stable_of;  // $stable args when consequent uses them
  bool consequent_is_conjunction_with_stable = false;

  // Build from a populated assertion's bound fields, straight from the
  // template definitions.
  static RefProperty from_assertion(const rtlscan::PopulatedAssertion& a) {
    RefProperty p;
    rtlscan::Diagnostics scratch;
    auto parse = [&](const std::string& t) {
      return rtlscan::parse_expression_text(t, scratch);
    };
    const auto& f = a.fields;
    if (a.cwe == 1231) {
      p.antecedent = parse(f.at("CONDITIONS_FOR_STABLE_LOCK"));
      p.stable_of.push_back(parse(f.at("LOCK_SIGNAL")));
    } else if (a.cwe == 1233) {
      p.disable = parse(f.at("RESET_CONDITIONS"));
      p.antecedent = parse(f.at("LOCK_SIGNAL") + " == '1");
      p.stable_of.push_back(parse(f.at("SECURITY_SENSITIVE_REGISTER")));
    } else {
      p.disable = parse(f.at("RESET_CONDITIONS"));
      p.antecedent = parse("~" + f.at("CONDITIONS_FOR_PRIVILEGE_ESCALATION"));
      p.consequent_plain = parse(f.at("PRIVILEGE_SIGNAL") + " != " +
                                 f.at("HIGH_PRIVILEGE") + " || " +
                                 f.at("PRIVILEGE_SIGNAL") + " == " +
                                 f.at("PREVIOUS_PRIVILEGE"));
    }
    return p;
  }
};

inline bool property_violated_at(const RefModel& m, const RefProperty& p,
                                 const ValueMap& vals_t, const ValueMap& vals_t1) {
  if (p.disable && (eval(m, *p.disable, vals_t) || eval(m, *p.disable, vals_t1)))
    return false;
  if (!eval(m, *p.antecedent, vals_t)) return false;
  for (const auto& arg : p.stable_of)
    if (eval(m, *arg, vals_t) != eval(m, *arg, vals_t1)) return true;
  if (p.consequent_plain) return !eval(m, *p.consequent_plain, vals_t1);
  return false;
}

// Whether an explicit input sequence violates the property, evaluated
// definitionally cycle by cycle.
inline bool sequence_violates(const RefModel& m, const RefProperty& p,
                              const ValueMap& initial_state,
                              const std::vector<ValueMap>& input_seq) {
  std::vector<ValueMap> per_cycle;
  ValueMap state = initial_state;
  for (const auto& inputs : input_seq) {
    ValueMap vals = cycle_values(m, state, inputs);
    per_cycle.push_back(vals);
    state = next_state(m, vals);
  }
  for (size_t t = 0; t + 1 < per_cycle.size(); ++t)
    if (property_violated_at(m, p, per_cycle[t], per_cycle[t + 1])) return true;
  return false;
}

// Exhaustive enumeration of every input sequence up to the given depth.
// Exponential by construction; callers keep input bit counts tiny.
inline bool brute_force_falsify(const RefModel& m, const RefProperty& p,
                                const ValueMap& initial_state, int depth) {
  std::vector<int> widths;
  int total_bits = 0;
  for (const auto& name : m.input_names) {
    widths.push_back(m.width_of_name(name));
    total_bits += widths.back();
  }
  uint64_t seq_space_bits = static_cast<uint64_t>(total_bits) *
                            static_cast<uint64_t>(depth);
  if (seq_space_bits > 26)
    throw std::runtime_error("brute force space too large for the oracle");
  uint64_t count = 1ull << seq_space_bits;
  for (uint64_t packed = 0; packed < count; ++packed) {
    std::vector<ValueMap> seq;
    uint64_t cursor = packed;
    for (int t = 0; t < depth; ++t) {
      ValueMap inputs;
      for (size_t i = 0; i < m.input_names.size(); ++i) {
        inputs[m.input_names[i]] = cursor & wmask(widths[i]);
        cursor >>= widths[i];
      }
      seq.push_back(std::move(inputs));
    }
    if (sequence_violates(m, p, initial_state, seq)) return true;
  }
  return false;
}

}  // namespace refsim
