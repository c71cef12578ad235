#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "rtlscan/lint.hpp"

namespace rtlscan {

// Runtime value of one signal. Unpacked arrays hold one word per element;
// everything else lives in the scalar word, masked to the declared width.
struct SimValue {
  uint64_t scalar = 0;
  std::vector<uint64_t> elems;

  friend bool operator==(const SimValue& a, const SimValue& b) {
    return a.scalar == b.scalar && a.elems == b.elems;
  }
};

enum class SignalRole { Input, State, Comb };

struct SimSignal {
  std::string name;
  SignalRole role = SignalRole::Input;
  int width = 1;
  int msb = 0, lsb = 0;
  int array_size = 0;  // 0 = scalar
  int array_lo = 0;    // lowest declared element index
  std::optional<uint64_t> reset_value;
};

// Cycle-accurate model of one design unit: state registers updated by the
// clocked blocks, combinational logic evaluated in topological order, and
// everything undriven treated as an input.
struct SimModel {
  std::string module;
  std::string clock;  // excluded from the enumerated inputs

  std::vector<SimSignal> signals;
  std::map<std::string, int> index;

  std::vector<int> state_ids;
  std::vector<int> input_ids;

  struct CombNode {
    // Either one continuous assign or one combinational always body.
    ExprPtr assign_lhs, assign_rhs;
    StmtPtr block;
  };
  std::vector<CombNode> comb;       // topologically ordered
  std::vector<StmtPtr> seq_blocks;  // clocked bodies, declaration order

  int total_footprint_bits = 0;  // state + input bits, for mode selection

  const SimSignal* find(const std::string& name) const {
    auto it = index.find(name);
    return it == index.end() ? nullptr : &signals[it->second];
  }
  int id_of(const std::string& name) const {
    auto it = index.find(name);
    return it == index.end() ? -1 : it->second;
  }
};

struct ElaborationError {
  std::string reason;
};

using ElaborateResult = std::variant<SimModel, ElaborationError>;

namespace sim_detail {

inline uint64_t mask_of(int width) {
  return width >= 64 ? ~0ull : ((1ull << width) - 1);
}

// ---------------------------------------------------------------------------
// Expression evaluation over an environment

struct Env {
  const SimModel* model = nullptr;
  std::vector<SimValue> values;

  SimValue& at(int id) { return values[static_cast<size_t>(id)]; }
  const SimValue& at(int id) const { return values[static_cast<size_t>(id)]; }
};

inline int expr_sim_width(const Expr& e, const SimModel& m);

inline uint64_t eval_expr(const Expr& e, const Env& env);

// Bit position of declared index i for a [msb:lsb] signal: the right bound
// is bit zero.
inline int bit_pos(const SimSignal& sig, int64_t i) {
  return static_cast<int>(std::llabs(i - sig.lsb));
}

inline int expr_sim_width(const Expr& e, const SimModel& m) {
  using K = Expr::Kind;
  switch (e.kind) {
    case K::Identifier: {
      const SimSignal* s = m.find(e.text);
      return s ? s->width : 1;
    }
    case K::Number:
      if (e.number.sized) return e.number.width;
      return 32;  // unsized literals act as 32-bit in simulation
    case K::Index: {
      const Expr& base = *e.operands[0];
      if (base.kind == K::Identifier) {
        const SimSignal* s = m.find(base.text);
        if (s && s->array_size > 0) return s->width;
      }
      return 1;
    }
    case K::PartSelect: {
      auto a = const_eval(*e.operands[1]);
      auto b = const_eval(*e.operands[2]);
      if (!a || !b) return 1;
      return static_cast<int>(std::llabs(*a - *b)) + 1;
    }
    case K::Concat: {
      int total = 0;
      for (const auto& op : e.operands) total += expr_sim_width(*op, m);
      return std::min(total, 64);
    }
    case K::Replication: {
      auto count = const_eval(*e.operands[0]);
      int w = expr_sim_width(*e.operands[1], m);
      return std::min<int>(static_cast<int>(count.value_or(1)) * w, 64);
    }
    case K::Unary:
      if (e.text == "~" || e.text == "-" || e.text == "+")
        return expr_sim_width(*e.operands[0], m);
      return 1;
    case K::Binary: {
      const auto& op = e.text;
      if (op == "==" || op == "!=" || op == "===" || op == "!==" || op == "<" ||
          op == "<=" || op == ">" || op == ">=" || op == "&&" || op == "||")
        return 1;
      if (op == "<<" || op == ">>" || op == "<<<" || op == ">>>")
        return expr_sim_width(*e.operands[0], m);
      return std::max(expr_sim_width(*e.operands[0], m),
                      expr_sim_width(*e.operands[1], m));
    }
    case K::Ternary:
      return std::max(expr_sim_width(*e.operands[1], m),
                      expr_sim_width(*e.operands[2], m));
    case K::SysCall:
      return 1;
  }
  return 1;
}

// '1 and '0 take the width of the other equality operand.
inline bool is_unbased(const Expr& e) {
  return e.kind == Expr::Kind::Number && e.number.unbased;
}

inline uint64_t eval_binary(const Expr& e, const Env& env) {
  const SimModel& m = *env.model;
  const Expr& le = *e.operands[0];
  const Expr& re = *e.operands[1];
  const std::string& op = e.text;

  if ((op == "==" || op == "!=") && (is_unbased(le) || is_unbased(re))) {
    const Expr& lit = is_unbased(le) ? le : re;
    const Expr& other = is_unbased(le) ? re : le;
    int w = expr_sim_width(other, m);
    uint64_t fill = lit.number.value ? mask_of(w) : 0;
    uint64_t v = eval_expr(other, env);
    bool eq = v == fill;
    return (op == "==") == eq ? 1 : 0;
  }

  uint64_t a = eval_expr(le, env);
  uint64_t b = eval_expr(re, env);
  int w = expr_sim_width(e, m);
  uint64_t mask = mask_of(w);
  if (op == "+") return (a + b) & mask;
  if (op == "-") return (a - b) & mask;
  if (op == "*") return (a * b) & mask;
  if (op == "/") return b == 0 ? mask : (a / b) & mask;
  if (op == "%") return b == 0 ? a & mask : (a % b) & mask;
  if (op == "&") return (a & b) & mask;
  if (op == "|") return (a | b) & mask;
  if (op == "^") return (a ^ b) & mask;
  if (op == "==" || op == "===") return a == b ? 1 : 0;
  if (op == "!=" || op == "!==") return a != b ? 1 : 0;
  if (op == "<") return a < b ? 1 : 0;
  if (op == "<=") return a <= b ? 1 : 0;
  if (op == ">") return a > b ? 1 : 0;
  if (op == ">=") return a >= b ? 1 : 0;
  if (op == "&&") return (a != 0 && b != 0) ? 1 : 0;
  if (op == "||") return (a != 0 || b != 0) ? 1 : 0;
  if (op == "<<" || op == "<<<") return b >= 64 ? 0 : (a << b) & mask;
  if (op == ">>" || op == ">>>") return b >= 64 ? 0 : (a >> b) & mask;
  return 0;
}

inline uint64_t eval_expr(const Expr& e, const Env& env) {
  const SimModel& m = *env.model;
  using K = Expr::Kind;
  switch (e.kind) {
    case K::Identifier: {
      int id = m.id_of(e.text);
      return id < 0 ? 0 : env.at(id).scalar;
    }
    case K::Number:
      return e.number.value;
    case K::Index: {
      const Expr& base = *e.operands[0];
      int64_t idx = static_cast<int64_t>(eval_expr(*e.operands[1], env));
      if (base.kind == K::Identifier) {
        const SimSignal* sig = m.find(base.text);
        if (sig && sig->array_size > 0) {
          const SimValue& v = env.at(m.id_of(base.text));
          int64_t pos = idx - sig->array_lo;
          return pos >= 0 && static_cast<size_t>(pos) < v.elems.size()
                     ? v.elems[static_cast<size_t>(pos)] & mask_of(sig->width)
                     : 0;
        }
        if (sig) {
          uint64_t v = env.at(m.id_of(base.text)).scalar;
          return (v >> bit_pos(*sig, idx)) & 1;
        }
      }
      uint64_t v = eval_expr(base, env);
      return (v >> idx) & 1;
    }
    case K::PartSelect: {
      const Expr& base = *e.operands[0];
      auto a = const_eval(*e.operands[1]);
      auto b = const_eval(*e.operands[2]);
      if (!a || !b) return 0;
      uint64_t v = eval_expr(base, env);
      int lo, w = static_cast<int>(std::llabs(*a - *b)) + 1;
      if (base.kind == K::Identifier) {
        const SimSignal* sig = m.find(base.text);
        lo = sig ? std::min(bit_pos(*sig, *a), bit_pos(*sig, *b)) : 0;
      } else {
        lo = static_cast<int>(std::min(*a, *b));
      }
      return (v >> lo) & mask_of(w);
    }
    case K::Concat: {
      uint64_t v = 0;
      for (const auto& op : e.operands) {
        int w = expr_sim_width(*op, m);
        v = (v << w) | (eval_expr(*op, env) & mask_of(w));
      }
      return v;
    }
    case K::Replication: {
      auto count = const_eval(*e.operands[0]);
      if (!count) return 0;
      int w = expr_sim_width(*e.operands[1], m);
      uint64_t unit = eval_expr(*e.operands[1], env) & mask_of(w);
      uint64_t v = 0;
      for (int64_t i = 0; i < *count && i * w < 64; ++i)
        v = (v << w) | unit;
      return v;
    }
    case K::Unary: {
      const std::string& op = e.text;
      int w = expr_sim_width(*e.operands[0], m);
      uint64_t a = eval_expr(*e.operands[0], env) & mask_of(w);
      if (op == "~") return (~a) & mask_of(w);
      if (op == "-") return (0 - a) & mask_of(w);
      if (op == "+") return a;
      if (op == "!") return a == 0 ? 1 : 0;
      if (op == "&") return a == mask_of(w) ? 1 : 0;
      if (op == "~&") return a == mask_of(w) ? 0 : 1;
      if (op == "|") return a != 0 ? 1 : 0;
      if (op == "~|") return a != 0 ? 0 : 1;
      if (op == "^" || op == "~^" || op == "^~") {
        int parity = __builtin_popcountll(a) & 1;
        bool x = op == "^" ? parity : !parity;
        return x ? 1 : 0;
      }
      return 0;
    }
    case K::Binary:
      return eval_binary(e, env);
    case K::Ternary:
      return eval_expr(*e.operands[0], env) != 0 ? eval_expr(*e.operands[1], env)
                                                 : eval_expr(*e.operands[2], env);
    case K::SysCall:
      return 0;  // $stable is handled by the property evaluator
  }
  return 0;
}

// Write through an lvalue (identifier, bit/part select, array element,
// concat of lvalues).
inline void assign_lvalue(const Expr& lhs, uint64_t value, Env& env) {
  const SimModel& m = *env.model;
  switch (lhs.kind) {
    case Expr::Kind::Identifier: {
      int id = m.id_of(lhs.text);
      if (id < 0) return;
      env.at(id).scalar = value & mask_of(m.signals[id].width);
      return;
    }
    case Expr::Kind::Index: {
      const Expr& base = *lhs.operands[0];
      if (base.kind != Expr::Kind::Identifier) return;
      const SimSignal* sig = m.find(base.text);
      if (!sig) return;
      int id = m.id_of(base.text);
      int64_t idx = static_cast<int64_t>(eval_expr(*lhs.operands[1], env));
      if (sig->array_size > 0) {
        int64_t pos = idx - sig->array_lo;
        if (pos >= 0 && static_cast<size_t>(pos) < env.at(id).elems.size())
          env.at(id).elems[static_cast<size_t>(pos)] = value & mask_of(sig->width);
        return;
      }
      int pos = bit_pos(*sig, idx);
      if (pos >= sig->width) return;
      uint64_t& v = env.at(id).scalar;
      v = (v & ~(1ull << pos)) | ((value & 1) << pos);
      return;
    }
    case Expr::Kind::PartSelect: {
      const Expr& base = *lhs.operands[0];
      if (base.kind != Expr::Kind::Identifier) return;
      const SimSignal* sig = m.find(base.text);
      if (!sig) return;
      auto a = const_eval(*lhs.operands[1]);
      auto b = const_eval(*lhs.operands[2]);
      if (!a || !b) return;
      int lo = std::min(bit_pos(*sig, *a), bit_pos(*sig, *b));
      int w = static_cast<int>(std::llabs(*a - *b)) + 1;
      int id = m.id_of(base.text);
      uint64_t& v = env.at(id).scalar;
      uint64_t field = mask_of(w) << lo;
      v = (v & ~field) | ((value & mask_of(w)) << lo);
      v &= mask_of(sig->width);
      return;
    }
    case Expr::Kind::Concat: {
      // {a, b} = v assigns the high bits to a, low bits to b
      int total = 0;
      for (const auto& op : lhs.operands) total += expr_sim_width(*op, m);
      int shift = total;
      for (const auto& op : lhs.operands) {
        int w = expr_sim_width(*op, m);
        shift -= w;
        assign_lvalue(*op, (value >> shift) & mask_of(w), env);
      }
      return;
    }
    default:
      return;
  }
}

struct PendingWrites {
  std::vector<std::pair<const Expr*, uint64_t>> writes;
};

// Blocking assigns update env immediately; nonblocking ones evaluate now and
// commit after every clocked block has run.
inline void exec_stmt(const Stmt& s, Env& env, PendingWrites* pending) {
  switch (s.kind) {
    case Stmt::Kind::BlockingAssign: {
      uint64_t v = eval_expr(*s.rhs, env);
      assign_lvalue(*s.lhs, v, env);
      return;
    }
    case Stmt::Kind::NonblockingAssign: {
      uint64_t v = eval_expr(*s.rhs, env);
      if (pending)
        pending->writes.push_back({s.lhs.get(), v});
      else
        assign_lvalue(*s.lhs, v, env);
      return;
    }
    case Stmt::Kind::If:
      if (eval_expr(*s.cond, env) != 0)
        exec_stmt(*s.then_branch, env, pending);
      else if (s.else_branch)
        exec_stmt(*s.else_branch, env, pending);
      return;
    case Stmt::Kind::Case: {
      uint64_t sel = eval_expr(*s.cond, env);
      for (const auto& item : s.case_items) {
        for (const auto& label : item.labels) {
          if (eval_expr(*label, env) == sel) {
            exec_stmt(*item.body, env, pending);
            return;
          }
        }
      }
      if (s.case_default) exec_stmt(*s.case_default, env, pending);
      return;
    }
    case Stmt::Kind::Block:
      for (const auto& sub : s.stmts) exec_stmt(*sub, env, pending);
      return;
    case Stmt::Kind::For: {
      exec_stmt(*s.for_init, env, pending);
      int guard = 0;
      while (eval_expr(*s.cond, env) != 0 && guard++ < 100000) {
        exec_stmt(*s.body, env, pending);
        exec_stmt(*s.for_step, env, pending);
      }
      return;
    }
  }
}

}  // namespace sim_detail

// ---------------------------------------------------------------------------
// Elaboration

inline ElaborateResult elaborate(const DesignUnit& unit) {
  using sim_detail::Env;
  SimModel m;
  m.module = unit.name;

  auto unsupported = [](std::string reason) {
    return ElaborateResult{ElaborationError{std::move(reason)}};
  };

  // Partition always blocks and find the single clock.
  std::vector<const AlwaysBlock*> comb_blocks;
  std::vector<const AlwaysBlock*> seq_blocks;
  for (const auto& b : unit.always_blocks) {
    if (b.sensitivity.combinational()) {
      comb_blocks.push_back(&b);
    } else if (!b.sensitivity.edges.empty()) {
      seq_blocks.push_back(&b);
      const std::string& clk = b.sensitivity.edges[0].signal;
      if (m.clock.empty())
        m.clock = clk;
      else if (m.clock != clk)
        return unsupported("multiple clock domains ('" + m.clock + "' and '" +
                           clk + "')");
    }
  }

  // Classify assignment targets.
  std::set<std::string> seq_assigned, comb_assigned;
  auto add_bases = [](const Expr& lhs, std::set<std::string>& out) {
    std::vector<std::string> bases;
    detail::lvalue_bases(lhs, bases);
    out.insert(bases.begin(), bases.end());
  };
  for (const auto* b : seq_blocks) {
    std::vector<detail::AssignSite> sites;
    detail::gather_assigns(*b->body, sites);
    for (const auto& site : sites) add_bases(*site.lhs, seq_assigned);
  }
  struct CombSource {
    const AlwaysBlock* block = nullptr;
    const Assign* assign = nullptr;
    std::set<std::string> outputs;
    std::set<std::string> reads;
  };
  std::vector<CombSource> comb_sources;
  for (const auto& a : unit.continuous_assigns) {
    CombSource src;
    src.assign = &a;
    add_bases(*a.lhs, src.outputs);
    for (const auto& n : collect_signal_refs_ordered(*a.rhs)) src.reads.insert(n);
    // index expressions on the LHS are reads too
    if (a.lhs->kind == Expr::Kind::Index)
      for (const auto& n : collect_signal_refs_ordered(*a.lhs->operands[1]))
        src.reads.insert(n);
    comb_sources.push_back(std::move(src));
  }
  for (const auto* b : comb_blocks) {
    CombSource src;
    src.block = b;
    std::vector<detail::AssignSite> sites;
    detail::gather_assigns(*b->body, sites);
    for (const auto& site : sites) add_bases(*site.lhs, src.outputs);
    for (const auto& n : collect_signal_refs_ordered(*b->body)) src.reads.insert(n);
    // Every output must be covered on all paths or the block stores state.
    std::set<std::string> covered;
    detail::must_assigned(*b->body, covered);
    for (const auto& out : src.outputs)
      if (!covered.count(out))
        return unsupported("combinational signal '" + out +
                           "' is not assigned on all paths (latch)");
    comb_sources.push_back(std::move(src));
  }
  for (const auto& src : comb_sources)
    for (const auto& out : src.outputs) {
      if (seq_assigned.count(out))
        return unsupported("signal '" + out +
                           "' driven by both clocked and combinational logic");
      if (!comb_assigned.insert(out).second)
        return unsupported("signal '" + out + "' has multiple drivers");
    }

  // Build the signal table.
  for (const auto& decl : unit.signals) {
    SimSignal sig;
    sig.name = decl.name;
    sig.width = decl.width();
    sig.msb = decl.msb;
    sig.lsb = decl.lsb;
    sig.array_size = decl.is_array ? decl.array_size() : 0;
    sig.array_lo = decl.is_array ? std::min(decl.array_left, decl.array_right) : 0;
    sig.reset_value = decl.init_value;
    if (sig.width > 64)
      return unsupported("signal '" + decl.name + "' is wider than 64 bits");
    if (seq_assigned.count(decl.name))
      sig.role = SignalRole::State;
    else if (comb_assigned.count(decl.name))
      sig.role = SignalRole::Comb;
    else
      sig.role = SignalRole::Input;
    if (sig.role == SignalRole::Input && sig.array_size > 0)
      return unsupported("array input '" + decl.name + "' is not supported");
    m.index[sig.name] = static_cast<int>(m.signals.size());
    m.signals.push_back(sig);
  }
  for (const auto& sig : m.signals) {
    int id = m.index.at(sig.name);
    if (sig.role == SignalRole::State) m.state_ids.push_back(id);
    if (sig.role == SignalRole::Input && sig.name != m.clock)
      m.input_ids.push_back(id);
  }

  // Topologically order the comb sources (Kahn), reads excluding own outputs.
  size_t n = comb_sources.size();
  std::vector<std::set<size_t>> consumers(n);
  std::vector<int> indegree(n, 0);
  std::map<std::string, size_t> producer;
  for (size_t i = 0; i < n; ++i)
    for (const auto& out : comb_sources[i].outputs) producer[out] = i;
  for (size_t i = 0; i < n; ++i) {
    for (const auto& read : comb_sources[i].reads) {
      auto it = producer.find(read);
      if (it == producer.end() || it->second == i) continue;
      if (consumers[it->second].insert(i).second) ++indegree[i];
    }
  }
  std::vector<size_t> order;
  std::vector<size_t> ready;
  for (size_t i = 0; i < n; ++i)
    if (indegree[i] == 0) ready.push_back(i);
  while (!ready.empty()) {
    size_t i = ready.front();
    ready.erase(ready.begin());
    order.push_back(i);
    for (size_t c : consumers[i])
      if (--indegree[c] == 0) ready.push_back(c);
  }
  if (order.size() != n) return unsupported("combinational loop");
  for (size_t i : order) {
    SimModel::CombNode node;
    if (comb_sources[i].assign) {
      node.assign_lhs = comb_sources[i].assign->lhs;
      node.assign_rhs = comb_sources[i].assign->rhs;
    } else {
      node.block = comb_sources[i].block->body;
    }
    m.comb.push_back(std::move(node));
  }

  for (const auto* b : seq_blocks) m.seq_blocks.push_back(b->body);

  for (int id : m.state_ids) {
    const auto& sig = m.signals[static_cast<size_t>(id)];
    m.total_footprint_bits += sig.width * std::max(sig.array_size, 1);
  }
  for (int id : m.input_ids) {
    const auto& sig = m.signals[static_cast<size_t>(id)];
    m.total_footprint_bits += sig.width;
  }
  return m;
}

// ---------------------------------------------------------------------------
// Simulation

// Values for one cycle keyed by model signal id.
using SimEnv = sim_detail::Env;

inline SimValue zero_value(const SimSignal& sig) {
  SimValue v;
  if (sig.array_size > 0) v.elems.assign(static_cast<size_t>(sig.array_size), 0);
  return v;
}

inline std::vector<SimValue> reset_state(const SimModel& m) {
  std::vector<SimValue> state;
  state.reserve(m.state_ids.size());
  for (int id : m.state_ids) {
    const auto& sig = m.signals[static_cast<size_t>(id)];
    SimValue v = zero_value(sig);
    if (sig.reset_value && sig.array_size == 0)
      v.scalar = *sig.reset_value & sim_detail::mask_of(sig.width);
    state.push_back(std::move(v));
  }
  return state;
}

/// Build the full per-cycle environment: state and input values installed,
/// then combinational logic evaluated in topological order.
inline SimEnv evaluate_cycle(const SimModel& m,
                             const std::vector<SimValue>& state,
                             const std::vector<SimValue>& inputs) {
  SimEnv env;
  env.model = &m;
  env.values.resize(m.signals.size());
  for (size_t i = 0; i < m.signals.size(); ++i)
    env.values[i] = zero_value(m.signals[i]);
  for (size_t i = 0; i < m.state_ids.size(); ++i)
    env.values[static_cast<size_t>(m.state_ids[i])] = state[i];
  for (size_t i = 0; i < m.input_ids.size(); ++i)
    env.values[static_cast<size_t>(m.input_ids[i])] = inputs[i];
  for (const auto& node : m.comb) {
    if (node.block) {
      sim_detail::exec_stmt(*node.block, env, nullptr);
    } else {
      uint64_t v = sim_detail::eval_expr(*node.assign_rhs, env);
      sim_detail::assign_lvalue(*node.assign_lhs, v, env);
    }
  }
  return env;
}

/// One clock edge: evaluates every clocked block against the cycle
/// environment and commits nonblocking writes simultaneously.
inline std::vector<SimValue> step_env(const SimModel& m, const SimEnv& env) {
  SimEnv work = env;
  sim_detail::PendingWrites pending;
  for (const auto& body : m.seq_blocks)
    sim_detail::exec_stmt(*body, work, &pending);
  for (const auto& [lhs, value] : pending.writes)
    sim_detail::assign_lvalue(*lhs, value, work);
  std::vector<SimValue> next;
  next.reserve(m.state_ids.size());
  for (int id : m.state_ids) next.push_back(work.at(id));
  return next;
}

/// step: next_state = F(state, inputs) under nonblocking semantics.
inline std::vector<SimValue> step(const SimModel& m,
                                  const std::vector<SimValue>& state,
                                  const std::vector<SimValue>& inputs) {
  return step_env(m, evaluate_cycle(m, state, inputs));
}

}  // namespace rtlscan
