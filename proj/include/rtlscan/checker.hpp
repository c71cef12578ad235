#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "rtlscan/assertions.hpp"
#include "rtlscan/sim.hpp"

namespace rtlscan {

struct CheckerConfig {
  int max_depth = 8;               // trace length in cycles
  int exhaustive_bit_budget = 20;  // state+input bits admitting exhaustive mode
  int random_trials = 10000;
  uint64_t seed = 0;
};

// Per-cycle assignments; cycle 0 is the reset state.
struct TraceCycle {
  std::map<std::string, uint64_t> inputs;
  std::map<std::string, uint64_t> state;
};

struct Trace {
  std::vector<TraceCycle> cycles;
  int violation_cycle = 0;  // cycle whose consequent failed
};

enum class PropertyStatus { Falsified, NotFalsified, Unsupported };

struct PropertyResult {
  std::string assertion_id;
  PropertyStatus status = PropertyStatus::Unsupported;
  Trace trace;              // Falsified only
  int depth = 0;            // cycles explored
  std::string mode;         // "exhaustive" | "random"
  bool vacuous = false;     // antecedent never fired in any explored trace
  std::string reason;       // Unsupported only
};

namespace checker_detail {

using sim_detail::eval_expr;
using sim_detail::mask_of;

struct PropertySpec {
  ExprPtr disable;     // null when the template has no disable iff
  ExprPtr antecedent;
  ExprPtr consequent;  // may contain $stable calls
  std::vector<ExprPtr> stable_args;
};

inline void collect_stable_args(const ExprPtr& e, std::vector<ExprPtr>& out) {
  if (!e) return;
  if (e->kind == Expr::Kind::SysCall && e->text == "$stable" &&
      e->operands.size() == 1)
    out.push_back(e->operands[0]);
  for (const auto& op : e->operands) collect_stable_args(op, out);
}

inline std::optional<PropertySpec> build_property_spec(
    const PopulatedAssertion& a, std::string* error) {
  auto parse = [&](const std::string& text) -> ExprPtr {
    Diagnostics scratch;
    ExprPtr e = parse_expression_text(text, scratch);
    if (!e && error) *error = "unparseable expression '" + text + "'";
    return e;
  };
  PropertySpec spec;
  const auto& f = a.fields;
  switch (a.cwe) {
    case 1231:
      spec.antecedent = parse(f.at("CONDITIONS_FOR_STABLE_LOCK"));
      spec.consequent = parse("$stable(" + f.at("LOCK_SIGNAL") + ")");
      break;
    case 1233:
      spec.disable = parse(f.at("RESET_CONDITIONS"));
      spec.antecedent = parse(f.at("LOCK_SIGNAL") + " == '1");
      spec.consequent =
          parse("$stable(" + f.at("SECURITY_SENSITIVE_REGISTER") + ")");
      break;
    case 1244:
      spec.disable = parse(f.at("RESET_CONDITIONS"));
      spec.antecedent = parse("~" + f.at("CONDITIONS_FOR_PRIVILEGE_ESCALATION"));
      spec.consequent = parse(f.at("PRIVILEGE_SIGNAL") + " != " +
                              f.at("HIGH_PRIVILEGE") + " || " +
                              f.at("PRIVILEGE_SIGNAL") + " == " +
                              f.at("PREVIOUS_PRIVILEGE"));
      break;
    default:
      if (error) *error = "not an assertion-strategy CWE";
      return std::nullopt;
  }
  if (!spec.antecedent || !spec.consequent) return std::nullopt;
  collect_stable_args(spec.consequent, spec.stable_args);
  return spec;
}

// Value of a $stable argument; whole-array arguments compare element-wise.
inline SimValue stable_value(const Expr& arg, const SimEnv& env) {
  if (arg.kind == Expr::Kind::Identifier) {
    int id = env.model->id_of(arg.text);
    if (id >= 0) return env.at(id);
  }
  SimValue v;
  v.scalar = eval_expr(arg, env);
  return v;
}

// Consequent at cycle t+1; $stable(x) compares the sampled values at t and
// t+1, everything else evaluates in the t+1 environment.
inline uint64_t eval_consequent(const Expr& e, const SimEnv& env_t,
                                const SimEnv& env_t1) {
  if (e.kind == Expr::Kind::SysCall && e.text == "$stable" &&
      e.operands.size() == 1) {
    return stable_value(*e.operands[0], env_t) ==
                   stable_value(*e.operands[0], env_t1)
               ? 1
               : 0;
  }
  switch (e.kind) {
    case Expr::Kind::Binary: {
      const std::string& op = e.text;
      if (op == "&&")
        return (eval_consequent(*e.operands[0], env_t, env_t1) != 0 &&
                eval_consequent(*e.operands[1], env_t, env_t1) != 0)
                   ? 1
                   : 0;
      if (op == "||")
        return (eval_consequent(*e.operands[0], env_t, env_t1) != 0 ||
                eval_consequent(*e.operands[1], env_t, env_t1) != 0)
                   ? 1
                   : 0;
      return eval_expr(e, env_t1);
    }
    case Expr::Kind::Unary:
      if (e.text == "!" || e.text == "~")
        return eval_consequent(*e.operands[0], env_t, env_t1) != 0 ? 0 : 1;
      return eval_expr(e, env_t1);
    case Expr::Kind::Ternary:
      return eval_consequent(*e.operands[0], env_t, env_t1) != 0
                 ? eval_consequent(*e.operands[1], env_t, env_t1)
                 : eval_consequent(*e.operands[2], env_t, env_t1);
    default:
      return eval_expr(e, env_t1);
  }
}

inline bool disabled(const PropertySpec& spec, const SimEnv& env) {
  return spec.disable && eval_expr(*spec.disable, env) != 0;
}

// The spec's obligation: at cycle t, unless the disable expression holds at
// t or t+1, antecedent(t) requires consequent(t+1).
inline bool obligation_violated(const PropertySpec& spec, const SimEnv& env_t,
                                const SimEnv& env_t1, bool* fired) {
  if (disabled(spec, env_t) || disabled(spec, env_t1)) return false;
  if (eval_expr(*spec.antecedent, env_t) == 0) return false;
  if (fired) *fired = true;
  return eval_consequent(*spec.consequent, env_t, env_t1) == 0;
}

// --- input enumeration -----------------------------------------------------

struct InputPacker {
  const SimModel* model;
  int total_bits = 0;

  explicit InputPacker(const SimModel& m) : model(&m) {
    for (int id : m.input_ids)
      total_bits += m.signals[static_cast<size_t>(id)].width;
  }

  std::vector<SimValue> unpack(uint64_t packed) const {
    std::vector<SimValue> values;
    values.reserve(model->input_ids.size());
    int shift = 0;
    for (int id : model->input_ids) {
      const auto& sig = model->signals[static_cast<size_t>(id)];
      SimValue v;
      v.scalar = (packed >> shift) & mask_of(sig.width);
      shift += sig.width;
      values.push_back(v);
    }
    return values;
  }

  std::vector<SimValue> random(std::mt19937_64& rng) const {
    std::vector<SimValue> values;
    values.reserve(model->input_ids.size());
    for (int id : model->input_ids) {
      const auto& sig = model->signals[static_cast<size_t>(id)];
      SimValue v;
      v.scalar = rng() & mask_of(sig.width);
      values.push_back(v);
    }
    return values;
  }
};

inline std::string state_key(const std::vector<SimValue>& state) {
  std::string key;
  key.reserve(state.size() * 9);
  for (const auto& v : state) {
    for (int b = 0; b < 8; ++b)
      key.push_back(static_cast<char>((v.scalar >> (b * 8)) & 0xff));
    for (uint64_t e : v.elems)
      for (int b = 0; b < 8; ++b)
        key.push_back(static_cast<char>((e >> (b * 8)) & 0xff));
  }
  return key;
}

inline TraceCycle record_cycle(const SimModel& m,
                               const std::vector<SimValue>& state,
                               const std::vector<SimValue>& inputs) {
  TraceCycle c;
  for (size_t i = 0; i < m.input_ids.size(); ++i)
    c.inputs[m.signals[static_cast<size_t>(m.input_ids[i])].name] =
        inputs[i].scalar;
  for (size_t i = 0; i < m.state_ids.size(); ++i) {
    const auto& sig = m.signals[static_cast<size_t>(m.state_ids[i])];
    if (sig.array_size == 0) {
      c.state[sig.name] = state[i].scalar;
    } else {
      for (size_t e = 0; e < state[i].elems.size(); ++e)
        c.state[sig.name + "[" +
                std::to_string(static_cast<int>(e) + sig.array_lo) + "]"] =
            state[i].elems[e];
    }
  }
  return c;
}

// Re-simulate an input sequence from a given initial state and verify the
// property is violated at obligation t. Guards every Falsified result.
inline bool replay_violates(const SimModel& m, const PropertySpec& spec,
                            const std::vector<SimValue>& initial_state,
                            const std::vector<std::vector<SimValue>>& inputs,
                            int t) {
  std::vector<SimValue> state = initial_state;
  std::vector<SimEnv> envs;
  for (const auto& in : inputs) {
    envs.push_back(evaluate_cycle(m, state, in));
    state = step_env(m, envs.back());
  }
  if (t + 1 >= static_cast<int>(envs.size())) return false;
  return obligation_violated(spec, envs[static_cast<size_t>(t)],
                             envs[static_cast<size_t>(t) + 1], nullptr);
}

inline Trace build_trace(const SimModel& m,
                         const std::vector<SimValue>& initial_state,
                         const std::vector<std::vector<SimValue>>& inputs,
                         int violation_t) {
  Trace trace;
  std::vector<SimValue> state = initial_state;
  for (const auto& in : inputs) {
    trace.cycles.push_back(record_cycle(m, state, in));
    state = step_env(m, evaluate_cycle(m, state, in));
  }
  trace.violation_cycle = violation_t + 1;
  return trace;
}

}  // namespace checker_detail

/// Attempt bounded falsification of one populated assertion against an
/// elaborated model. Exhaustive breadth-first search over input sequences
/// when the state+input footprint fits the budget (minimal-depth
/// counterexamples, sound non-falsification to depth); seeded random traces
/// otherwise. Every Falsified result is replayed before being returned.
inline PropertyResult check_property(const SimModel& model,
                                     const PopulatedAssertion& assertion,
                                     const CheckerConfig& config = {}) {
  using namespace checker_detail;
  PropertyResult result;
  result.assertion_id = assertion.id;

  std::string error;
  auto spec_opt = build_property_spec(assertion, &error);
  if (!spec_opt) {
    result.status = PropertyStatus::Unsupported;
    result.reason = error.empty() ? "unsupported property shape" : error;
    return result;
  }
  const PropertySpec& spec = *spec_opt;

  // Every referenced signal must exist in the model.
  for (const ExprPtr& e : {spec.disable, spec.antecedent, spec.consequent}) {
    if (!e) continue;
    for (const auto& name : collect_signal_refs_ordered(*e)) {
      if (!model.find(name)) {
        result.status = PropertyStatus::Unsupported;
        result.reason = "property references unknown signal '" + name + "'";
        return result;
      }
    }
  }

  InputPacker packer(model);
  const int depth = std::max(config.max_depth, 2);
  result.depth = depth;
  bool fired = false;

  auto finish_falsified = [&](const std::vector<SimValue>& init,
                              const std::vector<std::vector<SimValue>>& inputs,
                              int t) {
    if (!replay_violates(model, spec, init, inputs, t))
      throw std::logic_error("counterexample failed replay self-check");
    result.status = PropertyStatus::Falsified;
    result.trace = build_trace(model, init, inputs, t);
    return result;
  };

  if (model.total_footprint_bits <= config.exhaustive_bit_budget &&
      packer.total_bits < 63) {
    result.mode = "exhaustive";
    const uint64_t input_count = 1ull << packer.total_bits;

    struct Entry {
      std::vector<SimValue> state;
      int parent = -1;
      uint64_t via_input = 0;
      int level = 0;
    };
    std::vector<Entry> entries;
    std::map<std::string, int> visited;
    std::set<std::pair<std::string, std::string>> obligations_checked;

    entries.push_back({reset_state(model), -1, 0, 0});
    visited[state_key(entries[0].state)] = 0;

    auto inputs_to = [&](int entry_idx, uint64_t i_t,
                         uint64_t i_t1) -> std::vector<std::vector<SimValue>> {
      std::vector<uint64_t> packed;
      for (int cur = entry_idx; cur > 0; cur = entries[static_cast<size_t>(cur)].parent)
        packed.push_back(entries[static_cast<size_t>(cur)].via_input);
      std::reverse(packed.begin(), packed.end());
      packed.push_back(i_t);
      packed.push_back(i_t1);
      std::vector<std::vector<SimValue>> seq;
      for (uint64_t p : packed) seq.push_back(packer.unpack(p));
      return seq;
    };

    for (size_t qi = 0; qi < entries.size(); ++qi) {
      const int level = entries[qi].level;
      if (level > depth - 2) continue;
      const std::vector<SimValue> state = entries[qi].state;
      for (uint64_t i_t = 0; i_t < input_count; ++i_t) {
        auto in_t = packer.unpack(i_t);
        SimEnv env_t = evaluate_cycle(model, state, in_t);
        std::vector<SimValue> next = step_env(model, env_t);

        bool obligation = !disabled(spec, env_t) &&
                          eval_expr(*spec.antecedent, env_t) != 0;
        if (obligation) {
          std::string stable_key;
          for (const auto& arg : spec.stable_args) {
            SimValue v = stable_value(*arg, env_t);
            stable_key += state_key({v});
          }
          auto mark = std::make_pair(state_key(next), stable_key);
          if (obligations_checked.insert(mark).second) {
            for (uint64_t i_t1 = 0; i_t1 < input_count; ++i_t1) {
              SimEnv env_t1 = evaluate_cycle(model, next, packer.unpack(i_t1));
              if (disabled(spec, env_t1)) continue;
              fired = true;
              if (eval_consequent(*spec.consequent, env_t, env_t1) == 0) {
                return finish_falsified(
                    entries[0].state, inputs_to(static_cast<int>(qi), i_t, i_t1),
                    level);
              }
            }
          }
        }

        if (level + 1 <= depth - 2) {
          std::string key = state_key(next);
          if (!visited.count(key)) {
            visited[key] = static_cast<int>(entries.size());
            entries.push_back({next, static_cast<int>(qi), i_t, level + 1});
          }
        }
      }
    }
    result.status = PropertyStatus::NotFalsified;
    result.vacuous = !fired;
    return result;
  }

  // Random mode: seeded trials; registers without a declared reset start
  // randomized so reset-dependence shows up.
  result.mode = "random";
  std::mt19937_64 rng(config.seed);
  for (int trial = 0; trial < config.random_trials; ++trial) {
    std::vector<SimValue> init = reset_state(model);
    for (size_t i = 0; i < model.state_ids.size(); ++i) {
      const auto& sig =
          model.signals[static_cast<size_t>(model.state_ids[i])];
      if (sig.reset_value) continue;
      if (sig.array_size == 0) {
        init[i].scalar = rng() & mask_of(sig.width);
      } else {
        for (auto& e : init[i].elems) e = rng() & mask_of(sig.width);
      }
    }
    std::vector<std::vector<SimValue>> inputs;
    std::vector<SimEnv> envs;
    std::vector<SimValue> state = init;
    for (int t = 0; t < depth; ++t) {
      inputs.push_back(packer.random(rng));
      envs.push_back(evaluate_cycle(model, state, inputs.back()));
      state = step_env(model, envs.back());
      if (t >= 1) {
        bool fired_here = false;
        if (obligation_violated(spec, envs[static_cast<size_t>(t) - 1],
                                envs[static_cast<size_t>(t)], &fired_here)) {
          inputs.resize(static_cast<size_t>(t) + 1);
          return finish_falsified(init, inputs, t - 1);
        }
        fired = fired || fired_here;
      }
    }
  }
  result.status = PropertyStatus::NotFalsified;
  result.vacuous = !fired;
  return result;
}

/// Standard four-state VCD dump of a counterexample trace.
inline std::string write_vcd(const SimModel& model, const Trace& trace,
                             const std::string& assertion_id) {
  std::string out;
  out += "$comment counterexample for assertion " + assertion_id + " $end\n";
  out += "$timescale 1ns $end\n";
  out += "$scope module " + model.module + " $end\n";

  std::vector<std::pair<std::string, int>> vars;  // name, width
  if (!trace.cycles.empty()) {
    for (const auto& [name, _] : trace.cycles[0].inputs) {
      const SimSignal* sig = model.find(name);
      vars.push_back({name, sig ? sig->width : 1});
    }
    for (const auto& [name, _] : trace.cycles[0].state) {
      std::string base = name.substr(0, name.find('['));
      const SimSignal* sig = model.find(base);
      vars.push_back({name, sig ? sig->width : 1});
    }
  }
  auto code_of = [](size_t i) {
    std::string code;
    do {
      code.push_back(static_cast<char>('!' + i % 94));
      i /= 94;
    } while (i > 0);
    return code;
  };
  for (size_t i = 0; i < vars.size(); ++i)
    out += "$var wire " + std::to_string(vars[i].second) + " " + code_of(i) +
           " " + vars[i].first + " $end\n";
  out += "$upscope $end\n$enddefinitions $end\n";

  auto emit = [&](const TraceCycle& c) {
    size_t vi = 0;
    auto dump_value = [&](uint64_t value, int width) {
      if (width == 1) {
        out += std::to_string(value & 1) + code_of(vi) + "\n";
      } else {
        std::string bits = "b";
        for (int b = width - 1; b >= 0; --b)
          bits.push_back((value >> b) & 1 ? '1' : '0');
        out += bits + " " + code_of(vi) + "\n";
      }
      ++vi;
    };
    for (const auto& [name, value] : c.inputs) {
      const SimSignal* sig = model.find(name);
      dump_value(value, sig ? sig->width : 1);
    }
    for (const auto& [name, value] : c.state) {
      std::string base = name.substr(0, name.find('['));
      const SimSignal* sig = model.find(base);
      dump_value(value, sig ? sig->width : 1);
    }
  };
  for (size_t t = 0; t < trace.cycles.size(); ++t) {
    out += "#" + std::to_string(t * 10) + "\n";
    if (t == 0) out += "$dumpvars\n";
    emit(trace.cycles[t]);
    if (t == 0) out += "$end\n";
  }
  out += "#" + std::to_string(trace.cycles.size() * 10) + "\n";
  return out;
}

}  // namespace rtlscan
