#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "rtlscan/assets.hpp"
#include "rtlscan/digest.hpp"

namespace rtlscan {

// One instantiated SVA template. sva_text regenerates byte-identically from
// fields; rendering is a pure function.
struct PopulatedAssertion {
  CweId cwe = 0;
  std::map<std::string, std::string> fields;  // placeholder -> bound text
  std::string sva_text;
  std::string target_module;
  std::string id;  // stable hash of (cwe, fields, module)
};

namespace detail {

inline std::string negate(const std::string& condition) {
  // Parenthesize before negating so operator precedence in LLM-provided
  // text cannot leak into the template.
  return "~(" + condition + ")";
}

inline std::string assertion_id(CweId cwe,
                                const std::map<std::string, std::string>& fields,
                                const std::string& module) {
  Digest d;
  d.field("assertion");
  d.field(std::to_string(cwe));
  d.field(module);
  for (const auto& [k, v] : fields) {
    d.field(k);
    d.field(v);
  }
  return d.hex();
}

inline std::string render_sva(CweId cwe,
                              const std::map<std::string, std::string>& f) {
  auto at = [&](const char* key) { return f.at(key); };
  switch (cwe) {
    case 1231:
      return "@(" + at("CLK_SENSE") + " " + at("CLK") + ") " +
             at("CONDITIONS_FOR_STABLE_LOCK") + " |=> $stable(" +
             at("LOCK_SIGNAL") + ");";
    case 1233:
      return "@(" + at("CLK_SENSE") + " " + at("CLK") + ") disable iff (" +
             at("RESET_CONDITIONS") + ") " + at("LOCK_SIGNAL") +
             " == '1 |=> $stable(" + at("SECURITY_SENSITIVE_REGISTER") + ");";
    case 1244:
      return "@(" + at("CLK_SENSE") + " " + at("CLK") + ") disable iff (" +
             at("RESET_CONDITIONS") + ") ~" +
             at("CONDITIONS_FOR_PRIVILEGE_ESCALATION") + " |=> (" +
             at("PRIVILEGE_SIGNAL") + " != " + at("HIGH_PRIVILEGE") + " || " +
             at("PRIVILEGE_SIGNAL") + " == " + at("PREVIOUS_PRIVILEGE") + ");";
    default:
      return {};
  }
}

// Every base identifier in the expression must resolve in the unit.
inline bool signals_resolve(const std::string& expr_text, const SymbolTable& syms,
                            std::string* missing) {
  Diagnostics scratch;
  ExprPtr e = parse_expression_text(expr_text, scratch);
  if (!e) {
    if (missing) *missing = expr_text;
    return false;
  }
  for (const auto& name : collect_signal_refs_ordered(*e)) {
    if (!syms.lookup(name)) {
      if (missing) *missing = name;
      return false;
    }
  }
  return true;
}

inline bool parses(const std::string& expr_text) {
  Diagnostics scratch;
  return parse_expression_text(expr_text, scratch) != nullptr;
}

inline void formation_failure(Diagnostics& diags, CweId cwe,
                              const std::string& what,
                              const std::string& detail_text) {
  add_diag(diags, Severity::Warning, "formation-failure",
           "CWE-" + std::to_string(cwe) + " assertion skipped: " + what + " (" +
               detail_text + ")");
}

}  // namespace detail

inline bool is_assertion_cwe(CweId cwe) {
  return cwe == 1231 || cwe == 1233 || cwe == 1244;
}

/// Populate the CWE's SVA template once per asset entry. Entries with
/// unparseable conditions or unresolved signals are skipped with a
/// formation-failure diagnostic; duplicates collapse before population.
inline std::vector<PopulatedAssertion> populate_assertions(CweId cwe,
                                                           const AssetSet& assets,
                                                           const DesignUnit& unit,
                                                           Diagnostics& diags) {
  std::vector<PopulatedAssertion> out;
  if (!is_assertion_cwe(cwe)) return out;
  SymbolTable syms(unit);
  std::set<std::string> seen_ids;

  auto push = [&](std::map<std::string, std::string> fields) {
    PopulatedAssertion a;
    a.cwe = cwe;
    a.fields = std::move(fields);
    a.target_module = unit.name;
    a.id = detail::assertion_id(cwe, a.fields, unit.name);
    if (!seen_ids.insert(a.id).second) return;  // duplicate asset entry
    a.sva_text = detail::render_sva(cwe, a.fields);
    out.push_back(std::move(a));
  };

  switch (cwe) {
    case 1231: {
      for (const auto& lock : assets.locks) {
        std::string missing;
        if (!detail::parses(lock.conditions_for_stable_lock)) {
          detail::formation_failure(diags, cwe, "unparseable conditions",
                                    lock.conditions_for_stable_lock);
          continue;
        }
        if (!detail::signals_resolve(lock.lock_signal, syms, &missing) ||
            !syms.lookup(lock.clk)) {
          detail::formation_failure(diags, cwe, "unresolved signal",
                                    missing.empty() ? lock.clk : missing);
          continue;
        }
        push({{"CLK_SENSE", to_string(lock.clk_sense)},
              {"CLK", lock.clk},
              {"CONDITIONS_FOR_STABLE_LOCK",
               detail::negate(lock.conditions_for_stable_lock)},
              {"LOCK_SIGNAL", lock.lock_signal}});
      }
      break;
    }
    case 1233: {
      if (assets.pairs.empty()) break;
      if (!detail::parses(assets.reset_conditions)) {
        detail::formation_failure(diags, cwe, "unparseable reset conditions",
                                  assets.reset_conditions);
        break;
      }
      if (assets.clk.empty() || !syms.lookup(assets.clk)) {
        detail::formation_failure(diags, cwe, "unresolved clock", assets.clk);
        break;
      }
      for (const auto& pair : assets.pairs) {
        std::string missing;
        if (!detail::signals_resolve(pair.lock_signal, syms, &missing)) {
          detail::formation_failure(diags, cwe, "unresolved lock signal", missing);
          continue;
        }
        if (!syms.lookup(pair.security_sensitive_signal)) {
          detail::formation_failure(diags, cwe, "unresolved register",
                                    pair.security_sensitive_signal);
          continue;
        }
        push({{"CLK_SENSE", to_string(assets.clk_sense)},
              {"CLK", assets.clk},
              {"RESET_CONDITIONS", assets.reset_conditions},
              {"LOCK_SIGNAL", pair.lock_signal},
              {"SECURITY_SENSITIVE_REGISTER", pair.security_sensitive_signal}});
      }
      break;
    }
    case 1244: {
      for (const auto& p : assets.privileges) {
        std::string missing;
        if (!detail::parses(p.conditions_for_privilege_escalation) ||
            !detail::parses(p.reset_conditions) ||
            !detail::parses(p.high_privilege)) {
          detail::formation_failure(diags, cwe, "unparseable conditions",
                                    p.privilege_signal);
          continue;
        }
        if (!detail::signals_resolve(p.privilege_signal, syms, &missing) ||
            !detail::signals_resolve(p.previous_privilege, syms, &missing) ||
            !syms.lookup(p.clk)) {
          detail::formation_failure(diags, cwe, "unresolved signal",
                                    missing.empty() ? p.clk : missing);
          continue;
        }
        push({{"CLK_SENSE", to_string(p.clk_sense)},
              {"CLK", p.clk},
              {"RESET_CONDITIONS", p.reset_conditions},
              {"CONDITIONS_FOR_PRIVILEGE_ESCALATION",
               "(" + p.conditions_for_privilege_escalation + ")"},
              {"PRIVILEGE_SIGNAL", p.privilege_signal},
              {"HIGH_PRIVILEGE", p.high_privilege},
              {"PREVIOUS_PRIVILEGE", p.previous_privilege}});
      }
      break;
    }
    default:
      break;
  }
  return out;
}

/// Emit a bindable SystemVerilog checker module: one labeled assert property
/// per assertion (deduplicated by id) plus a bind directive, for users who
/// want to run the properties under a commercial FPV tool.
inline std::string render_sva_file(const std::vector<PopulatedAssertion>& assertions,
                                   const DesignUnit& unit) {
  SymbolTable syms(unit);
  std::set<std::string> seen;
  std::vector<const PopulatedAssertion*> unique;
  std::set<std::string> referenced;
  for (const auto& a : assertions) {
    if (a.target_module != unit.name) continue;
    if (!seen.insert(a.id).second) continue;
    unique.push_back(&a);
    for (const auto& [key, text] : a.fields) {
      if (key == "CLK_SENSE") continue;
      Diagnostics scratch;
      ExprPtr e = parse_expression_text(text, scratch);
      if (!e) continue;
      for (const auto& name : collect_signal_refs_ordered(*e))
        if (syms.lookup(name)) referenced.insert(name);
    }
  }

  std::string checker = unit.name + "_props";
  std::string out;
  out += "// Auto-generated property checker for module " + unit.name + ".\n";
  out += "module " + checker + " (\n";
  bool first = true;
  for (const auto& name : referenced) {
    const SignalDecl* decl = syms.lookup(name);
    out += first ? "  " : ",\n  ";
    first = false;
    out += "input logic ";
    if (decl->width() > 1)
      out += "[" + std::to_string(decl->msb) + ":" + std::to_string(decl->lsb) +
             "] ";
    out += name;
  }
  out += "\n);\n";
  for (const auto* a : unique)
    out += "  a_" + a->id + ": assert property (" + a->sva_text + ");\n";
  out += "endmodule\n\n";
  out += "bind " + unit.name + " " + checker + " " + checker + "_i (.*);\n";
  return out;
}

}  // namespace rtlscan
