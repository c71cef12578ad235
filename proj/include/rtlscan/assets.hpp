#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rtlscan/parser.hpp"

namespace rtlscan {

using CweId = int;

inline const std::vector<CweId>& supported_cwes() {
  static const std::vector<CweId> cwes = {1191, 1231, 1233, 1244, 1300};
  return cwes;
}

enum class ClkSense { Posedge, Negedge };

inline std::string to_string(ClkSense s) {
  return s == ClkSense::Posedge ? "posedge" : "negedge";
}
inline std::optional<ClkSense> clk_sense_from(const std::string& s) {
  if (s == "posedge") return ClkSense::Posedge;
  if (s == "negedge") return ClkSense::Negedge;
  return std::nullopt;
}

struct LockAsset {  // CWE-1231
  std::string lock_signal;  // signal expression, e.g. reglk_mem[0]
  // Conditions under which modifying the lock is legal; rendering negates
  // them to get the stability antecedent.
  std::string conditions_for_stable_lock;
  std::string clk;
  ClkSense clk_sense = ClkSense::Posedge;
};

struct LockPairAsset {  // CWE-1233 entry
  std::string lock_signal;
  std::string security_sensitive_signal;
};

struct PrivilegeAsset {  // CWE-1244
  std::string privilege_signal;
  std::string conditions_for_privilege_escalation;
  std::string reset_conditions;
  std::string high_privilege;      // constant expression text
  std::string previous_privilege;  // signal expression
  std::string clk;
  ClkSense clk_sense = ClkSense::Posedge;
};

// Structured output of asset identification for one (cwe, module) unit.
// Only the members for the tagged cwe are populated.
struct AssetSet {
  CweId cwe = 0;

  std::vector<std::string> signals;  // 1191 access-control / 1300 side-channel

  std::vector<LockAsset> locks;  // 1231

  std::vector<LockPairAsset> pairs;  // 1233
  std::string reset_conditions;      // 1233 shared fields
  std::string clk;
  ClkSense clk_sense = ClkSense::Posedge;

  std::vector<PrivilegeAsset> privileges;  // 1244

  // Number of asset entries in the per-CWE sense used for the
  // assets-vs-assertions accounting.
  size_t entry_count() const {
    switch (cwe) {
      case 1191:
      case 1300: return signals.size();
      case 1231: return locks.size();
      case 1233: return pairs.size();
      case 1244: return privileges.size();
      default: return 0;
    }
  }

  bool empty() const { return entry_count() == 0; }
};

namespace detail {

inline bool is_identifier(const std::string& text) {
  if (text.empty()) return false;
  if (!ident_start(text[0])) return false;
  for (char c : text)
    if (!ident_char(c) || c == '$') return false;
  return true;
}

inline std::string trimmed(std::string s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  size_t e = s.find_last_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  return s.substr(b, e - b + 1);
}

}  // namespace detail

// Parse one asset-identification response into an AssetSet. Entries that are
// not identifiers / parseable expressions are dropped with diagnostics; they
// count toward the assets-vs-assertions deficit downstream.
inline AssetSet parse_asset_response(CweId cwe, const nlohmann::json& response,
                                     Diagnostics& diags) {
  using nlohmann::json;
  AssetSet out;
  out.cwe = cwe;

  auto drop = [&](const std::string& what, const std::string& value) {
    add_diag(diags, Severity::Warning, "asset-dropped",
             what + " '" + value + "' dropped from CWE-" + std::to_string(cwe) +
                 " asset set");
  };
  auto get_text = [](const json& j, const char* key) -> std::optional<std::string> {
    if (!j.contains(key) || !j.at(key).is_string()) return std::nullopt;
    return detail::trimmed(j.at(key).get<std::string>());
  };
  auto parses_as_expr = [](const std::string& text) {
    Diagnostics scratch;
    return parse_expression_text(text, scratch) != nullptr;
  };

  switch (cwe) {
    case 1191:
    case 1300: {
      const char* key = cwe == 1191 ? "access_control_related_signals"
                                    : "side_channel_related_signals";
      if (!response.contains(key) || !response.at(key).is_array()) {
        add_diag(diags, Severity::Error, "asset-schema",
                 std::string("response missing array '") + key + "'");
        return out;
      }
      for (const auto& item : response.at(key)) {
        if (!item.is_string()) {
          drop("signal entry", item.dump());
          continue;
        }
        std::string name = detail::trimmed(item.get<std::string>());
        if (!detail::is_identifier(name)) {
          drop("signal name", name);
          continue;
        }
        out.signals.push_back(std::move(name));
      }
      return out;
    }
    case 1231: {
      if (!response.contains("lock_signals_info") ||
          !response.at("lock_signals_info").is_array()) {
        add_diag(diags, Severity::Error, "asset-schema",
                 "response missing array 'lock_signals_info'");
        return out;
      }
      for (const auto& item : response.at("lock_signals_info")) {
        auto lock = get_text(item, "lock_signal");
        auto cond = get_text(item, "conditions_for_modification");
        if (!cond) cond = get_text(item, "conditions_for_stable_lock");
        auto clk = get_text(item, "clk");
        auto sense = get_text(item, "clk_sense");
        if (!lock || !cond || !clk || !sense) {
          drop("lock entry", item.dump());
          continue;
        }
        auto cs = clk_sense_from(*sense);
        if (!cs || !parses_as_expr(*lock) || !parses_as_expr(*cond) ||
            !detail::is_identifier(*clk)) {
          drop("lock entry", item.dump());
          continue;
        }
        out.locks.push_back({*lock, *cond, *clk, *cs});
      }
      return out;
    }
    case 1233: {
      // Accept both the nested "relevant-signals" object and the flat form.
      const json* body = &response;
      if (response.contains("relevant-signals") &&
          response.at("relevant-signals").is_object())
        body = &response.at("relevant-signals");
      if (!body->contains("security_sensitive_signals_info") ||
          !body->at("security_sensitive_signals_info").is_array()) {
        add_diag(diags, Severity::Error, "asset-schema",
                 "response missing array 'security_sensitive_signals_info'");
        return out;
      }
      auto reset = get_text(*body, "reset_conditions");
      auto clk = get_text(*body, "clk");
      auto sense = get_text(*body, "clk_sense");
      if (!reset || !parses_as_expr(*reset)) {
        add_diag(diags, Severity::Error, "asset-schema",
                 "CWE-1233 response missing parseable 'reset_conditions'");
        return out;
      }
      out.reset_conditions = *reset;
      out.clk = clk.value_or("");
      if (sense) {
        auto cs = clk_sense_from(*sense);
        if (cs) out.clk_sense = *cs;
      }
      for (const auto& item : body->at("security_sensitive_signals_info")) {
        auto lock = get_text(item, "lock_signal");
        auto reg = get_text(item, "security_sensitive_signal");
        if (!lock || !reg || !parses_as_expr(*lock) ||
            !detail::is_identifier(*reg)) {
          drop("lock/register pair", item.dump());
          continue;
        }
        out.pairs.push_back({*lock, *reg});
      }
      return out;
    }
    case 1244: {
      if (!response.contains("privilege_signals_info") ||
          !response.at("privilege_signals_info").is_array()) {
        add_diag(diags, Severity::Error, "asset-schema",
                 "response missing array 'privilege_signals_info'");
        return out;
      }
      for (const auto& item : response.at("privilege_signals_info")) {
        PrivilegeAsset p;
        auto priv = get_text(item, "privilege_signal");
        auto cond = get_text(item, "conditions_for_privilege_escalation");
        auto reset = get_text(item, "reset_conditions");
        auto high = get_text(item, "high_privilege");
        auto prev = get_text(item, "previous_privilege");
        auto clk = get_text(item, "clk");
        auto sense = get_text(item, "clk_sense");
        if (!priv || !cond || !reset || !high || !prev || !clk || !sense) {
          drop("privilege entry", item.dump());
          continue;
        }
        auto cs = clk_sense_from(*sense);
        if (!cs || !parses_as_expr(*priv) || !parses_as_expr(*cond) ||
            !parses_as_expr(*reset) || !parses_as_expr(*high) ||
            !parses_as_expr(*prev) || !detail::is_identifier(*clk)) {
          drop("privilege entry", item.dump());
          continue;
        }
        p.privilege_signal = *priv;
        p.conditions_for_privilege_escalation = *cond;
        p.reset_conditions = *reset;
        p.high_privilege = *high;
        p.previous_privilege = *prev;
        p.clk = *clk;
        p.clk_sense = *cs;
        out.privileges.push_back(std::move(p));
      }
      return out;
    }
    default:
      add_diag(diags, Severity::Error, "asset-schema",
               "unsupported CWE " + std::to_string(cwe));
      return out;
  }
}

}  // namespace rtlscan
