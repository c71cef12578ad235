#pragma once

#include <nlohmann/json.hpp>

#include "rtlscan/assets.hpp"
#include "rtlscan/version.hpp"

namespace rtlscan {

// Frozen response schemas handed to the provider as structured-output
// constraints. Treat these as a versioned wire format: any change must bump
// kResponseSchemaVersion and invalidates recorded fixtures.

namespace schema_detail {

inline nlohmann::json string_array(const char* key) {
  return {
      {"type", "object"},
      {"properties", {{key, {{"type", "array"}, {"items", {{"type", "string"}}}}}}},
      {"required", nlohmann::json::array({key})},
      {"additionalProperties", false},
  };
}

inline nlohmann::json object_array(const char* key,
                                   std::initializer_list<const char*> fields) {
  nlohmann::json props = nlohmann::json::object();
  nlohmann::json required = nlohmann::json::array();
  for (const char* f : fields) {
    if (std::string(f) == "clk_sense")
      props[f] = {{"type", "string"},
                  {"enum", nlohmann::json::array({"posedge", "negedge"})}};
    else
      props[f] = {{"type", "string"}};
    required.push_back(f);
  }
  nlohmann::json item = {{"type", "object"},
                         {"properties", props},
                         {"required", required},
                         {"additionalProperties", false}};
  return {
      {"type", "object"},
      {"properties", {{key, {{"type", "array"}, {"items", item}}}}},
      {"required", nlohmann::json::array({key})},
      {"additionalProperties", false},
  };
}

}  // namespace schema_detail

/// Response schema for the asset-identification stage of one CWE.
inline nlohmann::json asset_schema(CweId cwe) {
  using nlohmann::json;
  switch (cwe) {
    case 1191:
      return schema_detail::string_array("access_control_related_signals");
    case 1300:
      return schema_detail::string_array("side_channel_related_signals");
    case 1231:
      return schema_detail::object_array(
          "lock_signals_info",
          {"lock_signal", "conditions_for_modification", "clk", "clk_sense"});
    case 1233: {
      json pair = {{"type", "object"},
                   {"properties",
                    {{"lock_signal", {{"type", "string"}}},
                     {"security_sensitive_signal", {{"type", "string"}}}}},
                   {"required", json::array(
                                    {"lock_signal", "security_sensitive_signal"})},
                   {"additionalProperties", false}};
      json inner = {
          {"type", "object"},
          {"properties",
           {{"security_sensitive_signals_info",
             {{"type", "array"}, {"items", pair}}},
            {"reset_conditions", {{"type", "string"}}},
            {"clk", {{"type", "string"}}},
            {"clk_sense",
             {{"type", "string"},
              {"enum", json::array({"posedge", "negedge"})}}}}},
          {"required",
           json::array({"security_sensitive_signals_info", "reset_conditions",
                        "clk", "clk_sense"})},
          {"additionalProperties", false}};
      return {{"type", "object"},
              {"properties", {{"relevant-signals", inner}}},
              {"required", json::array({"relevant-signals"})},
              {"additionalProperties", false}};
    }
    case 1244:
      return schema_detail::object_array(
          "privilege_signals_info",
          {"privilege_signal", "conditions_for_privilege_escalation",
           "reset_conditions", "high_privilege", "previous_privilege", "clk",
           "clk_sense"});
    default:
      return nlohmann::json::object();
  }
}

/// Response schema for the contextualization stage (same for every CWE):
/// one verdict per static-analysis output id.
inline nlohmann::json contextualization_schema() {
  using nlohmann::json;
  json item = {{"type", "object"},
               {"properties",
                {{"id", {{"type", "string"}}},
                 {"insecure", {{"type", "boolean"}}},
                 {"explanation", {{"type", "string"}}}}},
               {"required", json::array({"id", "insecure", "explanation"})},
               {"additionalProperties", false}};
  return {{"type", "object"},
          {"properties", {{"assessments", {{"type", "array"}, {"items", item}}}}},
          {"required", json::array({"assessments"})},
          {"additionalProperties", false}};
}

}  // namespace rtlscan
