#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace rtlscan {

// Structural validator for the subset of JSON Schema the response schemas
// use: type, properties/required/additionalProperties, items, enum.
inline bool validate_against_schema(const nlohmann::json& value,
                                    const nlohmann::json& schema,
                                    std::string* error = nullptr,
                                    const std::string& path = "$") {
  using nlohmann::json;
  auto fail = [&](const std::string& why) {
    if (error) *error = path + ": " + why;
    return false;
  };

  if (schema.contains("enum")) {
    for (const auto& candidate : schema.at("enum"))
      if (candidate == value) return true;
    return fail("value not in enum");
  }

  if (schema.contains("type")) {
    const std::string type = schema.at("type").get<std::string>();
    if (type == "object" && !value.is_object()) return fail("expected object");
    if (type == "array" && !value.is_array()) return fail("expected array");
    if (type == "string" && !value.is_string()) return fail("expected string");
    if (type == "boolean" && !value.is_boolean()) return fail("expected boolean");
    if (type == "integer" && !value.is_number_integer())
      return fail("expected integer");
    if (type == "number" && !value.is_number()) return fail("expected number");
  }

  if (value.is_object()) {
    if (schema.contains("required")) {
      for (const auto& key : schema.at("required")) {
        if (!value.contains(key.get<std::string>()))
          return fail("missing required key '" + key.get<std::string>() + "'");
      }
    }
    const json* props =
        schema.contains("properties") ? &schema.at("properties") : nullptr;
    for (const auto& [key, sub] : value.items()) {
      if (props && props->contains(key)) {
        if (!validate_against_schema(sub, props->at(key), error,
                                     path + "." + key))
          return false;
      } else if (schema.contains("additionalProperties") &&
                 schema.at("additionalProperties").is_boolean() &&
                 !schema.at("additionalProperties").get<bool>()) {
        return fail("unexpected key '" + key + "'");
      }
    }
  }

  if (value.is_array() && schema.contains("items")) {
    for (size_t i = 0; i < value.size(); ++i) {
      if (!validate_against_schema(value[i], schema.at("items"), error,
                                   path + "[" + std::to_string(i) + "]"))
        return false;
    }
  }
  return true;
}

}  // namespace rtlscan
