#pragma once

#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rtlscan/digest.hpp"
#include "rtlscan/prompts.hpp"

namespace rtlscan {

// Contextualized result for one static-analysis output. insecure=true always
// carries a nonempty explanation; secure findings carry none.
struct Finding {
  std::string id;      // stable: (cwe, variation, source)
  CweId cwe = 0;
  std::string source;  // LintViolation id or assertion id
  bool insecure = false;
  std::string explanation;
  Variation variation = Variation::V0;
  struct Provenance {
    std::string asset_prompt_digest;
    std::string context_prompt_digest;
    std::string provider;
    std::string model;
  } provenance;
};

inline std::string finding_id(CweId cwe, Variation variation,
                              const std::string& source) {
  return digest_of({"finding", std::to_string(cwe), to_string(variation), source});
}

/// Parse one contextualization response into findings. Assessments whose id
/// is not one of the supplied static-analysis ids, or that claim insecure
/// without an explanation, are dropped with diagnostics.
inline std::vector<Finding> parse_context_response(
    CweId cwe, Variation variation, const nlohmann::json& response,
    const std::set<std::string>& sa_ids, Diagnostics& diags) {
  std::vector<Finding> findings;
  if (!response.contains("assessments") || !response.at("assessments").is_array()) {
    add_diag(diags, Severity::Error, "context-schema",
             "contextualization response missing 'assessments' array");
    return findings;
  }
  for (const auto& item : response.at("assessments")) {
    if (!item.is_object() || !item.contains("id") || !item.contains("insecure")) {
      add_diag(diags, Severity::Warning, "context-dropped",
               "malformed assessment entry: " + item.dump());
      continue;
    }
    std::string source = item.at("id").get<std::string>();
    if (!sa_ids.count(source)) {
      add_diag(diags, Severity::Warning, "context-dropped",
               "assessment references unknown output id '" + source + "'");
      continue;
    }
    Finding f;
    f.cwe = cwe;
    f.variation = variation;
    f.source = std::move(source);
    f.insecure = item.at("insecure").get<bool>();
    f.explanation = item.value("explanation", "");
    if (f.insecure && f.explanation.empty()) {
      add_diag(diags, Severity::Warning, "context-dropped",
               "insecure verdict without explanation for '" + f.source + "'");
      continue;
    }
    if (!f.insecure) f.explanation.clear();
    f.id = finding_id(cwe, variation, f.source);
    findings.push_back(std::move(f));
  }
  return findings;
}

}  // namespace rtlscan
