#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rtlscan/cwe_catalog.hpp"
#include "rtlscan/digest.hpp"
#include "rtlscan/schemas.hpp"

namespace rtlscan {

enum class Variation { V0, V1, V2, V3 };

inline std::string to_string(Variation v) {
  switch (v) {
    case Variation::V0: return "v0";
    case Variation::V1: return "v1";
    case Variation::V2: return "v2";
    case Variation::V3: return "v3";
  }
  return "v0";
}

inline std::optional<Variation> variation_from(const std::string& s) {
  if (s == "v0") return Variation::V0;
  if (s == "v1") return Variation::V1;
  if (s == "v2") return Variation::V2;
  if (s == "v3") return Variation::V3;
  return std::nullopt;
}

// v1/v3 prepend the CWE exemplar to the user prompt; v2/v3 add the rethink
// turn during contextualization.
inline bool uses_exemplar(Variation v) {
  return v == Variation::V1 || v == Variation::V3;
}
inline bool uses_rethink(Variation v) {
  return v == Variation::V2 || v == Variation::V3;
}

enum class Strategy { Lint, Assertion };

// One fully-built provider request: role-tagged turns plus the structured
// output schema. user[i] is followed by assistant[i] for the transcript of
// a rethink pass.
struct PromptBundle {
  std::string system;
  std::vector<std::string> user;
  std::vector<std::string> assistant;  // size user.size()-1
  nlohmann::json schema;
  CweId cwe = 0;
  Variation variation = Variation::V0;
};

/// Stable fixture key for a request; covers every part of the request the
/// provider sends, so corpus edits invalidate only affected fixtures.
inline std::string request_digest(const PromptBundle& bundle,
                                  const std::string& model) {
  Digest d;
  d.field("request");
  d.field(model);
  d.field(bundle.system);
  for (size_t i = 0; i < bundle.user.size(); ++i) {
    d.field(bundle.user[i]);
    if (i < bundle.assistant.size()) d.field(bundle.assistant[i]);
  }
  d.field(bundle.schema.dump());
  return d.hex();
}

namespace prompt_detail {

inline const CweInfo& require_cwe(const CweCatalog& catalog, CweId cwe) {
  const CweInfo* info = catalog.find(cwe);
  if (!info)
    throw std::invalid_argument("no CWE catalog entry for CWE-" +
                                std::to_string(cwe));
  return *info;
}

inline std::string system_prompt(const CweInfo& info) {
  return "You are a hardware security expert. Your task is to analyze "
         "Verilog code for potential CWE-" +
         std::to_string(info.id) + " bugs. CWE-" + std::to_string(info.id) +
         " is " + info.description;
}

inline const char* output_noun(Strategy s) {
  return s == Strategy::Lint ? "violation" : "falsified property";
}
inline const char* output_noun_plural(Strategy s) {
  return s == Strategy::Lint ? "linting violations" : "falsified properties";
}
inline const char* output_object_name(Strategy s) {
  return s == Strategy::Lint ? "relevant_violations" : "falsified_properties";
}

}  // namespace prompt_detail

/// Asset-identification prompt. The exemplar block is data from the CWE
/// catalog; v2 does not change this stage.
inline PromptBundle build_asset_prompt(CweId cwe, Variation variation,
                                       const std::string& rtl,
                                       const CweCatalog& catalog) {
  const CweInfo& info = prompt_detail::require_cwe(catalog, cwe);
  PromptBundle bundle;
  bundle.cwe = cwe;
  bundle.variation = variation;
  bundle.system = prompt_detail::system_prompt(info);
  std::string user;
  if (uses_exemplar(variation)) {
    if (info.exemplar.code.empty())
      throw std::invalid_argument("CWE-" + std::to_string(cwe) +
                                  " has no exemplar for variation " +
                                  to_string(variation));
    user += info.exemplar_block() + "\n";
  }
  user += info.signal_question + " " + info.signal_nature +
          "\n\nHere is the Verilog code:\n" + rtl;
  bundle.user.push_back(std::move(user));
  bundle.schema = asset_schema(cwe);
  return bundle;
}

/// First contextualization prompt over nonempty static-analysis outputs.
/// Callers short-circuit to zero findings when there is nothing to assess.
inline PromptBundle build_contextualization_prompt(
    CweId cwe, Variation variation, const std::string& rtl,
    const nlohmann::json& sa_outputs, Strategy strategy,
    const CweCatalog& catalog) {
  if (!sa_outputs.is_array() || sa_outputs.empty())
    throw std::invalid_argument(
        "contextualization requires nonempty static-analysis outputs");
  const CweInfo& info = prompt_detail::require_cwe(catalog, cwe);
  PromptBundle bundle;
  bundle.cwe = cwe;
  bundle.variation = variation;
  bundle.system = prompt_detail::system_prompt(info);
  std::string user;
  if (uses_exemplar(variation)) user += info.exemplar_block() + "\n";
  user += "Consider the following Verilog code:\n" + rtl + "\nFor each of the " +
          prompt_detail::output_noun_plural(strategy) + ", determine whether the " +
          prompt_detail::output_noun(strategy) +
          " poses a security issue pertaining to CWE-" + std::to_string(cwe) +
          " and provide an explanation if that is the case. If the " +
          prompt_detail::output_noun(strategy) +
          " does not pose a security issue, no explanation is needed. Here is "
          "the output " +
          sa_outputs.dump(2) + " .";
  bundle.user.push_back(std::move(user));
  bundle.schema = contextualization_schema();
  return bundle;
}

/// Second contextualization turn for v2/v3: the first response joins the
/// transcript and the model is asked to re-reason over each output.
inline PromptBundle build_rethink_prompt(const PromptBundle& first,
                                         const std::string& first_response,
                                         const nlohmann::json& sa_outputs,
                                         Strategy strategy) {
  if (!uses_rethink(first.variation))
    throw std::invalid_argument("rethink pass only applies to v2/v3, not " +
                                to_string(first.variation));
  PromptBundle bundle = first;
  bundle.assistant.push_back(first_response);
  std::string user =
      std::string("Go over the previously provided response and reason about "
                  "the provided explanation for each ") +
      prompt_detail::output_noun(strategy) + ". Only categorize the " +
      prompt_detail::output_noun(strategy) +
      " as insecure if you are confident in your assessment. Here is the `" +
      prompt_detail::output_object_name(strategy) + "' object:\n" +
      sa_outputs.dump(2);
  bundle.user.push_back(std::move(user));
  return bundle;
}

}  // namespace rtlscan
