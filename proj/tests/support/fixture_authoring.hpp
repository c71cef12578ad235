#pragma once

// Helpers for writing recorded-LLM fixtures. The prompt text, digests and
// static-analysis output ids all come from the production code paths, so a
// fixture authored here is exactly what a --record run against a live
// provider would have stored.

#include <string>

#include <nlohmann/json.hpp>

#include "rtlscan/pipeline.hpp"

namespace fixtures {

using namespace rtlscan;

inline nlohmann::json bundle_request_json(const PromptBundle& bundle,
                                          const std::string& model) {
  nlohmann::json req;
  req["system"] = bundle.system;
  req["user"] = bundle.user;
  req["assistant"] = bundle.assistant;
  req["schema"] = bundle.schema;
  req["model"] = model;
  return req;
}

inline std::string save_bundle(FixtureStore& store, const PromptBundle& bundle,
                               const std::string& model,
                               const nlohmann::json& response) {
  std::string digest = request_digest(bundle, model);
  store.save(digest, bundle_request_json(bundle, model), response, model);
  return digest;
}

inline std::string author_asset_fixture(FixtureStore& store,
                                        const std::string& model, CweId cwe,
                                        Variation variation,
                                        const std::string& rtl,
                                        const nlohmann::json& response,
                                        const CweCatalog& catalog) {
  PromptBundle bundle = build_asset_prompt(cwe, variation, rtl, catalog);
  return save_bundle(store, bundle, model, response);
}

inline std::string author_context_fixture(
    FixtureStore& store, const std::string& model, CweId cwe,
    Variation variation, const std::string& rtl, const nlohmann::json& sa_json,
    Strategy strategy, const nlohmann::json& response,
    const CweCatalog& catalog) {
  PromptBundle bundle = build_contextualization_prompt(cwe, variation, rtl,
                                                       sa_json, strategy, catalog);
  return save_bundle(store, bundle, model, response);
}

inline std::string author_rethink_fixture(
    FixtureStore& store, const std::string& model, CweId cwe,
    Variation variation, const std::string& rtl, const nlohmann::json& sa_json,
    Strategy strategy, const nlohmann::json& first_response,
    const nlohmann::json& second_response, const CweCatalog& catalog) {
  PromptBundle first = build_contextualization_prompt(cwe, variation, rtl,
                                                      sa_json, strategy, catalog);
  PromptBundle rethink =
      build_rethink_prompt(first, first_response.dump(), sa_json, strategy);
  return save_bundle(store, rethink, model, second_response);
}

// Static-analysis outputs exactly as the pipeline serializes them into the
// contextualization prompt.
inline nlohmann::json lint_sa_json(CweId cwe, const DesignUnit& unit,
                                   std::string_view file_text,
                                   const AssetSet& assets) {
  UnitReport scratch;
  scratch.cwe = cwe;
  scratch.strategy = "lint";
  Diagnostics diags;
  std::vector<UnitSource> sources = {{&unit, file_text}};
  scratch.violations = run_lint_strategy(cwe, sources, assets, diags);
  return pipeline_detail::sa_outputs_json(scratch);
}

inline nlohmann::json assertion_sa_json(CweId cwe, const DesignUnit& unit,
                                        const AssetSet& assets,
                                        const CheckerConfig& config) {
  UnitReport scratch;
  scratch.cwe = cwe;
  scratch.strategy = "assertion";
  Diagnostics diags;
  auto assertions = populate_assertions(cwe, assets, unit, diags);
  auto elaborated = elaborate(unit);
  const SimModel& model = std::get<SimModel>(elaborated);
  for (const auto& assertion : assertions) {
    PropertyResult result = check_property(model, assertion, config);
    if (result.status == PropertyStatus::Falsified)
      scratch.falsified.push_back({assertion, std::move(result)});
  }
  return pipeline_detail::sa_outputs_json(scratch);
}

}  // namespace fixtures
