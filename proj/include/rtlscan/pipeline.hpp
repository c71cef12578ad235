#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "rtlscan/checker.hpp"
#include "rtlscan/findings.hpp"
#include "rtlscan/lint.hpp"
#include "rtlscan/provider.hpp"
#include "rtlscan/version.hpp"

namespace rtlscan {

enum class ContextGranularity { PerModule, WholeFile };

struct ScanConfig {
  std::string manifest_path;
  std::vector<CweId> cwes;
  Variation variation = Variation::V0;
  ProviderConfig provider;
  CheckerConfig checker;
  std::string output_dir;
  bool emit_sva = false;
  bool dump_vcd = false;
  bool deterministic = false;
  ContextGranularity context = ContextGranularity::PerModule;
  int jobs = 1;
  std::string cwe_data_dir;  // optional catalog override directory
};

inline std::string config_digest(const ScanConfig& c) {
  Digest d;
  d.field("config");
  for (CweId cwe : c.cwes) d.field(std::to_string(cwe));
  d.field(to_string(c.variation));
  d.field(c.provider.kind == ProviderKind::Http ? "http" : "replay");
  d.field(c.provider.model);
  d.field(std::to_string(c.checker.max_depth));
  d.field(std::to_string(c.checker.exhaustive_bit_budget));
  d.field(std::to_string(c.checker.random_trials));
  d.field(std::to_string(c.checker.seed));
  d.field(c.context == ContextGranularity::PerModule ? "per-module" : "whole-file");
  return d.hex();
}

struct FalsifiedProperty {
  PopulatedAssertion assertion;
  PropertyResult result;
};

// Everything the pipeline learned about one (cwe, module) work item.
struct UnitReport {
  CweId cwe = 0;
  std::string module;
  std::string file;
  std::string strategy;  // "lint" | "assertion"

  size_t assets_identified = 0;   // includes entries dropped at validation
  size_t assertions_formed = 0;
  std::vector<LintViolation> violations;
  std::vector<FalsifiedProperty> falsified;
  size_t not_falsified = 0;
  size_t unsupported = 0;
  std::vector<PopulatedAssertion> all_assertions;  // for --emit-sva

  std::vector<Finding> findings;
  size_t flagged = 0;
  size_t removed_in_contextualization = 0;

  std::string asset_prompt_digest;
  std::string context_prompt_digest;
  Diagnostics diagnostics;
  std::map<std::string, double> timings_ms;
  std::string error;  // nonempty when this unit failed; scan continues

  size_t sa_output_count() const {
    return strategy == "lint" ? violations.size() : falsified.size();
  }
};

struct ScanReport {
  std::string config_digest;
  std::string generated_at;  // empty under --deterministic
  Variation variation = Variation::V0;
  std::vector<UnitReport> units;
  Diagnostics file_diagnostics;  // parse-stage diagnostics per manifest file
};

// ---------------------------------------------------------------------------
// Strategy dispatch

/// 1191/1300 lint, 1231/1233/1244 assertions; anything else is an error.
inline Strategy dispatch_strategy(CweId cwe) {
  if (is_lint_cwe(cwe)) return Strategy::Lint;
  if (is_assertion_cwe(cwe)) return Strategy::Assertion;
  std::string supported;
  for (CweId c : supported_cwes()) supported += " " + std::to_string(c);
  throw std::invalid_argument("unsupported CWE " + std::to_string(cwe) +
                              "; supported:" + supported);
}

// ---------------------------------------------------------------------------
// Manifest

/// One path per line; blank lines and '#' comments ignored; paths resolve
/// relative to the manifest's directory.
inline std::vector<std::string> read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest " + path);
  std::filesystem::path base = std::filesystem::path(path).parent_path();
  std::vector<std::string> files;
  std::string line;
  while (std::getline(in, line)) {
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    size_t b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    size_t e = line.find_last_not_of(" \t\r");
    std::string entry = line.substr(b, e - b + 1);
    std::filesystem::path p(entry);
    files.push_back(p.is_absolute() ? p.string() : (base / p).string());
  }
  return files;
}

namespace pipeline_detail {

struct ParsedFile {
  std::string path;
  std::string text;
  std::vector<DesignUnit> units;
};

inline nlohmann::json violation_json(const LintViolation& v) {
  nlohmann::json j;
  j["id"] = v.id;
  j["check"] = to_string(v.check);
  j["cwe"] = v.cwe;
  j["line_no"] = v.line_no;
  j["statement"] = v.statement;
  j["lhsexpr"] = v.lhsexpr;
  j["security_sensitive_signal"] = v.security_sensitive_signal;
  j["module"] = v.module;
  j["span"] = {{"file", v.span.file},
               {"line_start", v.span.line_start},
               {"line_end", v.span.line_end},
               {"col_start", v.span.col_start},
               {"col_end", v.span.col_end}};
  return j;
}

inline nlohmann::json trace_json(const Trace& trace) {
  nlohmann::json cycles = nlohmann::json::array();
  for (const auto& c : trace.cycles) {
    nlohmann::json jc;
    jc["inputs"] = c.inputs;
    jc["state"] = c.state;
    cycles.push_back(std::move(jc));
  }
  return {{"cycles", cycles}, {"violation_cycle", trace.violation_cycle}};
}

inline nlohmann::json falsified_json(const FalsifiedProperty& f) {
  nlohmann::json j;
  j["id"] = f.assertion.id;
  j["cwe"] = f.assertion.cwe;
  j["property"] = f.assertion.sva_text;
  j["module"] = f.assertion.target_module;
  j["mode"] = f.result.mode;
  j["depth"] = f.result.depth;
  j["trace"] = trace_json(f.result.trace);
  return j;
}

// Serialized static-analysis outputs embedded in contextualization prompts.
inline nlohmann::json sa_outputs_json(const UnitReport& unit) {
  nlohmann::json arr = nlohmann::json::array();
  if (unit.strategy == "lint") {
    for (const auto& v : unit.violations) {
      nlohmann::json j;
      j["id"] = v.id;
      j["check"] = to_string(v.check);
      j["line_no"] = v.line_no;
      j["statement"] = v.statement;
      j["lhsexpr"] = v.lhsexpr;
      j["security_sensitive_signal"] = v.security_sensitive_signal;
      arr.push_back(std::move(j));
    }
  } else {
    for (const auto& f : unit.falsified) {
      nlohmann::json j;
      j["id"] = f.assertion.id;
      j["property"] = f.assertion.sva_text;
      j["module"] = f.assertion.target_module;
      arr.push_back(std::move(j));
    }
  }
  return arr;
}

struct StageTimer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double stop() const {
    auto end = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(end - start).count();
  }
};

inline size_t count_diag(const Diagnostics& diags, std::string_view code) {
  size_t n = 0;
  for (const auto& d : diags)
    if (d.code == code) ++n;
  return n;
}

inline void process_unit(UnitReport& unit, const DesignUnit& design,
                         std::string_view file_text, const std::string& rtl,
                         const ScanConfig& config, const CweCatalog& catalog,
                         Provider& provider) {
  Strategy strategy = dispatch_strategy(unit.cwe);
  unit.strategy = strategy == Strategy::Lint ? "lint" : "assertion";

  // 1) Asset identification
  StageTimer asset_timer;
  PromptBundle asset_bundle =
      build_asset_prompt(unit.cwe, config.variation, rtl, catalog);
  unit.asset_prompt_digest = request_digest(asset_bundle, provider.config().model);
  nlohmann::json asset_response = provider.complete(asset_bundle);
  size_t diags_before = unit.diagnostics.size();
  AssetSet assets = parse_asset_response(unit.cwe, asset_response, unit.diagnostics);
  size_t dropped = count_diag(
      Diagnostics(unit.diagnostics.begin() + static_cast<long>(diags_before),
                  unit.diagnostics.end()),
      "asset-dropped");
  unit.assets_identified = assets.entry_count() + dropped;
  unit.timings_ms["asset_identification"] = asset_timer.stop();

  // 2) Static analysis
  StageTimer sa_timer;
  if (strategy == Strategy::Lint) {
    std::vector<UnitSource> sources = {{&design, file_text}};
    unit.violations =
        run_lint_strategy(unit.cwe, sources, assets, unit.diagnostics);
  } else {
    unit.all_assertions =
        populate_assertions(unit.cwe, assets, design, unit.diagnostics);
    unit.assertions_formed = unit.all_assertions.size();
    if (!unit.all_assertions.empty()) {
      auto elaborated = elaborate(design);
      if (auto* err = std::get_if<ElaborationError>(&elaborated)) {
        add_diag(unit.diagnostics, Severity::Warning, "unsupported-design",
                 "module '" + design.name +
                     "' cannot be checked: " + err->reason);
        unit.unsupported = unit.all_assertions.size();
      } else {
        const SimModel& model = std::get<SimModel>(elaborated);
        for (const auto& assertion : unit.all_assertions) {
          PropertyResult result =
              check_property(model, assertion, config.checker);
          switch (result.status) {
            case PropertyStatus::Falsified:
              unit.falsified.push_back({assertion, std::move(result)});
              break;
            case PropertyStatus::NotFalsified:
              ++unit.not_falsified;
              break;
            case PropertyStatus::Unsupported:
              ++unit.unsupported;
              add_diag(unit.diagnostics, Severity::Warning,
                       "unsupported-property",
                       "assertion " + assertion.id + ": " + result.reason);
              break;
          }
        }
      }
    }
  }
  unit.timings_ms["static_analysis"] = sa_timer.stop();

  // 3) Contextualization (skipped when static analysis found nothing)
  StageTimer context_timer;
  if (unit.sa_output_count() > 0) {
    nlohmann::json sa_json = sa_outputs_json(unit);
    std::set<std::string> sa_ids;
    for (const auto& item : sa_json) sa_ids.insert(item.at("id").get<std::string>());

    PromptBundle context_bundle = build_contextualization_prompt(
        unit.cwe, config.variation, rtl, sa_json, strategy, catalog);
    nlohmann::json first_response = provider.complete(context_bundle);
    nlohmann::json final_response = first_response;
    PromptBundle final_bundle = context_bundle;
    if (uses_rethink(config.variation)) {
      PromptBundle rethink = build_rethink_prompt(
          context_bundle, first_response.dump(), sa_json, strategy);
      final_response = provider.complete(rethink);
      final_bundle = rethink;
    }
    unit.context_prompt_digest =
        request_digest(final_bundle, provider.config().model);
    unit.findings = parse_context_response(unit.cwe, config.variation,
                                           final_response, sa_ids,
                                           unit.diagnostics);
    for (auto& f : unit.findings) {
      f.provenance.asset_prompt_digest = unit.asset_prompt_digest;
      f.provenance.context_prompt_digest = unit.context_prompt_digest;
      f.provenance.provider =
          provider.config().kind == ProviderKind::Http ? "http" : "replay";
      f.provenance.model = provider.config().model;
    }
  }
  unit.timings_ms["contextualization"] = context_timer.stop();

  for (const auto& f : unit.findings)
    if (f.insecure) ++unit.flagged;
  unit.removed_in_contextualization = unit.sa_output_count() - unit.flagged;
}

}  // namespace pipeline_detail

// ---------------------------------------------------------------------------
// Scan driver

/// Run the full pipeline over the manifest's modules for every configured
/// CWE. Per-unit failures are recorded in that unit's report entry; the scan
/// itself keeps going.
inline ScanReport run_scan(const ScanConfig& config,
                           std::shared_ptr<HttpTransport> transport = nullptr) {
  ScanReport report;
  report.config_digest = config_digest(config);
  report.variation = config.variation;
  if (!config.deterministic) {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%FT%TZ", std::gmtime(&t));
    report.generated_at = buf;
  }

  for (CweId cwe : config.cwes) dispatch_strategy(cwe);  // validate up front

  CweCatalog catalog = CweCatalog::builtin();
  if (!config.cwe_data_dir.empty()) catalog.load_dir(config.cwe_data_dir);

  std::vector<pipeline_detail::ParsedFile> files;
  for (const auto& path : read_manifest(config.manifest_path)) {
    pipeline_detail::ParsedFile pf;
    pf.path = path;
    std::ifstream in(path, std::ios::binary);
    if (!in) {
      add_diag(report.file_diagnostics, Severity::Error, "missing-file",
               "cannot open '" + path + "'");
      continue;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    pf.text = ss.str();
    ParseResult parsed = parse_source(pf.text, path);
    pf.units = std::move(parsed.units);
    for (auto& d : parsed.diags) report.file_diagnostics.push_back(std::move(d));
    files.push_back(std::move(pf));
  }

  auto store = std::make_shared<FixtureStore>(
      config.provider.fixture_path.empty() ? "fixtures"
                                           : config.provider.fixture_path);

  struct WorkItem {
    CweId cwe;
    const pipeline_detail::ParsedFile* file;
    const DesignUnit* unit;
  };
  std::vector<WorkItem> work;
  for (CweId cwe : config.cwes)
    for (const auto& pf : files)
      for (const auto& unit : pf.units) work.push_back({cwe, &pf, &unit});

  std::vector<UnitReport> results(work.size());
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    Provider provider(config.provider, store,
                      transport);  // provider per worker; store is shared
    for (;;) {
      size_t i = next.fetch_add(1);
      if (i >= work.size()) return;
      const WorkItem& item = work[i];
      UnitReport& unit = results[i];
      unit.cwe = item.cwe;
      unit.module = item.unit->name;
      unit.file = item.file->path;
      const std::string rtl = config.context == ContextGranularity::PerModule
                                  ? item.unit->source
                                  : item.file->text;
      try {
        pipeline_detail::process_unit(unit, *item.unit, item.file->text, rtl,
                                      config, catalog, provider);
      } catch (const std::exception& e) {
        unit.error = e.what();
      }
    }
  };
  int jobs = std::max(1, config.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::stable_sort(results.begin(), results.end(),
                   [](const UnitReport& a, const UnitReport& b) {
                     if (a.cwe != b.cwe) return a.cwe < b.cwe;
                     if (a.file != b.file) return a.file < b.file;
                     return a.module < b.module;
                   });
  report.units = std::move(results);
  return report;
}

// ---------------------------------------------------------------------------
// Report serialization

inline nlohmann::json report_json(const ScanReport& report,
                                  bool deterministic) {
  nlohmann::json j;
  j["schema_version"] = std::string(kReportSchemaVersion);
  j["tool"] = {{"name", std::string(kToolName)},
               {"version", std::string(kToolVersion)}};
  j["config_digest"] = report.config_digest;
  if (!deterministic) j["generated_at"] = report.generated_at;
  j["variation"] = to_string(report.variation);

  nlohmann::json units = nlohmann::json::array();
  for (const auto& unit : report.units) {
    nlohmann::json ju;
    ju["cwe"] = unit.cwe;
    ju["module"] = unit.module;
    ju["file"] = unit.file;
    ju["strategy"] = unit.strategy;
    ju["assets_identified"] = unit.assets_identified;
    ju["assertions_formed"] = unit.assertions_formed;
    ju["static_analysis_outputs"] = unit.sa_output_count();
    ju["flagged"] = unit.flagged;
    ju["removed_in_contextualization"] = unit.removed_in_contextualization;
    ju["not_falsified"] = unit.not_falsified;
    ju["unsupported"] = unit.unsupported;

    nlohmann::json violations = nlohmann::json::array();
    for (const auto& v : unit.violations)
      violations.push_back(pipeline_detail::violation_json(v));
    ju["violations"] = violations;

    nlohmann::json falsified = nlohmann::json::array();
    for (const auto& f : unit.falsified)
      falsified.push_back(pipeline_detail::falsified_json(f));
    ju["falsified_properties"] = falsified;

    nlohmann::json findings = nlohmann::json::array();
    for (const auto& f : unit.findings) {
      nlohmann::json jf;
      jf["id"] = f.id;
      jf["cwe"] = f.cwe;
      jf["source"] = f.source;
      jf["insecure"] = f.insecure;
      jf["explanation"] = f.explanation;
      jf["variation"] = to_string(f.variation);
      jf["provenance"] = {
          {"asset_prompt_digest", f.provenance.asset_prompt_digest},
          {"context_prompt_digest", f.provenance.context_prompt_digest},
          {"provider", f.provenance.provider},
          {"model", f.provenance.model}};
      findings.push_back(std::move(jf));
    }
    ju["findings"] = findings;

    nlohmann::json diags = nlohmann::json::array();
    for (const auto& d : unit.diagnostics) diags.push_back(d.to_string());
    ju["diagnostics"] = diags;

    if (deterministic) {
      ju["timings_ms"] = nlohmann::json::object();
    } else {
      ju["timings_ms"] = unit.timings_ms;
    }
    if (!unit.error.empty()) ju["error"] = unit.error;
    units.push_back(std::move(ju));
  }
  j["units"] = units;

  nlohmann::json file_diags = nlohmann::json::array();
  for (const auto& d : report.file_diagnostics)
    file_diags.push_back(d.to_string());
  j["file_diagnostics"] = file_diags;

  size_t assets = 0, assertions = 0, outputs = 0, flagged = 0, removed = 0;
  for (const auto& unit : report.units) {
    assets += unit.assets_identified;
    assertions += unit.assertions_formed;
    outputs += unit.sa_output_count();
    flagged += unit.flagged;
    removed += unit.removed_in_contextualization;
  }
  j["totals"] = {{"assets_identified", assets},
                 {"assertions_formed", assertions},
                 {"static_analysis_outputs", outputs},
                 {"flagged", flagged},
                 {"removed_in_contextualization", removed}};
  return j;
}

inline std::string report_text_summary(const ScanReport& report) {
  std::string out;
  out += "cwe   module                       strategy   assets  asserts  "
         "outputs  flagged  removed\n";
  char line[160];
  size_t t_assets = 0, t_asserts = 0, t_outputs = 0, t_flagged = 0, t_removed = 0;
  for (const auto& u : report.units) {
    std::snprintf(line, sizeof(line), "%-5d %-28s %-10s %6zu %8zu %8zu %8zu %8zu\n",
                  u.cwe, u.module.c_str(), u.strategy.c_str(),
                  u.assets_identified, u.assertions_formed, u.sa_output_count(),
                  u.flagged, u.removed_in_contextualization);
    out += line;
    t_assets += u.assets_identified;
    t_asserts += u.assertions_formed;
    t_outputs += u.sa_output_count();
    t_flagged += u.flagged;
    t_removed += u.removed_in_contextualization;
  }
  std::snprintf(line, sizeof(line), "%-5s %-28s %-10s %6zu %8zu %8zu %8zu %8zu\n",
                "all", "(total)", "", t_assets, t_asserts, t_outputs, t_flagged,
                t_removed);
  out += line;
  return out;
}

// Atomic write: the report file is either the old version or the new one.
inline void write_file_atomic(const std::string& path, const std::string& data) {
  namespace fs = std::filesystem;
  fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << data;
  }
  fs::rename(tmp, path);
}

/// Write report.json (versioned schema) and summary.txt under out_dir.
inline void write_report(const ScanReport& report, const std::string& out_dir,
                         bool deterministic) {
  write_file_atomic(out_dir + "/report.json",
                    report_json(report, deterministic).dump(2) + "\n");
  write_file_atomic(out_dir + "/summary.txt", report_text_summary(report));
}

}  // namespace rtlscan
