#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rtlscan/assets.hpp"

namespace rtlscan {

// One evaluation row. Precision/FDR are undefined when nothing was flagged.
struct MetricsRow {
  CweId cwe = 0;              // 0 = grand total
  std::string variation;      // "v0".."v3" or "all"
  size_t flagged = 0;
  size_t tps = 0;
  std::optional<double> precision;
  std::optional<double> fdr;
};

struct MetricsTable {
  std::vector<MetricsRow> rows;
  std::vector<std::string> warnings;  // unlabeled findings excluded
};

inline MetricsRow make_metrics_row(CweId cwe, std::string variation,
                                   size_t flagged, size_t tps) {
  MetricsRow row;
  row.cwe = cwe;
  row.variation = std::move(variation);
  row.flagged = flagged;
  row.tps = tps;
  if (flagged > 0) {
    row.precision = static_cast<double>(tps) / static_cast<double>(flagged);
    row.fdr = 1.0 - *row.precision;
  }
  return row;
}

// Two-decimal display, rounding halves away from zero (so 0.125 -> 0.13).
inline std::string format_metric(const std::optional<double>& value) {
  if (!value) return "–";  // en dash for undefined
  double rounded = std::round(*value * 100.0) / 100.0;
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%.2f", rounded);
  return buf;
}

/// Compute per-(cwe, variation) precision/FDR from a scan report and a labels
/// file mapping finding id -> true/false positive. Flagged findings without
/// a label are excluded with a warning; adjudication stays external.
inline MetricsTable compute_metrics(const nlohmann::json& report,
                                    const nlohmann::json& labels_doc) {
  const nlohmann::json& labels =
      labels_doc.contains("labels") ? labels_doc.at("labels") : labels_doc;

  struct Bucket {
    size_t flagged = 0;
    size_t tps = 0;
  };
  std::map<std::pair<CweId, std::string>, Bucket> buckets;
  MetricsTable table;

  for (const auto& unit : report.value("units", nlohmann::json::array())) {
    CweId cwe = unit.value("cwe", 0);
    for (const auto& finding : unit.value("findings", nlohmann::json::array())) {
      if (!finding.value("insecure", false)) continue;
      std::string id = finding.value("id", "");
      std::string variation = finding.value("variation", "v0");
      if (!labels.contains(id) || !labels.at(id).is_boolean()) {
        table.warnings.push_back("finding " + id +
                                 " is unlabeled; excluded from metrics");
        continue;
      }
      Bucket& b = buckets[{cwe, variation}];
      ++b.flagged;
      if (labels.at(id).get<bool>()) ++b.tps;
    }
  }

  std::map<CweId, Bucket> cwe_totals;
  Bucket grand;
  for (const auto& [key, b] : buckets) {
    table.rows.push_back(make_metrics_row(key.first, key.second, b.flagged, b.tps));
    cwe_totals[key.first].flagged += b.flagged;
    cwe_totals[key.first].tps += b.tps;
    grand.flagged += b.flagged;
    grand.tps += b.tps;
  }
  for (const auto& [cwe, b] : cwe_totals)
    table.rows.push_back(make_metrics_row(cwe, "all", b.flagged, b.tps));
  table.rows.push_back(make_metrics_row(0, "all", grand.flagged, grand.tps));
  return table;
}

/// Plain-text rendering in the evaluation-table column layout.
inline std::string render_metrics_text(const MetricsTable& table) {
  std::string out = "CWE    Variation  Flagged  TPs  Precision  FDR\n";
  char line[96];
  for (const auto& row : table.rows) {
    std::string cwe = row.cwe == 0 ? "total" : std::to_string(row.cwe);
    std::snprintf(line, sizeof(line), "%-6s %-10s %7zu %4zu %10s %4s\n",
                  cwe.c_str(), row.variation.c_str(), row.flagged, row.tps,
                  format_metric(row.precision).c_str(),
                  format_metric(row.fdr).c_str());
    out += line;
  }
  for (const auto& w : table.warnings) out += "warning: " + w + "\n";
  return out;
}

}  // namespace rtlscan
