#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <map>

#include <nlohmann/json.hpp>

#include "rtlscan/lint.hpp"
#include "support/testdata.hpp"

using namespace rtlscan;

namespace {

AssetSet lint_assets(CweId cwe, std::vector<std::string> names) {
  AssetSet a;
  a.cwe = cwe;
  a.signals = std::move(names);
  return a;
}

std::vector<RawHit> run_all_checks(const DesignUnit& unit,
                                   std::string_view source) {
  std::vector<RawHit> all;
  for (CweId cwe : {1191, 1300}) {
    for (CheckId check : checks_for_cwe(cwe)) {
      auto hits = run_check(check, unit, source);
      all.insert(all.end(), hits.begin(), hits.end());
    }
  }
  return all;
}

struct Corpus {
  // module name -> (unit, file source)
  std::map<std::string, std::pair<DesignUnit, std::string>> modules;
  nlohmann::json labels;

  Corpus() {
    labels = nlohmann::json::parse(
        testsupport::read_file(testsupport::testdata_path("lint_corpus/labels.json")));
    for (auto& [file, mods] : labels.items()) {
      (void)mods;
      std::string source =
          testsupport::read_file(testsupport::testdata_path("lint_corpus/" + file));
      ParseResult r = parse_source(source, file);
      for (auto& u : r.units) modules[u.name] = {u, source};
    }
  }
};

}  // namespace

TEST_CASE("lint corpus: 100% agreement with hand labels") {
  Corpus corpus;
  size_t total = 0;
  for (auto& [file, mods] : corpus.labels.items()) {
    for (auto& [module_name, expected_json] : mods.items()) {
      ++total;
      INFO(file << " / " << module_name);
      REQUIRE(corpus.modules.count(module_name) == 1);
      const auto& [unit, source] = corpus.modules.at(module_name);
      std::vector<std::string> got;
      for (const auto& hit : run_all_checks(unit, source))
        got.push_back(to_string(hit.check));
      std::vector<std::string> expected =
          expected_json.get<std::vector<std::string>>();
      std::sort(got.begin(), got.end());
      std::sort(expected.begin(), expected.end());
      CHECK(got == expected);
    }
  }
  CHECK(total >= 40);
}

TEST_CASE("check/cwe mapping is a partition") {
  CHECK(checks_for_cwe(1191).size() == 6);
  CHECK(checks_for_cwe(1300).size() == 2);
  for (CheckId c : checks_for_cwe(1191)) CHECK(cwe_of_check(c) == 1191);
  for (CheckId c : checks_for_cwe(1300)) CHECK(cwe_of_check(c) == 1300);
}

TEST_CASE("rhs-has-concat on the password-path module") {
  std::string source =
      testsupport::read_file(testsupport::testdata_path("rtl/hmac_passctrl.v"));
  ParseResult r = parse_source(source, "hmac_passctrl.v");
  REQUIRE(r.units.size() == 1);
  const DesignUnit& unit = r.units[0];

  auto hits = run_check(CheckId::RhsHasConcat, unit, source);
  REQUIRE(hits.size() == 1);
  CHECK(hits[0].statement.find("pass_data = {{60{8'h00}}, data_d}") !=
        std::string::npos);
  CHECK(hits[0].lhsexpr == "pass_data");
  REQUIRE_FALSE(hits[0].signals.empty());
  CHECK(hits[0].signals[0] == "pass_data");

  // No other CWE-1191 check fires on this module.
  for (CheckId check : checks_for_cwe(1191)) {
    if (check == CheckId::RhsHasConcat) continue;
    INFO(to_string(check));
    CHECK(run_check(check, unit, source).empty());
  }
}

TEST_CASE("any check on an empty module yields nothing") {
  ParseResult r = parse_source("module m; endmodule", "m.v");
  REQUIRE(r.units.size() == 1);
  for (CweId cwe : {1191, 1300})
    for (CheckId check : checks_for_cwe(cwe))
      CHECK(run_check(check, r.units[0], "module m; endmodule").empty());
}

TEST_CASE("inferred latch appears and disappears with the else branch") {
  {
    ParseResult r = parse_source(
        "module m (input sel, input a, output reg y); always @* if (sel) y = "
        "a; endmodule",
        "m.v");
    auto hits = run_check(CheckId::InferredLatch, r.units[0], "");
    REQUIRE(hits.size() == 1);
    CHECK(hits[0].lhsexpr == "y");
  }
  {
    ParseResult r = parse_source(
        "module m (input sel, input a, input b, output reg y); always @* if "
        "(sel) y = a; else y = b; endmodule",
        "m.v");
    CHECK(run_check(CheckId::InferredLatch, r.units[0], "").empty());
  }
}

TEST_CASE("filter_by_assets") {
  std::string source =
      testsupport::read_file(testsupport::testdata_path("rtl/hmac_passctrl.v"));
  ParseResult r = parse_source(source, "hmac_passctrl.v");
  const DesignUnit& unit = r.units[0];
  auto hits = run_check(CheckId::RhsHasConcat, unit, source);
  REQUIRE(hits.size() == 1);

  SECTION("asset intersection keeps the hit and names the matched asset") {
    Diagnostics diags;
    auto violations = filter_by_assets(
        hits,
        lint_assets(1191, {"pass_data", "pass_hash", "exp_hash", "hmac_ready",
                           "data_d"}),
        unit, diags);
    REQUIRE(violations.size() == 1);
    CHECK(violations[0].security_sensitive_signal == "pass_data");
    CHECK(violations[0].cwe == 1191);
    CHECK(violations[0].module == "hmac_passctrl");
    CHECK(violations[0].statement.find("pass_data") != std::string::npos);
  }

  SECTION("empty asset set drops everything with a warning") {
    Diagnostics diags;
    auto violations = filter_by_assets(hits, lint_assets(1191, {}), unit, diags);
    CHECK(violations.empty());
    REQUIRE_FALSE(diags.empty());
    CHECK(diags[0].code == "empty-assets");
  }

  SECTION("tie broken by first textual occurrence") {
    // hit references {pass_data, data_d}; assets contain only data_d
    Diagnostics diags;
    auto violations =
        filter_by_assets(hits, lint_assets(1191, {"data_d"}), unit, diags);
    REQUIRE(violations.size() == 1);
    CHECK(violations[0].security_sensitive_signal == "data_d");
  }
}

TEST_CASE("filter intersection is set intersection (property)") {
  // hit referencing {a,b} against assets {b,c} keeps b
  RawHit hit;
  hit.check = CheckId::RhsHasConcat;
  hit.signals = {"a", "b"};
  hit.statement = "a = {b, b};";
  hit.lhsexpr = "a";
  DesignUnit unit;
  unit.name = "m";
  Diagnostics diags;
  auto violations =
      filter_by_assets({hit}, lint_assets(1191, {"b", "c"}), unit, diags);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].security_sensitive_signal == "b");

  auto none = filter_by_assets({hit}, lint_assets(1191, {"z"}), unit, diags);
  CHECK(none.empty());
}

TEST_CASE("run_lint_strategy") {
  std::string source =
      testsupport::read_file(testsupport::testdata_path("rtl/hmac_passctrl.v"));
  ParseResult r = parse_source(source, "hmac_passctrl.v");
  std::vector<UnitSource> units = {{&r.units[0], source}};
  AssetSet assets = lint_assets(
      1191, {"pass_data", "pass_hash", "exp_hash", "hmac_ready", "data_d"});

  SECTION("1191 on the password module gives exactly the concat violation") {
    Diagnostics diags;
    auto violations = run_lint_strategy(1191, units, assets, diags);
    REQUIRE(violations.size() == 1);
    CHECK(violations[0].check == CheckId::RhsHasConcat);
    CHECK(violations[0].lhsexpr == "pass_data");
    CHECK(violations[0].security_sensitive_signal == "pass_data");
  }

  SECTION("assertion-strategy cwe is a contract violation") {
    Diagnostics diags;
    CHECK_THROWS_AS(run_lint_strategy(1233, units, assets, diags),
                    std::invalid_argument);
  }

  SECTION("determinism: identical inputs give identical ordered lists") {
    Diagnostics d1, d2;
    auto a = run_lint_strategy(1191, units, assets, d1);
    auto b = run_lint_strategy(1191, units, assets, d2);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].id == b[i].id);
      CHECK(a[i].statement == b[i].statement);
    }
  }
}

TEST_CASE("1300 strategy on covered vs uncovered conditionals") {
  {
    ParseResult r = parse_source(
        "module m (input key_bit, input x, output reg out); always @* if "
        "(key_bit) out = x; else out = 1'b0; endmodule",
        "m.v");
    std::vector<UnitSource> units = {{&r.units[0], ""}};
    Diagnostics diags;
    auto v = run_lint_strategy(1300, units, lint_assets(1300, {"key_bit"}), diags);
    CHECK(v.empty());
  }
  {
    std::string src =
        "module m (input clk, input key_bit, input x, output reg out); always "
        "@(posedge clk) if (key_bit) out <= x; endmodule";
    ParseResult r = parse_source(src, "m.v");
    std::vector<UnitSource> units = {{&r.units[0], src}};
    Diagnostics diags;
    auto v = run_lint_strategy(1300, units, lint_assets(1300, {"key_bit"}), diags);
    REQUIRE(v.size() == 1);
    CHECK(v[0].check == CheckId::IfWithoutElse);
    CHECK(v[0].security_sensitive_signal == "key_bit");
  }
}

TEST_CASE("violation ids are stable and distinct per check") {
  RawHit h1, h2;
  h1.check = CheckId::IfWithoutElse;
  h2.check = CheckId::InferredLatch;
  h1.signals = h2.signals = {"sel"};
  h1.statement = h2.statement = "if (sel) y = a;";
  h1.lhsexpr = h2.lhsexpr = "sel";
  DesignUnit unit;
  unit.name = "m";
  Diagnostics diags;
  auto v = filter_by_assets({h1, h2}, lint_assets(1300, {"sel"}), unit, diags);
  REQUIRE(v.size() == 2);
  CHECK(v[0].id != v[1].id);
  auto again = filter_by_assets({h1, h2}, lint_assets(1300, {"sel"}), unit, diags);
  CHECK(again[0].id == v[0].id);
}

TEST_CASE("check independence on the corpus") {
  // Each check's hits are a pure function of the unit; running checks in any
  // combination or order never changes another check's results.
  Corpus corpus;
  for (const auto& [name, pair] : corpus.modules) {
    const auto& [unit, source] = pair;
    INFO(name);
    for (CweId cwe : {1191, 1300}) {
      for (CheckId check : checks_for_cwe(cwe)) {
        auto alone = run_check(check, unit, source);
        run_check(CheckId::RhsHasConcat, unit, source);  // interleave another
        auto after = run_check(check, unit, source);
        REQUIRE(alone.size() == after.size());
        for (size_t i = 0; i < alone.size(); ++i)
          CHECK(alone[i].statement == after[i].statement);
      }
    }
  }
}

TEST_CASE("latch hits cover un-elsed combinational assignments (cross-check)") {
  // For every @* if-without-else whose branch assigns a signal the block does
  // not otherwise cover, an InferredLatch hit for that signal must exist.
  Corpus corpus;
  for (const auto& [name, pair] : corpus.modules) {
    const auto& [unit, source] = pair;
    INFO(name);
    auto latch_hits = run_check(CheckId::InferredLatch, unit, source);
    for (const auto& b : unit.always_blocks) {
      if (!b.sensitivity.combinational()) continue;
      std::set<std::string> covered;
      rtlscan::detail::must_assigned(*b.body, covered);
      std::vector<const Stmt*> ifs;
      rtlscan::detail::gather_ifs(*b.body, ifs);
      for (const Stmt* s : ifs) {
        if (s->else_branch) continue;
        std::vector<std::string> assigned;
        rtlscan::detail::any_assigned(*s->then_branch, assigned);
        for (const auto& sig : assigned) {
          if (covered.count(sig)) continue;
          bool found = false;
          for (const auto& hit : latch_hits)
            if (hit.lhsexpr == sig) found = true;
          CHECK(found);
        }
      }
    }
  }
}
