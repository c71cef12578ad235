#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "rtlscan/assertions.hpp"
#include "support/testdata.hpp"

using namespace rtlscan;

namespace {

std::string normalize_ws(std::string_view text) {
  std::string out;
  bool in_ws = false;
  for (char c : text) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      in_ws = true;
      continue;
    }
    if (in_ws && !out.empty()) out.push_back(' ');
    in_ws = false;
    out.push_back(c);
  }
  return out;
}

DesignUnit parse_unit(std::string_view src) {
  ParseResult r = parse_source(src, "unit.v");
  REQUIRE(r.units.size() == 1);
  return r.units[0];
}

// Units declaring every signal the golden bindings reference.
const char* kLockUnit = R"(
module locks (input clk_i, input clk_sys, input rst_ni, input wr_en,
              input jtag_unlock, input soft_rst);
  reg lock_q;
  reg [7:0] reglk_mem [0:5];
  reg cfg_lock;
endmodule
)";

const char* kDmaUnit = R"(
module dma (input clk_i, input clk_core, input rst_ni, input rst_8,
            input rst_n, input [7:0] reglk_ctrl_i, input [3:0] lock_bits);
  reg [31:0] start_reg;
  reg core_lock_reg;
  reg [31:0] dma_cfg;
endmodule
)";

const char* kPrivUnit = R"(
module priv (input clk_i, input clk, input rst_ni, input rst, input rst_n,
             input debug_en, input unlock_key, input jtag_auth,
             input esc_req, input esc_ack, input scan_mode);
  reg [1:0] priv_lvl;
  reg [1:0] priv_lvl_q;
  reg dbg_mode;
  reg dbg_mode_q;
  reg [1:0] mode_reg;
  reg [1:0] mode_q;
endmodule
)";

AssetSet golden_1231_assets() {
  AssetSet a;
  a.cwe = 1231;
  a.locks = {
      {"lock_q", "(rst_ni && wr_en)", "clk_i", ClkSense::Posedge},
      {"reglk_mem[0]", "rst_ni && ~jtag_unlock", "clk_i", ClkSense::Posedge},
      {"cfg_lock", "wr_en || soft_rst", "clk_sys", ClkSense::Negedge},
  };
  return a;
}

AssetSet golden_1233_assets() {
  AssetSet a;
  a.cwe = 1233;
  a.pairs = {{"reglk_ctrl_i[7]", "core_lock_reg"},
             {"reglk_ctrl_i[0]", "start_reg"}};
  a.reset_conditions = "~(rst_ni && ~rst_8)";
  a.clk = "clk_i";
  a.clk_sense = ClkSense::Posedge;
  return a;
}

AssetSet golden_1233_assets_b() {
  AssetSet a;
  a.cwe = 1233;
  a.pairs = {{"lock_bits[3]", "dma_cfg"}};
  a.reset_conditions = "!rst_n";
  a.clk = "clk_core";
  a.clk_sense = ClkSense::Posedge;
  return a;
}

AssetSet golden_1244_assets() {
  AssetSet a;
  a.cwe = 1244;
  a.privileges = {
      {"priv_lvl", "debug_en && unlock_key", "~rst_ni", "2'b11", "priv_lvl_q",
       "clk_i", ClkSense::Posedge},
      {"dbg_mode", "jtag_auth", "rst", "1'b1", "dbg_mode_q", "clk",
       ClkSense::Posedge},
      {"mode_reg[1:0]", "esc_req && esc_ack", "~rst_n || scan_mode", "2'h3",
       "mode_q", "clk", ClkSense::Posedge},
  };
  return a;
}

}  // namespace

TEST_CASE("1233 population reproduces the known falsified property text") {
  DesignUnit unit = parse_unit(kDmaUnit);
  Diagnostics diags;
  auto assertions = populate_assertions(1233, golden_1233_assets(), unit, diags);
  REQUIRE(assertions.size() == 2);
  CHECK(normalize_ws(assertions[0].sva_text) ==
        normalize_ws("@(posedge clk_i) disable iff (~(rst_ni && ~rst_8)) "
                     "reglk_ctrl_i[7] == '1 |=> $stable(core_lock_reg);"));
  CHECK(diags.empty());
}

TEST_CASE("empty asset set populates nothing") {
  DesignUnit unit = parse_unit(kDmaUnit);
  Diagnostics diags;
  for (CweId cwe : {1231, 1233, 1244}) {
    AssetSet empty;
    empty.cwe = cwe;
    CHECK(populate_assertions(cwe, empty, unit, diags).empty());
  }
}

TEST_CASE("1231 antecedent is the negated legal-modification condition") {
  DesignUnit unit = parse_unit(kLockUnit);
  AssetSet a;
  a.cwe = 1231;
  a.locks = {{"lock_q", "(rst_ni && wr_en)", "clk_i", ClkSense::Posedge}};
  Diagnostics diags;
  auto assertions = populate_assertions(1231, a, unit, diags);
  REQUIRE(assertions.size() == 1);
  CHECK(assertions[0].fields.at("CONDITIONS_FOR_STABLE_LOCK") ==
        "~((rst_ni && wr_en))");
}

TEST_CASE("template rendering matches golden files") {
  struct Golden {
    CweId cwe;
    const char* unit_src;
    AssetSet assets;
    const char* golden_file;
  };
  std::vector<Golden> goldens = {
      {1231, kLockUnit, golden_1231_assets(), "goldens/sva_1231.golden"},
      {1233, kDmaUnit, golden_1233_assets(), "goldens/sva_1233.golden"},
      {1244, kPrivUnit, golden_1244_assets(), "goldens/sva_1244.golden"},
  };
  size_t total_bindings = 0;
  for (auto& g : goldens) {
    DesignUnit unit = parse_unit(g.unit_src);
    Diagnostics diags;
    auto assertions = populate_assertions(g.cwe, g.assets, unit, diags);
    CHECK(diags.empty());
    std::string rendered;
    for (const auto& a : assertions) rendered += a.sva_text + "\n";
    if (g.cwe == 1233) {
      // third 1233 binding uses the other clock/reset naming scheme
      auto more = populate_assertions(1233, golden_1233_assets_b(), unit, diags);
      REQUIRE(more.size() == 1);
      rendered += more[0].sva_text + "\n";
      total_bindings += 1;
    }
    total_bindings += assertions.size();
    std::string golden = testsupport::read_file(testsupport::testdata_path(g.golden_file));
    INFO("cwe " << g.cwe);
    CHECK(normalize_ws(rendered) == normalize_ws(golden));
  }
  CHECK(total_bindings >= 9);
}

TEST_CASE("population count deficit equals formation failures") {
  DesignUnit unit = parse_unit(kDmaUnit);
  AssetSet a = golden_1233_assets();
  a.pairs.push_back({"???", "core_lock_reg"});          // unparseable lock
  a.pairs.push_back({"reglk_ctrl_i[1]", "ghost_reg"});  // unresolved register
  Diagnostics diags;
  auto assertions = populate_assertions(1233, a, unit, diags);
  CHECK(assertions.size() == 2);
  size_t failures = 0;
  for (const auto& d : diags)
    if (d.code == "formation-failure") ++failures;
  CHECK(a.pairs.size() - assertions.size() == failures);
  CHECK(failures == 2);
}

TEST_CASE("unresolved clock and unparseable reset block population") {
  DesignUnit unit = parse_unit(kDmaUnit);
  {
    AssetSet a = golden_1233_assets();
    a.clk = "nonexistent_clk";
    Diagnostics diags;
    CHECK(populate_assertions(1233, a, unit, diags).empty());
    REQUIRE_FALSE(diags.empty());
    CHECK(diags[0].code == "formation-failure");
  }
  {
    AssetSet a = golden_1233_assets();
    a.reset_conditions = "not an expr ((";
    Diagnostics diags;
    CHECK(populate_assertions(1233, a, unit, diags).empty());
  }
}

TEST_CASE("duplicate asset entries are deduplicated before population") {
  DesignUnit unit = parse_unit(kDmaUnit);
  AssetSet a = golden_1233_assets();
  a.pairs.push_back(a.pairs[0]);  // exact duplicate
  Diagnostics diags;
  auto assertions = populate_assertions(1233, a, unit, diags);
  CHECK(assertions.size() == 2);
}

TEST_CASE("assertion ids are stable across runs and orderings") {
  DesignUnit unit = parse_unit(kDmaUnit);
  Diagnostics diags;
  auto first = populate_assertions(1233, golden_1233_assets(), unit, diags);
  auto second = populate_assertions(1233, golden_1233_assets(), unit, diags);
  REQUIRE(first.size() == second.size());
  for (size_t i = 0; i < first.size(); ++i) CHECK(first[i].id == second[i].id);
}

TEST_CASE("rendering is a pure function of the fields") {
  DesignUnit unit = parse_unit(kDmaUnit);
  Diagnostics diags;
  auto assertions = populate_assertions(1233, golden_1233_assets(), unit, diags);
  for (const auto& a : assertions)
    CHECK(rtlscan::detail::render_sva(a.cwe, a.fields) == a.sva_text);
}

TEST_CASE("emitted antecedents and consequents parse under the grammar") {
  DesignUnit dma = parse_unit(kDmaUnit);
  DesignUnit locks = parse_unit(kLockUnit);
  DesignUnit priv = parse_unit(kPrivUnit);
  Diagnostics diags;
  std::vector<PopulatedAssertion> all;
  for (auto& a : populate_assertions(1231, golden_1231_assets(), locks, diags))
    all.push_back(a);
  for (auto& a : populate_assertions(1233, golden_1233_assets(), dma, diags))
    all.push_back(a);
  for (auto& a : populate_assertions(1244, golden_1244_assets(), priv, diags))
    all.push_back(a);
  REQUIRE(all.size() == 8);
  for (const auto& a : all) {
    INFO(a.sva_text);
    auto check_parses = [&](const std::string& text) {
      Diagnostics scratch;
      CHECK(parse_expression_text(text, scratch) != nullptr);
    };
    if (a.cwe == 1231) {
      check_parses(a.fields.at("CONDITIONS_FOR_STABLE_LOCK"));
      check_parses("$stable(" + a.fields.at("LOCK_SIGNAL") + ")");
    } else if (a.cwe == 1233) {
      check_parses(a.fields.at("RESET_CONDITIONS"));
      check_parses(a.fields.at("LOCK_SIGNAL") + " == '1");
      check_parses("$stable(" + a.fields.at("SECURITY_SENSITIVE_REGISTER") + ")");
    } else {
      check_parses(a.fields.at("RESET_CONDITIONS"));
      check_parses("~" + a.fields.at("CONDITIONS_FOR_PRIVILEGE_ESCALATION"));
      check_parses(a.fields.at("PRIVILEGE_SIGNAL") + " != " +
                   a.fields.at("HIGH_PRIVILEGE") + " || " +
                   a.fields.at("PRIVILEGE_SIGNAL") + " == " +
                   a.fields.at("PREVIOUS_PRIVILEGE"));
    }
  }
}

TEST_CASE("render_sva_file") {
  DesignUnit unit = parse_unit(kDmaUnit);
  Diagnostics diags;
  auto assertions = populate_assertions(1233, golden_1233_assets(), unit, diags);
  REQUIRE(assertions.size() == 2);

  auto count_occurrences = [](const std::string& text, const std::string& what) {
    size_t count = 0;
    for (size_t pos = text.find(what); pos != std::string::npos;
         pos = text.find(what, pos + 1))
      ++count;
    return count;
  };

  SECTION("one assert property and one bind per file") {
    std::string text = render_sva_file({assertions[0]}, unit);
    CHECK(count_occurrences(text, "assert property") == 1);
    CHECK(count_occurrences(text, "\nbind ") == 1);
  }

  SECTION("known property text appears verbatim") {
    std::string text = render_sva_file(assertions, unit);
    CHECK(text.find("$stable(core_lock_reg)") != std::string::npos);
  }

  SECTION("duplicates collapse by id") {
    std::vector<PopulatedAssertion> dup = {assertions[0], assertions[1],
                                           assertions[0]};
    std::string text = render_sva_file(dup, unit);
    CHECK(count_occurrences(text, "assert property") == 2);
  }
}
