#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "rtlscan/sim.hpp"
#include "support/design_gen.hpp"
#include "support/reference_sim.hpp"
#include "support/testdata.hpp"

using namespace rtlscan;

namespace {

DesignUnit parse_one(std::string_view src) {
  ParseResult r = parse_source(src, "sim.v");
  REQUIRE(r.units.size() == 1);
  return r.units[0];
}

SimModel must_elaborate(const DesignUnit& unit) {
  auto result = elaborate(unit);
  if (auto* err = std::get_if<ElaborationError>(&result)) FAIL(err->reason);
  return std::get<SimModel>(result);
}

std::string unsupported_reason(const DesignUnit& unit) {
  auto result = elaborate(unit);
  auto* err = std::get_if<ElaborationError>(&result);
  REQUIRE(err != nullptr);
  return err->reason;
}

const char* kLockToy = R"(
module lock_toy (input clk, input we, input wdata);
  reg lock = 0;
  always @(posedge clk)
    if (we)
      lock <= wdata;
endmodule
)";

std::vector<SimValue> make_inputs(const SimModel& m,
                                  std::map<std::string, uint64_t> vals) {
  std::vector<SimValue> out;
  for (int id : m.input_ids) {
    SimValue v;
    auto it = vals.find(m.signals[static_cast<size_t>(id)].name);
    if (it != vals.end()) v.scalar = it->second;
    out.push_back(v);
  }
  return out;
}

uint64_t state_of(const SimModel& m, const std::vector<SimValue>& state,
                  const std::string& name) {
  for (size_t i = 0; i < m.state_ids.size(); ++i)
    if (m.signals[static_cast<size_t>(m.state_ids[i])].name == name)
      return state[i].scalar;
  FAIL("no state var " + name);
  return 0;
}

}  // namespace

TEST_CASE("lock toy semantics") {
  DesignUnit unit = parse_one(kLockToy);
  SimModel m = must_elaborate(unit);
  auto state = reset_state(m);
  CHECK(state_of(m, state, "lock") == 0);

  SECTION("we=1 writes the lock") {
    auto next = step(m, state, make_inputs(m, {{"we", 1}, {"wdata", 1}}));
    CHECK(state_of(m, next, "lock") == 1);
  }
  SECTION("we=0 leaves the lock unchanged") {
    auto next = step(m, state, make_inputs(m, {{"we", 0}, {"wdata", 1}}));
    CHECK(state_of(m, next, "lock") == 0);
  }
}

TEST_CASE("4-bit counter agrees with the reference interpreter") {
  const char* src = R"(
module counter (input clk, input en);
  reg [3:0] count = 0;
  always @(posedge clk)
    if (en)
      count <= count + 1;
endmodule
)";
  DesignUnit unit = parse_one(src);
  SimModel m = must_elaborate(unit);
  auto state = reset_state(m);
  for (int i = 0; i < 3; ++i)
    state = step(m, state, make_inputs(m, {{"en", 1}}));
  CHECK(state_of(m, state, "count") == 3);

  // Same steps through the independent interpreter.
  refsim::RefModel rm = refsim::RefModel::build(unit);
  refsim::ValueMap rstate = {{"count", 0}};
  for (int i = 0; i < 3; ++i)
    rstate = refsim::next_state(
        rm, refsim::cycle_values(rm, rstate, {{"en", 1}}));
  CHECK(rstate.at("count") == 3);
}

TEST_CASE("comb-only module has no state and one comb node") {
  DesignUnit unit =
      parse_one("module andgate (input a, input b, output y); assign y = a & "
                "b; endmodule");
  SimModel m = must_elaborate(unit);
  CHECK(m.state_ids.empty());
  CHECK(m.comb.size() == 1);
  auto env = evaluate_cycle(m, {}, make_inputs(m, {{"a", 1}, {"b", 1}}));
  CHECK(env.at(m.id_of("y")).scalar == 1);
}

TEST_CASE("combinational loop is rejected") {
  DesignUnit unit = parse_one(
      "module loop (input i); wire a; wire b; assign a = b | i; assign b = a; "
      "endmodule");
  CHECK(unsupported_reason(unit).find("loop") != std::string::npos);
}

TEST_CASE("multiple clock domains are rejected") {
  DesignUnit unit = parse_one(R"(
module two_clk (input clk_a, input clk_b, input d);
  reg qa; reg qb;
  always @(posedge clk_a) qa <= d;
  always @(posedge clk_b) qb <= d;
endmodule
)");
  CHECK(unsupported_reason(unit).find("clock") != std::string::npos);
}

TEST_CASE("latched combinational signal is rejected") {
  DesignUnit unit = parse_one(
      "module l (input sel, input a, output reg y); always @* if (sel) y = a; "
      "endmodule");
  CHECK(unsupported_reason(unit).find("latch") != std::string::npos);
}

TEST_CASE("signal wider than 64 bits is rejected") {
  DesignUnit unit = parse_one(
      "module wide (input clk, input d); reg [511:0] big; always @(posedge "
      "clk) big <= {512{d}}; endmodule");
  CHECK(unsupported_reason(unit).find("wider") != std::string::npos);
}

TEST_CASE("dma wrapper elaborates with expected roles") {
  std::string source =
      testsupport::read_file(testsupport::testdata_path("rtl/dma_wrapper.sv"));
  ParseResult r = parse_source(source, "dma_wrapper.sv");
  REQUIRE(r.units.size() == 1);
  SimModel m = must_elaborate(r.units[0]);

  auto role_of = [&](const std::string& name) {
    const SimSignal* sig = m.find(name);
    REQUIRE(sig != nullptr);
    return sig->role;
  };
  CHECK(role_of("start_reg") == SignalRole::State);
  CHECK(role_of("end_reg") == SignalRole::State);
  CHECK(role_of("core_lock_reg") == SignalRole::State);
  CHECK(role_of("en") == SignalRole::Input);
  CHECK(role_of("we") == SignalRole::Input);
  CHECK(role_of("address") == SignalRole::Input);
  CHECK(role_of("wdata") == SignalRole::Input);
  CHECK(role_of("reglk_ctrl_i") == SignalRole::Input);
  CHECK(role_of("rdata_o") == SignalRole::Comb);
  CHECK(m.clock == "clk_i");

  // The unguarded write path: en && we && address[7:3]==7 writes the lock reg.
  auto state = reset_state(m);
  auto inputs = make_inputs(m, {{"rst_ni", 1},
                                {"rst_8", 0},
                                {"en", 1},
                                {"we", 1},
                                {"address", 0x38},
                                {"wdata", 1}});
  auto next = step(m, state, inputs);
  CHECK(state_of(m, next, "core_lock_reg") == 1);
  // Reset dominates.
  auto reset_inputs = make_inputs(m, {{"rst_ni", 0},
                                      {"en", 1},
                                      {"we", 1},
                                      {"address", 0x38},
                                      {"wdata", 1}});
  auto back = step(m, next, reset_inputs);
  CHECK(state_of(m, back, "core_lock_reg") == 0);
}

TEST_CASE("nonblocking assignments commit simultaneously") {
  const char* src = R"(
module swap (input clk);
  reg a = 0;
  reg b = 1;
  always @(posedge clk) begin
    a <= b;
    b <= a;
  end
endmodule
)";
  SimModel m = must_elaborate(parse_one(src));
  auto state = reset_state(m);
  auto next = step(m, state, {});
  CHECK(state_of(m, next, "a") == 1);
  CHECK(state_of(m, next, "b") == 0);
}

TEST_CASE("blocking assignments in clocked blocks sequence") {
  const char* src = R"(
module seq (input clk, input d);
  reg t; reg q;
  always @(posedge clk) begin
    t = d;
    q <= t;
  end
endmodule
)";
  SimModel m = must_elaborate(parse_one(src));
  auto state = reset_state(m);
  auto next = step(m, state, make_inputs(m, {{"d", 1}}));
  CHECK(state_of(m, next, "q") == 1);  // reads the freshly written t
}

TEST_CASE("array state updates by element") {
  const char* src = R"(
module mem (input clk, input we, input [1:0] waddr, input [3:0] wdata,
            input [1:0] raddr, output [3:0] rdata);
  reg [3:0] store [0:3];
  always @(posedge clk)
    if (we)
      store[waddr] <= wdata;
  assign rdata = store[raddr];
endmodule
)";
  SimModel m = must_elaborate(parse_one(src));
  auto state = reset_state(m);
  state = step(m, state,
               make_inputs(m, {{"we", 1}, {"waddr", 2}, {"wdata", 9}}));
  auto env = evaluate_cycle(m, state, make_inputs(m, {{"raddr", 2}}));
  CHECK(env.at(m.id_of("rdata")).scalar == 9);
}

TEST_CASE("step agrees with the reference interpreter on generated designs") {
  designgen::Generator gen(0xC0FFEE);
  std::mt19937_64 rng(1234);
  for (int i = 0; i < 25; ++i) {
    designgen::GeneratedDesign d = gen.design(i);
    INFO(d.source);
    ParseResult r = parse_source(d.source, "gen.v");
    REQUIRE(r.units.size() == 1);
    SimModel m = must_elaborate(r.units[0]);
    refsim::RefModel rm = refsim::RefModel::build(r.units[0]);

    auto state = reset_state(m);
    refsim::ValueMap rstate;
    for (const auto& name : rm.state_names) rstate[name] = 0;

    for (int t = 0; t < 12; ++t) {
      std::map<std::string, uint64_t> in_vals;
      for (size_t k = 0; k < d.inputs.size(); ++k)
        in_vals[d.inputs[k]] =
            rng() & ((1ull << d.input_widths[k]) - 1);
      state = step(m, state, make_inputs(m, in_vals));
      refsim::ValueMap rinputs(in_vals.begin(), in_vals.end());
      rstate = refsim::next_state(rm, refsim::cycle_values(rm, rstate, rinputs));
      for (const auto& reg : d.regs) {
        INFO("cycle " << t << " reg " << reg);
        CHECK(state_of(m, state, reg) == rstate.at(reg));
      }
    }
  }
}
