#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "rtlscan/assets.hpp"

namespace rtlscan {

// Prompt-facing data for one CWE: the description used in the system prompt,
// the per-CWE signal question and nature hint for asset identification, and
// the in-context exemplar used by the v1/v3 variations. All of it is data,
// editable without touching code via CweCatalog::load_dir.
struct CweInfo {
  CweId id = 0;
  std::string name;
  std::string description;
  std::string signal_question;
  std::string signal_nature;
  struct Exemplar {
    std::string intro;        // "Here is an example of CWE-<x> with ..."
    std::string code;
    std::string explanation;
    std::string assets_note;  // "In this example the ... signals are ..."
  } exemplar;

  std::string exemplar_block() const {
    return exemplar.intro + "\n\"\"\"\n" + exemplar.code + "\"\"\"\n" +
           exemplar.explanation + "\n" + exemplar.assets_note + "\n";
  }
};

class CweCatalog {
 public:
  static CweCatalog builtin();

  // Override or extend entries from a directory of cwe-<id>.json files with
  // the same fields as CweInfo.
  void load_dir(const std::string& dir) {
    namespace fs = std::filesystem;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.path().extension() != ".json") continue;
      std::ifstream in(entry.path());
      nlohmann::json j = nlohmann::json::parse(in);
      CweInfo info;
      info.id = j.at("id").get<CweId>();
      info.name = j.at("name").get<std::string>();
      info.description = j.at("description").get<std::string>();
      info.signal_question = j.at("signal_question").get<std::string>();
      info.signal_nature = j.at("signal_nature").get<std::string>();
      const auto& ex = j.at("exemplar");
      info.exemplar.intro = ex.at("intro").get<std::string>();
      info.exemplar.code = ex.at("code").get<std::string>();
      info.exemplar.explanation = ex.at("explanation").get<std::string>();
      info.exemplar.assets_note = ex.at("assets_note").get<std::string>();
      entries_[info.id] = std::move(info);
    }
  }

  const CweInfo* find(CweId id) const {
    auto it = entries_.find(id);
    return it == entries_.end() ? nullptr : &it->second;
  }

 private:
  std::map<CweId, CweInfo> entries_;
};

inline CweCatalog CweCatalog::builtin() {
  CweCatalog catalog;
  auto add = [&](CweInfo info) { catalog.entries_[info.id] = std::move(info); };

  {
    CweInfo c;
    c.id = 1191;
    c.name = "On-Chip Debug and Test Interface With Improper Access Control";
    c.description =
        "On-Chip Debug and Test Interface With Improper Access Control: the "
        "chip exposes a debug or test interface (such as JTAG) whose unlock "
        "path does not properly authenticate the requester, for example "
        "because the password or challenge data is truncated, miswired, or "
        "incompletely compared before access is granted.";
    c.signal_question = "What are the access control related signals?";
    c.signal_nature =
        "Such signals typically hold password or challenge data entered "
        "through the debug interface, the expected secret or its hash, "
        "comparison results, and the unlock state they gate.";
    c.exemplar.intro =
        "Here is an example of CWE-1191 with code from a JTAG password "
        "checker:";
    c.exemplar.code =
        "if (pass_mode) begin\n"
        "    pass_data = {{60{8'h00}}, data_d};\n"
        "    state_d = PassChk;\n"
        "    pass_mode = 1'b0;\n"
        "end\n";
    c.exemplar.explanation =
        "The debug unlock compares a 512-bit secret, but the value under "
        "comparison is built by zero-padding a single 32-bit word. Only 32 "
        "bits of the secret take part in authentication, so the unlock can "
        "be brute-forced through the debug port.";
    c.exemplar.assets_note =
        "In this example the access control related signals are pass_data "
        "and data_d.";
    add(std::move(c));
  }
  {
    CweInfo c;
    c.id = 1231;
    c.name = "Improper Prevention of Lock Bit Modification";
    c.description =
        "Improper Prevention of Lock Bit Modification: a register bit is "
        "meant to lock down configuration once set, but the design leaves "
        "paths that can still modify the lock bit while the protection "
        "should be in force.";
    c.signal_question =
        "What are the lock signals, and for each, under what conditions may "
        "it legitimately be modified?";
    c.signal_nature =
        "Lock signals are usually write-once or reset-only control bits "
        "named like lock, wren, or protect; legitimate modification is "
        "normally limited to system reset or a privileged unlock sequence. "
        "Also report the clock that samples them.";
    c.exemplar.intro =
        "Here is an example of CWE-1231 with code from the register locks "
        "module:";
    c.exemplar.code =
        "always @(posedge clk_i) begin\n"
        "    if(~(rst_ni && ~jtag_unlock && ~rst_9)) begin\n"
        "        for (j=0; j < 6; j=j+1) begin\n"
        "            reglk_mem[j] <= 'h0;\n";
    c.exemplar.explanation =
        "Register locks keep peripheral registers from being reprogrammed "
        "once protection is on. Because the clearing condition also fires "
        "on a peripheral reset line (rst_9) that software can pulse, the "
        "locks can be wiped outside the legitimate reset or JTAG-unlock "
        "flow, and every register they guard becomes writable again.";
    c.exemplar.assets_note =
        "In this example the lock signal is reglk_mem and the correct "
        "conditions for changing lock signals are (rst_ni && "
        "~jtag_unlock).";
    add(std::move(c));
  }
  {
    CweInfo c;
    c.id = 1233;
    c.name =
        "Security-Sensitive Hardware Controls with Missing Lock Bit "
        "Protection";
    c.description =
        "Security-Sensitive Hardware Controls with Missing Lock Bit "
        "Protection: registers that control security-relevant behaviour can "
        "be written without consulting the lock bits that are supposed to "
        "protect them, so software can retune the hardware after lockdown.";
    c.signal_question =
        "What are the security sensitive registers, the lock signal that "
        "should protect each of them, the reset conditions under which the "
        "protection does not apply, and the clock?";
    c.signal_nature =
        "Security sensitive registers are configuration registers such as "
        "address bounds, enables, or key slots; each usually pairs with one "
        "bit of a register-lock vector, and the pairing is suspended only "
        "while the module is in reset.";
    c.exemplar.intro =
        "Here is an example of CWE-1233 with code from a DMA register "
        "wrapper:";
    c.exemplar.code =
        "input logic [7 :0] reglk_ctrl_i; // register lock values\n"
        "...\n"
        "    else if(en && we)\n"
        "        case(address[7:3])\n"
        "            0: start_reg <= wdata;\n"
        "            ...\n"
        "            8: end_reg <= wdata;\n";
    c.exemplar.explanation =
        "The write decode stores straight into the DMA configuration "
        "registers whenever the bus enables are set. The per-register lock "
        "inputs in reglk_ctrl_i are never consulted, so locked registers "
        "remain writable from software.";
    c.exemplar.assets_note =
        "In this example the security sensitive registers are start_reg "
        "through end_reg, the lock signals are the bits of reglk_ctrl_i, "
        "and the reset conditions are ~(rst_ni && ~rst_8).";
    add(std::move(c));
  }
  {
    CweInfo c;
    c.id = 1244;
    c.name = "Internal Asset Exposed to Unsafe Debug Access Level or State";
    c.description =
        "Internal Asset Exposed to Unsafe Debug Access Level or State: the "
        "privilege or debug-access level can be escalated under conditions "
        "that should not permit it, exposing internal assets to an unsafe "
        "access level.";
    c.signal_question =
        "What are the privilege level signals, the conditions under which "
        "each may legitimately be escalated, the reset conditions, the "
        "value representing the higher privilege, the signal holding the "
        "previous privilege level, and the clock?";
    c.signal_nature =
        "Privilege signals encode machine/debug access modes; escalation "
        "is normally tied to an authenticated unlock or a hardware strap, "
        "and the level should otherwise hold its previous value.";
    c.exemplar.intro =
        "Here is an example of CWE-1244 with code from a debug controller:";
    c.exemplar.code =
        "always @(posedge clk_i) begin\n"
        "    if (~rst_ni)\n"
        "        dbg_priv <= 2'b00;\n"
        "    else if (dbg_req)\n"
        "        dbg_priv <= 2'b11;\n";
    c.exemplar.explanation =
        "The debug privilege level jumps to its highest value on any debug "
        "request, without checking that the unlock authentication "
        "succeeded. Any software able to pulse dbg_req gains full debug "
        "access to internal state.";
    c.exemplar.assets_note =
        "In this example the privilege signal is dbg_priv, the correct "
        "conditions for escalation are (dbg_req && auth_ok), the higher "
        "privilege is 2'b11, and the previous privilege is dbg_priv.";
    add(std::move(c));
  }
  {
    CweInfo c;
    c.id = 1300;
    c.name = "Improper Protection of Physical Side Channels";
    c.description =
        "Improper Protection of Physical Side Channels: the design lets "
        "secret-dependent control flow or incomplete conditional "
        "assignments modulate power, timing, or electromagnetic behaviour, "
        "so secret values can be recovered by observing the device.";
    c.signal_question = "What are the side channel related signals?";
    c.signal_nature =
        "Such signals carry or are derived from secrets (key bits, "
        "plaintext words, comparison outcomes) and show up in conditional "
        "statements whose activity pattern depends on the secret value.";
    c.exemplar.intro =
        "Here is an example of CWE-1300 with code from an AES key schedule:";
    c.exemplar.code =
        "always @* begin\n"
        "    if (key_bit)\n"
        "        acc = acc ^ round_in;\n"
        "end\n";
    c.exemplar.explanation =
        "The accumulator only toggles when the secret key bit is one, and "
        "the missing else branch means the datapath is idle otherwise. The "
        "switching activity, and therefore the power trace, is directly "
        "keyed to the secret bit.";
    c.exemplar.assets_note =
        "In this example the side channel related signals are key_bit and "
        "acc.";
    add(std::move(c));
  }
  return catalog;
}

}  // namespace rtlscan
