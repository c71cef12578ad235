#pragma once

#include <string_view>

namespace rtlscan {

inline constexpr std::string_view kToolName = "rtlscan";
inline constexpr std::string_view kToolVersion = "0.1.0";

// Version of the JSON report schema emitted by write_report. Bump on any
// field rename or layout change.
inline constexpr std::string_view kReportSchemaVersion = "1";

// Version of the frozen per-CWE response schemas handed to the LLM provider.
inline constexpr std::string_view kResponseSchemaVersion = "1";

}  // namespace rtlscan
