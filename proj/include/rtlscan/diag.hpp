#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace rtlscan {

// Half-open source ranges are avoided on purpose: line/column values are
// 1-based and col_end names the last character of the range, matching the
// "line_no" convention used in violation reports.
struct SourceSpan {
  std::string file;
  int line_start = 1;
  int line_end = 1;
  int col_start = 1;
  int col_end = 1;

  bool contains(const SourceSpan& inner) const {
    if (inner.line_start < line_start || inner.line_end > line_end) return false;
    if (inner.line_start == line_start && inner.col_start < col_start) return false;
    if (inner.line_end == line_end && inner.col_end > col_end) return false;
    return true;
  }

  friend bool operator==(const SourceSpan& a, const SourceSpan& b) {
    return a.file == b.file && a.line_start == b.line_start &&
           a.line_end == b.line_end && a.col_start == b.col_start &&
           a.col_end == b.col_end;
  }
};

enum class Severity { Error, Warning, Note };

struct Diagnostic {
  Severity severity = Severity::Warning;
  // Stable machine-readable tag, e.g. "skipped-construct",
  // "unresolved-reference", "formation-failure", "macro-ignored".
  std::string code;
  std::string message;
  SourceSpan span;

  std::string to_string() const {
    std::string sev = severity == Severity::Error     ? "error"
                      : severity == Severity::Warning ? "warning"
                                                      : "note";
    std::string out = span.file.empty() ? "" : span.file + ":" +
                                                   std::to_string(span.line_start) + ": ";
    out += sev + " [" + code + "] " + message;
    return out;
  }
};

using Diagnostics = std::vector<Diagnostic>;

inline void add_diag(Diagnostics& diags, Severity sev, std::string code,
                     std::string message, SourceSpan span = {}) {
  diags.push_back({sev, std::move(code), std::move(message), std::move(span)});
}

// Exact source slice covered by a span. Works on the original text the span
// was produced from; lines are split on '\n' only.
inline std::string slice_span(std::string_view source, const SourceSpan& span) {
  int line = 1;
  size_t pos = 0;
  size_t begin = std::string_view::npos;
  size_t end = std::string_view::npos;
  while (pos <= source.size()) {
    size_t eol = source.find('\n', pos);
    size_t line_len = (eol == std::string_view::npos ? source.size() : eol) - pos;
    if (line == span.line_start) {
      size_t col = static_cast<size_t>(span.col_start) - 1;
      begin = pos + (col > line_len ? line_len : col);
    }
    if (line == span.line_end) {
      size_t col = static_cast<size_t>(span.col_end);
      end = pos + (col > line_len ? line_len : col);
      break;
    }
    if (eol == std::string_view::npos) break;
    pos = eol + 1;
    ++line;
  }
  if (begin == std::string_view::npos || end == std::string_view::npos || end < begin)
    return {};
  return std::string(source.substr(begin, end - begin));
}

}  // namespace rtlscan
