#include "termforge/report.h"

#include <algorithm>

#include "termforge/error.h"

namespace termforge {
namespace {

constexpr std::string_view kStyle =
    "body{font-family:sans-serif;margin:2em;color:#222}"
    "table{border-collapse:collapse;width:100%}"
    "th,td{border:1px solid #ccc;padding:.4em .6em;vertical-align:top;width:33%}"
    "th{background:#f3f3f3;text-align:left}"
    "td.n{width:auto;color:#888;text-align:right}"
    "mark{background:#ffe58a;padding:0 .1em}";

std::string Cell(std::string_view text, std::vector<Span> marks) {
  std::sort(marks.begin(), marks.end(),
            [](const Span& a, const Span& b) { return a.begin < b.begin; });
  std::string out;
  std::size_t pos = 0;
  for (const Span& m : marks) {
    out += EscapeHtml(text.substr(pos, m.begin - pos));
    out += "<mark>";
    out += EscapeHtml(text.substr(m.begin, m.end - m.begin));
    out += "</mark>";
    pos = m.end;
  }
  out += EscapeHtml(text.substr(pos));
  return out;
}

}  // namespace

std::string EscapeHtml(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&#39;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string EmitReport(const std::vector<std::string>& src,
                       const std::vector<std::string>& direct,
                       const std::vector<std::string>& refined,
                       const std::vector<Highlight>& highlights,
                       const ReportOptions& opts) {
  if (src.size() != direct.size() || src.size() != refined.size()) {
    throw LengthMismatchError("report columns have " + std::to_string(src.size()) + ", " +
                              std::to_string(direct.size()) + " and " +
                              std::to_string(refined.size()) + " segments");
  }
  std::vector<std::vector<Span>> marks(src.size());
  for (const Highlight& h : highlights) {
    if (h.segment >= refined.size() || h.span.begin >= h.span.end ||
        h.span.end > refined[h.segment].size()) {
      throw RangeError("highlight outside segment " + std::to_string(h.segment + 1));
    }
    marks[h.segment].push_back(h.span);
  }
  for (std::size_t s = 0; s < marks.size(); ++s) {
    auto& m = marks[s];
    std::sort(m.begin(), m.end(), [](const Span& a, const Span& b) { return a.begin < b.begin; });
    for (std::size_t i = 1; i < m.size(); ++i) {
      if (m[i].begin < m[i - 1].end) {
        throw RangeError("overlapping highlights in segment " + std::to_string(s + 1));
      }
    }
  }

  auto lang_attr = [](const std::string& lang) {
    return lang.empty() ? std::string() : " lang=\"" + EscapeHtml(lang) + "\"";
  };
  std::string out;
  out += "<!DOCTYPE html>\n";
  out += "<html xmlns=\"http://www.w3.org/1999/xhtml\" lang=\"en\">\n";
  out += "<head>\n<meta charset=\"utf-8\"/>\n";
  out += "<title>" + EscapeHtml(opts.title) + "</title>\n";
  out += "<style>" + std::string(kStyle) + "</style>\n</head>\n<body>\n";
  out += "<h1>" + EscapeHtml(opts.title) + "</h1>\n";
  out += "<p>" + std::to_string(src.size()) + " segments, " +
         std::to_string(highlights.size()) + " highlighted terms</p>\n";
  out += "<table>\n<thead><tr><th>#</th><th>Source</th><th>Direct translation</th>"
         "<th>Refined translation</th></tr></thead>\n<tbody>\n";
  for (std::size_t i = 0; i < src.size(); ++i) {
    out += "<tr><td class=\"n\">" + std::to_string(i + 1) + "</td>";
    out += "<td" + lang_attr(opts.source_lang) + ">" + EscapeHtml(src[i]) + "</td>";
    out += "<td" + lang_attr(opts.target_lang) + ">" + EscapeHtml(direct[i]) + "</td>";
    out += "<td" + lang_attr(opts.target_lang) + ">" + Cell(refined[i], marks[i]) + "</td>";
    out += "</tr>\n";
  }
  out += "</tbody>\n</table>\n</body>\n</html>\n";
  return out;
}

}  // namespace termforge
