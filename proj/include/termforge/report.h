#ifndef TERMFORGE_REPORT_H_
#define TERMFORGE_REPORT_H_

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "termforge/tokenizer.h"

namespace termforge {

// Byte span inside refined[segment] to wrap in <mark>.
struct Highlight {
  std::size_t segment = 0;
  Span span;
};

struct ReportOptions {
  std::string title = "Terminology review";
  std::string source_lang;
  std::string target_lang;
};

std::string EscapeHtml(std::string_view s);

// Self-contained page (inline CSS, no external resources) with one table row
// per segment: source, direct translation, refined translation. The output is
// well-formed XML as well as HTML. Throws LengthMismatchError when the columns
// differ in length and RangeError on a highlight outside its segment or
// overlapping another.
std::string EmitReport(const std::vector<std::string>& src,
                       const std::vector<std::string>& direct,
                       const std::vector<std::string>& refined,
                       const std::vector<Highlight>& highlights,
                       const ReportOptions& opts = {});

}  // namespace termforge

#endif  // TERMFORGE_REPORT_H_
