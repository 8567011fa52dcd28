#include "termforge/prompts.h"

#include <array>
#include <charconv>
#include <set>

#include "termforge/error.h"
#include "termforge/text.h"

namespace termforge {
namespace internal {
const std::vector<std::pair<std::string_view, std::string_view>>& EmbeddedTemplates();
}  // namespace internal

namespace {

constexpr std::array<std::pair<TemplateId, std::string_view>, 7> kNames = {{
    {TemplateId::kRefine, "refine"},
    {TemplateId::kRepair, "repair"},
    {TemplateId::kSelectBest, "select_best"},
    {TemplateId::kExtractTerms, "extract_terms"},
    {TemplateId::kFilterNonAi, "filter_non_ai"},
    {TemplateId::kClassifyDomain, "classify_domain"},
    {TemplateId::kNeedsTranslation, "needs_translation"},
}};

std::string_view RawTemplate(TemplateId id) {
  const std::string_view name = ToString(id);
  for (const auto& [n, body] : internal::EmbeddedTemplates()) {
    if (n == name) return body;
  }
  throw TemplateError("template '" + std::string(name) + "' is not compiled in");
}

bool IsPlaceholderChar(char c) {
  return (c >= 'a' && c <= 'z') || c == '_' || (c >= '0' && c <= '9');
}

// Calls visit(offset, length, name) for each {name} in body.
template <typename Visit>
void ScanPlaceholders(std::string_view body, Visit visit) {
  std::size_t pos = 0;
  while ((pos = body.find('{', pos)) != std::string_view::npos) {
    std::size_t end = pos + 1;
    while (end < body.size() && IsPlaceholderChar(body[end])) ++end;
    if (end < body.size() && body[end] == '}' && end > pos + 1) {
      visit(pos, end + 1 - pos, body.substr(pos + 1, end - pos - 1));
      pos = end + 1;
    } else {
      ++pos;
    }
  }
}

}  // namespace

std::string_view ToString(TemplateId id) {
  for (const auto& [tid, name] : kNames) {
    if (tid == id) return name;
  }
  return "refine";
}

TemplateId ParseTemplateId(std::string_view name) {
  for (const auto& [tid, n] : kNames) {
    if (n == name) return tid;
  }
  throw ValidationError("unknown template id '" + std::string(name) + "'");
}

std::string_view TemplateBody(TemplateId id) {
  std::string_view raw = RawTemplate(id);
  while (raw.starts_with("#!")) {
    const std::size_t nl = raw.find('\n');
    raw = nl == std::string_view::npos ? std::string_view() : raw.substr(nl + 1);
  }
  return raw;
}

int TemplateVersion(TemplateId id) {
  std::string_view raw = RawTemplate(id);
  while (raw.starts_with("#!")) {
    const std::size_t nl = raw.find('\n');
    std::string_view line = raw.substr(0, nl);
    constexpr std::string_view kKey = "#! version:";
    if (line.starts_with(kKey)) {
      line.remove_prefix(kKey.size());
      while (!line.empty() && line.front() == ' ') line.remove_prefix(1);
      int v = 0;
      std::from_chars(line.data(), line.data() + line.size(), v);
      return v;
    }
    if (nl == std::string_view::npos) break;
    raw = raw.substr(nl + 1);
  }
  return 0;
}

std::vector<std::string> Placeholders(std::string_view body) {
  std::vector<std::string> out;
  std::set<std::string, std::less<>> seen;
  ScanPlaceholders(body, [&](std::size_t, std::size_t, std::string_view name) {
    if (seen.insert(std::string(name)).second) out.emplace_back(name);
  });
  return out;
}

PromptSpec Render(TemplateId id, std::map<std::string, std::string> fields) {
  const std::string_view body = TemplateBody(id);
  std::set<std::string, std::less<>> used;
  std::string out;
  std::size_t copied = 0;
  ScanPlaceholders(body, [&](std::size_t pos, std::size_t len, std::string_view name) {
    auto it = fields.find(std::string(name));
    if (it == fields.end()) {
      throw TemplateError("template '" + std::string(ToString(id)) +
                          "' has no value for {" + std::string(name) + "}");
    }
    out.append(body.substr(copied, pos - copied));
    out += it->second;
    copied = pos + len;
    used.insert(std::string(name));
  });
  out.append(body.substr(copied));
  for (const auto& [name, value] : fields) {
    if (!used.contains(name)) {
      throw TemplateError("template '" + std::string(ToString(id)) +
                          "' has no placeholder {" + name + "}");
    }
  }
  return PromptSpec{id, std::move(out), std::move(fields)};
}

std::string RenderDictionaryBlock(const std::vector<TermPair>& terms) {
  std::string out;
  for (const auto& [src, tgt] : terms) {
    out += text::NormalizeTerm(src);
    out += kTermArrow;
    out += text::NormalizeTerm(tgt);
    out += '\n';
  }
  return out;
}

std::vector<TermPair> ParseDictionaryBlock(std::string_view rendered) {
  constexpr std::string_view kOpen = "<terms>\n";
  constexpr std::string_view kClose = "</terms>";
  const std::size_t open = rendered.find(kOpen);
  if (open == std::string_view::npos) {
    throw MalformedResponseError("no <terms> block in prompt");
  }
  const std::size_t start = open + kOpen.size();
  const std::size_t close = rendered.find(kClose, start);
  if (close == std::string_view::npos) {
    throw MalformedResponseError("unterminated <terms> block");
  }
  std::vector<TermPair> out;
  std::string_view block = rendered.substr(start, close - start);
  while (!block.empty()) {
    const std::size_t nl = block.find('\n');
    const std::string_view line = block.substr(0, nl);
    block = nl == std::string_view::npos ? std::string_view() : block.substr(nl + 1);
    if (line.empty()) continue;
    const std::size_t arrow = line.find(kTermArrow);
    if (arrow == std::string_view::npos) {
      throw MalformedResponseError("dictionary line without arrow: " +
                                   std::string(line));
    }
    out.emplace_back(std::string(line.substr(0, arrow)),
                     std::string(line.substr(arrow + kTermArrow.size())));
  }
  return out;
}

std::string ParseFencedResponse(std::string_view response) {
  constexpr std::string_view kFence = "```";
  const std::size_t open = response.find(kFence);
  if (open == std::string_view::npos) {
    throw MalformedResponseError("response has no fenced block");
  }
  std::size_t start = response.find('\n', open + kFence.size());
  if (start == std::string_view::npos) {
    throw MalformedResponseError("fenced block is not terminated");
  }
  ++start;
  const std::size_t close = response.find(kFence, start);
  if (close == std::string_view::npos) {
    throw MalformedResponseError("fenced block is not terminated");
  }
  std::string_view body = response.substr(start, close - start);
  if (!body.empty() && body.back() == '\n') body.remove_suffix(1);
  return std::string(body);
}

}  // namespace termforge
