#ifndef TERMFORGE_PROMPTS_H_
#define TERMFORGE_PROMPTS_H_

#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

// Prompt templates live in templates/<id>.txt and are compiled into the
// library. A template is plain text with {placeholder} fields; leading lines
// starting with "#!" are metadata (id, version) and are not rendered.
namespace termforge {

enum class TemplateId {
  kRefine,
  kRepair,
  kSelectBest,
  kExtractTerms,
  kFilterNonAi,
  kClassifyDomain,
  kNeedsTranslation,
};

std::string_view ToString(TemplateId id);
TemplateId ParseTemplateId(std::string_view name);

struct PromptSpec {
  TemplateId template_id = TemplateId::kRefine;
  std::string rendered_text;
  std::map<std::string, std::string> fields;
};

// Template body with metadata lines stripped.
std::string_view TemplateBody(TemplateId id);
int TemplateVersion(TemplateId id);

// Placeholder names in order of first appearance.
std::vector<std::string> Placeholders(std::string_view body);

// Substitutes every placeholder in one pass; values are inserted verbatim and
// never rescanned. Throws TemplateError if a placeholder has no value or a
// value has no placeholder.
PromptSpec Render(TemplateId id, std::map<std::string, std::string> fields);

using TermPair = std::pair<std::string, std::string>;  // (source, target)

inline constexpr std::string_view kTermArrow = " ⇒ ";

// One "source ⇒ target" line per pair, each terminated by '\n'. Terms are
// white-space normalized so every pair stays on a single line.
std::string RenderDictionaryBlock(const std::vector<TermPair>& terms);

// Recovers the pairs between the <terms> and </terms> markers of a rendered
// prompt. Throws MalformedResponseError if the block is missing.
std::vector<TermPair> ParseDictionaryBlock(std::string_view rendered);

// Content of the first ``` fenced block (an optional language tag after the
// opening fence is skipped). Throws MalformedResponseError when absent.
std::string ParseFencedResponse(std::string_view response);

}  // namespace termforge

#endif  // TERMFORGE_PROMPTS_H_
