#ifndef TERMFORGE_SUBSTITUTER_H_
#define TERMFORGE_SUBSTITUTER_H_

#include <string>
#include <string_view>
#include <vector>

#include "termforge/aligner.h"
#include "termforge/glossary.h"
#include "termforge/matcher.h"
#include "termforge/prompts.h"
#include "termforge/tokenizer.h"

namespace termforge {

struct SubstitutionEdit {
  WordRange tgt_range;
  std::string replacement;
  const GlossaryEntry* term = nullptr;
  WordRange src_range;
};

// Target-side replacements for one sentence pair. Edits never overlap and are
// stored by descending start index, which is the order they are applied in.
struct SubstitutionPlan {
  std::vector<SubstitutionEdit> edits;
  std::vector<std::string> warnings;  // skipped or conflicting matches
};

// For each match, the target span is [min, max + 1) over every target word
// linked to a source word inside the match. Matches with no links are skipped;
// when spans overlap the match with the longer source range wins, then the
// leftmost one.
SubstitutionPlan PlanSubstitutions(const std::vector<TermMatch>& matches,
                                   const Alignment& alignment,
                                   const TokenizedSentence& tgt);

struct AppliedText {
  std::string text;
  std::vector<Span> replaced;  // byte spans of inserted replacements, ascending
};

// Applies edits right to left. Untouched text, including the original
// spacing and punctuation between words, is copied verbatim, so an empty plan
// reproduces tgt.text. Throws RangeError on an edit outside the sentence.
AppliedText ApplyPlanWithSpans(const TokenizedSentence& tgt,
                               const SubstitutionPlan& plan);
std::string ApplyPlan(const TokenizedSentence& tgt, const SubstitutionPlan& plan);

// Builds the post-substitution repair prompt.
PromptSpec RepairPrompt(std::string_view src_text, std::string_view substituted,
                        const std::vector<TermPair>& terms,
                        std::string_view target_language);

// English display name for a language code ("fr" -> "French"); unknown codes
// are returned unchanged.
std::string LanguageName(std::string_view code);

}  // namespace termforge

#endif  // TERMFORGE_SUBSTITUTER_H_
