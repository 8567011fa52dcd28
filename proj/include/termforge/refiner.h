#ifndef TERMFORGE_REFINER_H_
#define TERMFORGE_REFINER_H_

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "termforge/llm_client.h"
#include "termforge/prompts.h"

namespace termforge {

// Ten human candidates plus one machine translation, in input order.
inline constexpr std::size_t kCandidateCount = 11;
// A candidate wins the vote when strictly more than this many entries agree.
inline constexpr std::size_t kMajorityThreshold = 5;

struct CandidateSet {
  std::string term;
  std::string language;
  std::vector<std::string> candidates;

  // Throws ValidationError unless there are exactly 11 nonblank candidates.
  void Validate() const;
};

// Equality key for voting: NFC, trimmed, case-folded.
std::string VoteKey(std::string_view candidate);

// The candidate (first spelling seen) whose key occurs more than five times.
std::optional<std::string> MajorityVote(const CandidateSet& cs);

PromptSpec BuildRefinePrompt(std::string_view src_text,
                             std::string_view initial_translation,
                             const std::vector<TermPair>& terms,
                             std::string_view source_lang,
                             std::string_view target_lang);

// Lists the candidates as "1. ..." through "11. ..." without collapsing
// duplicates, so labels stay aligned with input positions.
PromptSpec BuildSelectPrompt(const CandidateSet& cs,
                             const std::vector<std::string>& contexts);

// Strict grammar: optional white space, a decimal label in [1, n], optional
// white space. Returns the 0-based index; throws InvalidLabelError otherwise.
std::size_t ParseSelectResponse(std::string_view response,
                                std::size_t n = kCandidateCount);

// Sends the prompt; if `parse` rejects the answer (throws termforge::Error),
// asks once more with a format reminder appended and parses again. A second
// violation propagates the parser's error.
template <typename T>
T CompleteWithGrammar(CompletionClient& client, const PromptSpec& prompt,
                      const std::function<T(std::string_view)>& parse,
                      std::string_view reminder);

// Same, when the first answer was already obtained (for example in a batch).
template <typename T>
T ParseOrReprompt(CompletionClient& client, const PromptSpec& prompt,
                  std::string_view first_response,
                  const std::function<T(std::string_view)>& parse,
                  std::string_view reminder);

enum class SelectionStrategy { kLlmOnly, kVoteThenLlm };
enum class SelectionSource { kVote, kLlm };

std::string_view ToString(SelectionSource s);
SelectionStrategy ParseSelectionStrategy(std::string_view name);

struct Selection {
  std::string translation;
  SelectionSource source = SelectionSource::kVote;
  std::optional<std::size_t> index;  // chosen position when the LLM decided
};

// kLlmOnly always asks the judge; kVoteThenLlm asks only when no candidate has
// a majority.
Selection SelectBest(const CandidateSet& cs, const std::vector<std::string>& contexts,
                     CompletionClient& client, SelectionStrategy strategy);

// Refinement round trip: renders the refine prompt, calls the client and
// returns the fenced translation.
std::string RefineTranslation(CompletionClient& client, std::string_view src_text,
                              std::string_view initial_translation,
                              const std::vector<TermPair>& terms,
                              std::string_view source_lang,
                              std::string_view target_lang);

// Extracts the fenced translation from a refine or repair answer, asking once
// more on a format violation.
std::string CompleteFenced(CompletionClient& client, const PromptSpec& prompt);
std::string ParseFencedOrReprompt(CompletionClient& client, const PromptSpec& prompt,
                                  std::string_view first_response);

}  // namespace termforge

#endif  // TERMFORGE_REFINER_H_
