#ifndef TERMFORGE_INGEST_H_
#define TERMFORGE_INGEST_H_

#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "termforge/llm_client.h"
#include "termforge/prompts.h"

// Offline half of term curation: chunking documents, tracking where each
// candidate term was seen, and the rule-based filter cascade. Words are
// white-space separated throughout this module.
namespace termforge {

inline constexpr std::size_t kMaxChunkWords = 64;

// Rule-based splitter: breaks after '.', '!' or '?' (plus closing quotes or
// brackets) when followed by white space and an uppercase letter or digit.
// Single-letter and common abbreviations ("e.g.", "et al.") do not end a
// sentence.
std::vector<std::string> SplitSentences(std::string_view text);

struct Chunk {
  std::string text;  // words joined by single spaces
  std::size_t word_count = 0;
  std::string source_doc;
  std::size_t index = 0;

  friend bool operator==(const Chunk&, const Chunk&) = default;
};

// Greedy packing of whole sentences; a sentence longer than max_words is cut
// into max_words pieces and its last piece stays open for the next sentence.
std::vector<Chunk> ChunkText(const std::vector<std::string>& sentences,
                             std::string_view source_doc = "",
                             std::size_t max_words = kMaxChunkWords);

inline constexpr std::size_t kMaxTermContexts = 3;

struct TermCandidate {
  std::string term;
  std::set<std::string> doc_ids;
  std::vector<Chunk> contexts;  // at most 3, distinct (source_doc, index)
};

// Appends the chunk unless 3 contexts are already stored or the same chunk is
// present. The chunk's document is added to doc_ids either way.
TermCandidate RecordContext(TermCandidate cand, const Chunk& chunk);

enum class DropReason { kSinglePaper, kSpecialChar, kAbbreviation, kNonNounPhrase, kDuplicate };
std::string_view ToString(DropReason r);

struct DroppedCandidate {
  TermCandidate candidate;
  DropReason reason;
};

struct FilterResult {
  std::vector<TermCandidate> kept;
  std::vector<DroppedCandidate> dropped;
};

// 2-6 capitals with an optional plural "s" ("CNN", "LLMs"), or letter-period
// sequences ("e.g.", "U.S.").
bool IsAbbreviation(std::string_view term);
// Last word is an article, preposition, conjunction, pronoun or auxiliary.
bool EndsInFunctionWord(std::string_view term);

// Checks in order: seen in fewer than 2 documents, first character not a
// letter or digit, abbreviation, trailing function word, then duplicates by
// fold key (the first occurrence is kept). Each dropped candidate carries the
// first rule it failed.
FilterResult FilterCandidates(const std::vector<TermCandidate>& cands);

PromptSpec BuildExtractPrompt(const Chunk& chunk);

// Terms separated by ';' or newlines. List markers ("-", "*", "1.", "1)") and
// surrounding quotes are stripped; blanks are skipped. Empty input gives an
// empty list.
std::vector<std::string> ParseTermList(std::string_view response);

PromptSpec BuildFilterPrompt(const std::vector<std::string>& candidates);

inline constexpr std::string_view kOtherDomain = "Other";

// Lists the taxonomy plus "Other". Throws ValidationError on an empty taxonomy.
PromptSpec BuildDomainPrompt(std::string_view term, const std::vector<std::string>& taxonomy);

// Case-insensitive match against the options (taxonomy plus "Other"), after
// trimming quotes and a trailing period. Anything else maps to "Other" and a
// warning goes to `log`.
std::string ParseDomainResponse(std::string_view response,
                                const std::vector<std::string>& taxonomy,
                                const LogSink& log = {});

PromptSpec BuildNeedsTranslationPrompt(std::string_view term, std::string_view target_lang);
// "translate" -> true, "keep" -> false; throws MalformedResponseError otherwise.
bool ParseNeedsTranslation(std::string_view response);

// One JSON object per line:
// {"term", "doc_ids": [...], "contexts": [{"doc", "index", "text"}]}
std::string SerializeCandidates(const std::vector<TermCandidate>& cands);
std::vector<TermCandidate> ParseCandidates(std::string_view jsonl);

}  // namespace termforge

#endif  // TERMFORGE_INGEST_H_
