#ifndef TERMFORGE_MATCHER_H_
#define TERMFORGE_MATCHER_H_

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "termforge/glossary.h"
#include "termforge/tokenizer.h"

namespace termforge {

// Half-open word-index range.
struct WordRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool Overlaps(const WordRange& o) const { return begin < o.end && o.begin < end; }
  friend bool operator==(const WordRange&, const WordRange&) = default;
};

struct TermMatch {
  const GlossaryEntry* entry = nullptr;  // points into the searched Glossary
  WordRange word_range;
  std::string surface;  // original text covered by the range
};

// Case-folded word-sequence index over the source terms of one language.
// Matching is exact on the folded word sequence; no morphology.
class TermIndex {
 public:
  TermIndex(const Glossary& g, std::string_view language);

  // Every (range, entry) whose folded words equal a glossary term, before any
  // overlap resolution. Ordered by begin, then length.
  std::vector<TermMatch> Candidates(const TokenizedSentence& sentence) const;

  // Non-overlapping matches: candidates are taken longest first, leftmost on
  // ties, and a candidate overlapping an already taken one is dropped.
  // Result is sorted by start index.
  std::vector<TermMatch> Find(const TokenizedSentence& sentence) const;

  std::size_t max_term_words() const { return max_words_; }

 private:
  struct Node {
    std::map<std::string, std::size_t, std::less<>> children;
    std::vector<const GlossaryEntry*> entries;
  };

  std::vector<Node> nodes_;
  std::size_t max_words_ = 0;
};

// Resolution rule shared with the brute-force tests: keeps the longest
// candidates first (leftmost on ties) and drops any that overlap.
std::vector<TermMatch> ResolveOverlaps(std::vector<TermMatch> candidates);

std::vector<TermMatch> FindMatches(const TokenizedSentence& sentence,
                                   const Glossary& g, std::string_view language);

}  // namespace termforge

#endif  // TERMFORGE_MATCHER_H_
