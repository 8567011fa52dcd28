#include "termforge/matcher.h"

#include <algorithm>

#include "termforge/text.h"

namespace termforge {
namespace {

std::vector<std::string> FoldedWords(const std::vector<std::string>& words) {
  std::vector<std::string> out;
  out.reserve(words.size());
  for (const std::string& w : words) out.push_back(text::CaseFold(text::Nfc(w)));
  return out;
}

}  // namespace

TermIndex::TermIndex(const Glossary& g, std::string_view language) {
  nodes_.emplace_back();
  for (const GlossaryEntry* e : g.ForLanguage(language)) {
    const TokenizedSentence term = Tokenize(e->source_term, "en");
    if (term.words.empty()) continue;
    std::size_t node = 0;
    for (const std::string& w : FoldedWords(term.words)) {
      auto it = nodes_[node].children.find(w);
      if (it == nodes_[node].children.end()) {
        nodes_.emplace_back();
        it = nodes_[node].children.emplace(w, nodes_.size() - 1).first;
      }
      node = it->second;
    }
    // Several entries can fold to the same key ("Beam search" vs "beam
    // search"); an exact-case hit is preferred at match time.
    nodes_[node].entries.push_back(e);
    max_words_ = std::max(max_words_, term.words.size());
  }
}

std::vector<TermMatch> TermIndex::Candidates(
    const TokenizedSentence& sentence) const {
  std::vector<TermMatch> out;
  const std::vector<std::string> folded = FoldedWords(sentence.words);
  for (std::size_t start = 0; start < folded.size(); ++start) {
    std::size_t node = 0;
    for (std::size_t end = start; end < folded.size(); ++end) {
      auto it = nodes_[node].children.find(folded[end]);
      if (it == nodes_[node].children.end()) break;
      node = it->second;
      const auto& entries = nodes_[node].entries;
      if (entries.empty()) continue;
      TermMatch m;
      m.word_range = {start, end + 1};
      const std::size_t b = sentence.word_spans[start].begin;
      const std::size_t e = sentence.word_spans[end].end;
      m.surface = sentence.text.substr(b, e - b);
      m.entry = entries.front();
      const std::string normalized = text::NormalizeTerm(m.surface);
      for (const GlossaryEntry* candidate : entries) {
        if (candidate->source_term == normalized) {
          m.entry = candidate;
          break;
        }
      }
      out.push_back(std::move(m));
    }
  }
  return out;
}

std::vector<TermMatch> ResolveOverlaps(std::vector<TermMatch> candidates) {
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const TermMatch& a, const TermMatch& b) {
                     if (a.word_range.size() != b.word_range.size()) {
                       return a.word_range.size() > b.word_range.size();
                     }
                     return a.word_range.begin < b.word_range.begin;
                   });
  std::vector<TermMatch> kept;
  for (TermMatch& c : candidates) {
    const bool clash = std::any_of(kept.begin(), kept.end(), [&](const TermMatch& k) {
      return k.word_range.Overlaps(c.word_range);
    });
    if (!clash) kept.push_back(std::move(c));
  }
  std::sort(kept.begin(), kept.end(), [](const TermMatch& a, const TermMatch& b) {
    return a.word_range.begin < b.word_range.begin;
  });
  return kept;
}

std::vector<TermMatch> TermIndex::Find(const TokenizedSentence& sentence) const {
  return ResolveOverlaps(Candidates(sentence));
}

std::vector<TermMatch> FindMatches(const TokenizedSentence& sentence,
                                   const Glossary& g, std::string_view language) {
  return TermIndex(g, language).Find(sentence);
}

}  // namespace termforge
