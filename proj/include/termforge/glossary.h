#ifndef TERMFORGE_GLOSSARY_H_
#define TERMFORGE_GLOSSARY_H_

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "termforge/tokenizer.h"

namespace termforge {

enum class Provenance { kExtracted, kExternal, kMerged };

std::string_view ToString(Provenance p);
// Throws ValidationError on an unknown name.
Provenance ParseProvenance(std::string_view name);

inline constexpr std::size_t kMaxContexts = 3;

// One (source term, language) -> translation mapping.
struct GlossaryEntry {
  std::string source_term;
  std::string language;
  std::string translation;
  std::vector<std::string> contexts;
  std::vector<std::string> domains;
  Provenance provenance = Provenance::kExternal;

  friend bool operator==(const GlossaryEntry&, const GlossaryEntry&) = default;
};

// Immutable collection of validated entries with a per-language index keyed by
// the normalized source term. Construction normalizes every entry (NFC,
// collapsed white space, lower-case language code) and rejects duplicates.
// Concurrent reads are safe.
class Glossary {
 public:
  Glossary() = default;

  // Throws EmptyFieldError, ValidationError (more than three contexts) or
  // DuplicateKeyError.
  static Glossary FromEntries(std::vector<GlossaryEntry> entries);

  const std::vector<GlossaryEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  // Entries for one language, in insertion order.
  std::vector<const GlossaryEntry*> ForLanguage(std::string_view language) const;
  std::vector<std::string> Languages() const;

  const GlossaryEntry* Find(std::string_view source_term,
                            std::string_view language) const;

 private:
  std::vector<GlossaryEntry> entries_;
  std::map<std::string, std::unordered_map<std::string, std::size_t>, std::less<>>
      index_;
};

// Normalizes a raw entry in place the same way Glossary does.
GlossaryEntry NormalizeEntry(GlossaryEntry entry);

enum class GlossaryFormat { kJsonl, kTsv };

// Picks the format from the file extension (.tsv / anything else -> jsonl).
GlossaryFormat FormatFromPath(const std::filesystem::path& path);

Glossary ParseGlossary(std::string_view content, GlossaryFormat format);
Glossary LoadGlossary(const std::filesystem::path& path, GlossaryFormat format);
std::string SerializeGlossary(const Glossary& g, GlossaryFormat format);
void SaveGlossary(const Glossary& g, const std::filesystem::path& path,
                  GlossaryFormat format);

enum class MergePolicy { kPreferBase, kPreferOther, kErrorOnConflict };
MergePolicy ParseMergePolicy(std::string_view name);

// Union of both glossaries. Keys present on both sides with the same
// translation keep the base entry; differing translations are resolved by
// policy and the winner is marked Provenance::kMerged.
Glossary Merge(const Glossary& base, const Glossary& other, MergePolicy policy);

std::optional<GlossaryEntry> Lookup(const Glossary& g,
                                    std::string_view source_term,
                                    std::string_view language);

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation
};

struct LexicalStats {
  std::size_t n_terms = 0;
  std::size_t unique_src_words = 0;
  std::size_t unique_tgt_words = 0;
  MeanStd src_words_per_term;
  MeanStd tgt_words_per_term;
  MeanStd src_chars_per_term;
  MeanStd tgt_chars_per_term;
};

// Statistics over every entry of `language`. Words come from the segmenters;
// characters are Unicode scalar values excluding white space. Throws
// NoEntriesError when the language has no entries.
LexicalStats ComputeLexicalStats(const Glossary& g, std::string_view language,
                                 const WordSegmenter& src_segmenter,
                                 const WordSegmenter& tgt_segmenter);

}  // namespace termforge

#endif  // TERMFORGE_GLOSSARY_H_
