#ifndef TERMFORGE_TOKENIZER_H_
#define TERMFORGE_TOKENIZER_H_

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace termforge {

// Half-open byte range into a UTF-8 string.
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  friend bool operator==(const Span&, const Span&) = default;
};

// A sentence split into words. word_spans are byte offsets into text, strictly
// ascending and non-overlapping, and text.substr(span) == word.
struct TokenizedSentence {
  std::string text;
  std::vector<std::string> words;
  std::vector<Span> word_spans;

  std::size_t size() const { return words.size(); }

  // Builds a sentence from pre-split words, joined with the language's
  // separator (see JoinsWithSpace).
  static TokenizedSentence FromWords(std::vector<std::string> words,
                                     std::string_view language);
};

// Languages written without inter-word spaces (zh, ja) join with "".
bool JoinsWithSpace(std::string_view language);

// Default segmentation:
//  * white space separates words and is never part of one;
//  * every punctuation or symbol character is its own word, except '-', '\''
//    and U+2019 when flanked by alphanumerics on both sides, and '.' or ','
//    between two digits ("state-of-the-art", "don't", "3.5" stay whole);
//  * Han, kana, and Hangul characters are one word each.
// Deterministic; spans cover every non-space character exactly once.
TokenizedSentence Tokenize(std::string_view text, std::string_view language);

// Strategy used where words are counted (lexical statistics) or compared
// (metrics). Implementations must be thread-safe.
class WordSegmenter {
 public:
  virtual ~WordSegmenter() = default;
  virtual std::vector<std::string> Segment(std::string_view text) const = 0;
};

// Tokenize()-backed segmenter for one language.
class DefaultSegmenter : public WordSegmenter {
 public:
  explicit DefaultSegmenter(std::string language)
      : language_(std::move(language)) {}
  std::vector<std::string> Segment(std::string_view text) const override;

 private:
  std::string language_;
};

// Pure white-space splitting.
class WhitespaceSegmenter : public WordSegmenter {
 public:
  std::vector<std::string> Segment(std::string_view text) const override;
};

std::unique_ptr<WordSegmenter> MakeSegmenter(std::string_view language);

}  // namespace termforge

#endif  // TERMFORGE_TOKENIZER_H_
