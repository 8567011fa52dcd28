#include <unicode/utf8.h>

#include "termforge/text.h"
#include "termforge/tokenizer.h"

namespace termforge {
namespace {

struct Codepoint {
  char32_t value;
  std::size_t begin;
  std::size_t end;
};

std::vector<Codepoint> DecodeWithOffsets(std::string_view s) {
  std::vector<Codepoint> out;
  const auto* bytes = reinterpret_cast<const uint8_t*>(s.data());
  const int32_t length = static_cast<int32_t>(s.size());
  int32_t i = 0;
  while (i < length) {
    const int32_t start = i;
    UChar32 c;
    U8_NEXT(bytes, i, length, c);
    out.push_back({c < 0 ? U'�' : static_cast<char32_t>(c),
                   static_cast<std::size_t>(start),
                   static_cast<std::size_t>(i)});
  }
  return out;
}

bool IsWordInternalJoiner(const std::vector<Codepoint>& cps, std::size_t i) {
  if (i == 0 || i + 1 >= cps.size()) return false;
  const char32_t c = cps[i].value;
  const char32_t prev = cps[i - 1].value;
  const char32_t next = cps[i + 1].value;
  if (c == U'-' || c == U'\'' || c == U'’') {
    return text::IsAlnum(prev) && text::IsAlnum(next) && !text::IsCjk(prev) &&
           !text::IsCjk(next);
  }
  if (c == U'.' || c == U',') {
    return prev >= U'0' && prev <= U'9' && next >= U'0' && next <= U'9';
  }
  return false;
}

}  // namespace

bool JoinsWithSpace(std::string_view language) {
  return !(language == "zh" || language == "ja" ||
           language.starts_with("zh-") || language.starts_with("ja-"));
}

TokenizedSentence Tokenize(std::string_view input, std::string_view /*language*/) {
  TokenizedSentence out;
  out.text = std::string(input);
  const std::vector<Codepoint> cps = DecodeWithOffsets(input);

  std::size_t word_begin = 0;
  bool in_word = false;
  auto close_word = [&](std::size_t end) {
    if (!in_word) return;
    out.word_spans.push_back({word_begin, end});
    out.words.push_back(out.text.substr(word_begin, end - word_begin));
    in_word = false;
  };

  for (std::size_t i = 0; i < cps.size(); ++i) {
    const Codepoint& cp = cps[i];
    if (text::IsSpace(cp.value)) {
      close_word(cp.begin);
      continue;
    }
    const bool standalone =
        text::IsCjk(cp.value) ||
        (text::IsPunct(cp.value) && !IsWordInternalJoiner(cps, i));
    if (standalone) {
      close_word(cp.begin);
      out.word_spans.push_back({cp.begin, cp.end});
      out.words.push_back(out.text.substr(cp.begin, cp.end - cp.begin));
      continue;
    }
    if (!in_word) {
      in_word = true;
      word_begin = cp.begin;
    }
  }
  close_word(out.text.size());
  return out;
}

TokenizedSentence TokenizedSentence::FromWords(std::vector<std::string> words,
                                               std::string_view language) {
  TokenizedSentence out;
  const std::string sep = JoinsWithSpace(language) ? " " : "";
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i > 0) out.text += sep;
    const std::size_t begin = out.text.size();
    out.text += words[i];
    out.word_spans.push_back({begin, out.text.size()});
  }
  out.words = std::move(words);
  return out;
}

std::vector<std::string> DefaultSegmenter::Segment(std::string_view s) const {
  return Tokenize(s, language_).words;
}

std::vector<std::string> WhitespaceSegmenter::Segment(std::string_view s) const {
  return text::SplitWhitespace(s);
}

std::unique_ptr<WordSegmenter> MakeSegmenter(std::string_view language) {
  return std::make_unique<DefaultSegmenter>(std::string(language));
}

}  // namespace termforge
