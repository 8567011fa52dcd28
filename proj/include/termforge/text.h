#ifndef TERMFORGE_TEXT_H_
#define TERMFORGE_TEXT_H_

#include <string>
#include <string_view>
#include <vector>

// UTF-8 helpers shared by every module. All strings in the library are UTF-8;
// invalid sequences are replaced with U+FFFD on decode.
namespace termforge::text {

std::u32string Decode(std::string_view utf8);
std::string Encode(std::u32string_view codepoints);
std::string Encode(char32_t codepoint);

// Canonical composition (NFC).
std::string Nfc(std::string_view s);

// Full Unicode case folding. A no-op for caseless scripts.
std::string CaseFold(std::string_view s);

// Trims leading and trailing Unicode white space.
std::string Trim(std::string_view s);

// NFC, trim, and collapse every internal white-space run to one U+0020.
// This is the key normalization for glossary terms.
std::string NormalizeTerm(std::string_view s);

// NormalizeTerm followed by case folding; used where comparisons are
// case-insensitive (votes, dedup, coverage).
std::string FoldKey(std::string_view s);

bool IsSpace(char32_t c);
bool IsAlnum(char32_t c);
bool IsPunct(char32_t c);
bool IsUpper(char32_t c);
bool IsLetter(char32_t c);

// Han ideographs, kana, and Hangul syllables: scripts written without
// inter-word spaces, segmented one character per word by default.
bool IsCjk(char32_t c);

// Number of Unicode scalar values that are not white space.
std::size_t CountNonSpaceChars(std::string_view s);

// Splits on Unicode white space, dropping empty pieces.
std::vector<std::string> SplitWhitespace(std::string_view s);

std::string Join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace termforge::text

#endif  // TERMFORGE_TEXT_H_
