#include "termforge/text.h"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/uscript.h>
#include <unicode/utf8.h>

#include "termforge/error.h"

namespace termforge::text {

std::u32string Decode(std::string_view utf8) {
  std::u32string out;
  out.reserve(utf8.size());
  const auto* s = reinterpret_cast<const uint8_t*>(utf8.data());
  const int32_t length = static_cast<int32_t>(utf8.size());
  int32_t i = 0;
  while (i < length) {
    UChar32 c;
    U8_NEXT(s, i, length, c);
    out.push_back(c < 0 ? U'�' : static_cast<char32_t>(c));
  }
  return out;
}

std::string Encode(char32_t codepoint) {
  char buf[U8_MAX_LENGTH];
  int32_t len = 0;
  UBool error = false;
  U8_APPEND(reinterpret_cast<uint8_t*>(buf), len, U8_MAX_LENGTH,
            static_cast<UChar32>(codepoint), error);
  if (error) return "\xEF\xBF\xBD";
  return std::string(buf, len);
}

std::string Encode(std::u32string_view codepoints) {
  std::string out;
  out.reserve(codepoints.size());
  for (char32_t c : codepoints) out += Encode(c);
  return out;
}

std::string Nfc(std::string_view s) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw Error("ICU NFC normalizer unavailable");
  icu::UnicodeString in = icu::UnicodeString::fromUTF8(
      icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
  icu::UnicodeString out = nfc->normalize(in, status);
  if (U_FAILURE(status)) throw Error("NFC normalization failed");
  std::string result;
  out.toUTF8String(result);
  return result;
}

std::string CaseFold(std::string_view s) {
  icu::UnicodeString u = icu::UnicodeString::fromUTF8(
      icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
  u.foldCase();
  std::string result;
  u.toUTF8String(result);
  return result;
}

bool IsSpace(char32_t c) { return u_isUWhiteSpace(static_cast<UChar32>(c)); }
bool IsAlnum(char32_t c) { return u_isalnum(static_cast<UChar32>(c)); }
bool IsPunct(char32_t c) {
  const auto cp = static_cast<UChar32>(c);
  return u_ispunct(cp) || u_charType(cp) == U_MATH_SYMBOL ||
         u_charType(cp) == U_CURRENCY_SYMBOL ||
         u_charType(cp) == U_MODIFIER_SYMBOL ||
         u_charType(cp) == U_OTHER_SYMBOL;
}
bool IsUpper(char32_t c) { return u_isupper(static_cast<UChar32>(c)); }
bool IsLetter(char32_t c) { return u_isalpha(static_cast<UChar32>(c)); }

bool IsCjk(char32_t c) {
  UErrorCode status = U_ZERO_ERROR;
  const UScriptCode script = uscript_getScript(static_cast<UChar32>(c), &status);
  if (U_FAILURE(status)) return false;
  return script == USCRIPT_HAN || script == USCRIPT_HIRAGANA ||
         script == USCRIPT_KATAKANA || script == USCRIPT_HANGUL;
}

std::string Trim(std::string_view s) {
  const std::u32string cps = Decode(s);
  std::size_t begin = 0;
  std::size_t end = cps.size();
  while (begin < end && IsSpace(cps[begin])) ++begin;
  while (end > begin && IsSpace(cps[end - 1])) --end;
  return Encode(std::u32string_view(cps).substr(begin, end - begin));
}

std::string NormalizeTerm(std::string_view s) {
  return Join(SplitWhitespace(Nfc(s)), " ");
}

std::string FoldKey(std::string_view s) { return CaseFold(NormalizeTerm(s)); }

std::size_t CountNonSpaceChars(std::string_view s) {
  std::size_t n = 0;
  for (char32_t c : Decode(s)) {
    if (!IsSpace(c)) ++n;
  }
  return n;
}

std::vector<std::string> SplitWhitespace(std::string_view s) {
  std::vector<std::string> out;
  std::u32string current;
  for (char32_t c : Decode(s)) {
    if (IsSpace(c)) {
      if (!current.empty()) out.push_back(Encode(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) out.push_back(Encode(current));
  return out;
}

std::string Join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace termforge::text
