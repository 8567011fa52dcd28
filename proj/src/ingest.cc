#include "termforge/ingest.h"

#include <algorithm>
#include <array>
#include <regex>

#include <json.hpp>

#include "termforge/error.h"
#include "termforge/text.h"

namespace termforge {
namespace {

constexpr std::array<std::string_view, 16> kNonTerminalAbbreviations = {
    "e.g", "i.e", "al", "etc", "vs", "fig", "figs", "eq", "eqs",
    "cf", "dr", "mr", "mrs", "ms", "prof", "sec"};

constexpr std::array<std::string_view, 44> kFunctionWords = {
    "a",    "an",    "the",   "of",    "in",    "on",    "at",   "for",  "to",
    "with", "by",    "from",  "into",  "onto",  "via",   "as",   "about", "and",
    "or",   "but",   "nor",   "than",  "that",  "which", "who",  "whose", "this",
    "these", "those", "it",   "its",   "their", "is",    "are",  "was",  "were",
    "be",   "been",  "being", "has",   "have",  "can",   "will", "using"};

bool IsClosing(char32_t c) {
  return c == U'"' || c == U'\'' || c == U')' || c == U']' || c == U'”' || c == U'’' ||
         c == U'»';
}

bool StartsSentence(char32_t c) {
  return text::IsUpper(c) || (c >= U'0' && c <= U'9') || c == U'"' || c == U'“' ||
         c == U'(' || text::IsCjk(c);
}

// Word ending right before position `dot` (exclusive), lowercased ASCII.
std::string WordBefore(const std::u32string& s, std::size_t dot) {
  std::size_t b = dot;
  while (b > 0 && !text::IsSpace(s[b - 1])) --b;
  std::string w = text::Encode(std::u32string_view(s).substr(b, dot - b));
  while (!w.empty() && (w.front() == '(' || w.front() == '"')) w.erase(w.begin());
  std::transform(w.begin(), w.end(), w.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return w;
}

bool IsNonTerminal(const std::u32string& s, std::size_t dot) {
  const std::string w = WordBefore(s, dot);
  if (text::Decode(w).size() == 1) return true;  // initials
  return std::find(kNonTerminalAbbreviations.begin(), kNonTerminalAbbreviations.end(), w) !=
         kNonTerminalAbbreviations.end();
}

std::string StripListMarker(std::string s) {
  static const std::regex marker(R"(^\s*(?:[-*•]|\d+[.)])\s+)");
  s = std::regex_replace(s, marker, "", std::regex_constants::format_first_only);
  s = text::Trim(s);
  auto strip_pair = [&](std::string_view open, std::string_view close) {
    if (s.size() >= open.size() + close.size() && s.starts_with(open) && s.ends_with(close)) {
      s = text::Trim(s.substr(open.size(), s.size() - open.size() - close.size()));
    }
  };
  strip_pair("\"", "\"");
  strip_pair("“", "”");
  strip_pair("'", "'");
  return s;
}

}  // namespace

std::vector<std::string> SplitSentences(std::string_view input) {
  const std::u32string s = text::Decode(input);
  std::vector<std::string> out;
  std::size_t start = 0;
  auto emit = [&](std::size_t end) {
    std::string sent = text::Trim(text::Encode(std::u32string_view(s).substr(start, end - start)));
    if (!sent.empty()) out.push_back(std::move(sent));
    start = end;
  };
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char32_t c = s[i];
    if (c != U'.' && c != U'!' && c != U'?' && c != U'。' && c != U'！' && c != U'？') continue;
    std::size_t end = i + 1;
    while (end < s.size() && IsClosing(s[end])) ++end;
    if (c == U'。' || c == U'！' || c == U'？') {
      emit(end);
      i = end - 1;
      continue;
    }
    std::size_t next = end;
    while (next < s.size() && text::IsSpace(s[next])) ++next;
    if (next == end || next == s.size()) continue;
    if (!StartsSentence(s[next])) continue;
    if (c == U'.' && IsNonTerminal(s, i)) continue;
    emit(end);
    i = end - 1;
  }
  emit(s.size());
  return out;
}

std::vector<Chunk> ChunkText(const std::vector<std::string>& sentences,
                             std::string_view source_doc, std::size_t max_words) {
  if (max_words == 0) throw ValidationError("max_words must be at least 1");
  std::vector<Chunk> chunks;
  std::vector<std::string> open;
  auto close = [&] {
    if (open.empty()) return;
    chunks.push_back(Chunk{text::Join(open, " "), open.size(), std::string(source_doc),
                           chunks.size()});
    open.clear();
  };
  for (const std::string& sentence : sentences) {
    std::vector<std::string> words = text::SplitWhitespace(sentence);
    if (words.empty()) continue;
    if (open.size() + words.size() > max_words) close();
    std::size_t pos = 0;
    while (words.size() - pos > max_words) {
      open.assign(words.begin() + pos, words.begin() + pos + max_words);
      close();
      pos += max_words;
    }
    open.insert(open.end(), words.begin() + pos, words.end());
  }
  close();
  return chunks;
}

TermCandidate RecordContext(TermCandidate cand, const Chunk& chunk) {
  cand.doc_ids.insert(chunk.source_doc);
  const bool present = std::any_of(cand.contexts.begin(), cand.contexts.end(), [&](const Chunk& c) {
    return c.source_doc == chunk.source_doc && c.index == chunk.index;
  });
  if (!present && cand.contexts.size() < kMaxTermContexts) cand.contexts.push_back(chunk);
  return cand;
}

std::string_view ToString(DropReason r) {
  switch (r) {
    case DropReason::kSinglePaper: return "single_paper";
    case DropReason::kSpecialChar: return "special_char";
    case DropReason::kAbbreviation: return "abbreviation";
    case DropReason::kNonNounPhrase: return "non_noun_phrase";
    case DropReason::kDuplicate: return "duplicate";
  }
  return "unknown";
}

bool IsAbbreviation(std::string_view term) {
  static const std::regex caps(R"(^[A-Z]{2,6}s?$)");
  static const std::regex dotted(R"(^(?:[A-Za-z]\.){2,}$)");
  const std::string t = text::Trim(term);
  return std::regex_match(t, caps) || std::regex_match(t, dotted);
}

bool EndsInFunctionWord(std::string_view term) {
  const std::vector<std::string> words = text::SplitWhitespace(term);
  if (words.empty()) return false;
  const std::string last = text::CaseFold(words.back());
  return std::find(kFunctionWords.begin(), kFunctionWords.end(), last) != kFunctionWords.end();
}

FilterResult FilterCandidates(const std::vector<TermCandidate>& cands) {
  FilterResult r;
  std::set<std::string> seen;
  for (const TermCandidate& c : cands) {
    const std::u32string cps = text::Decode(text::Trim(c.term));
    std::optional<DropReason> reason;
    if (c.doc_ids.size() < 2) {
      reason = DropReason::kSinglePaper;
    } else if (cps.empty() || !text::IsAlnum(cps.front())) {
      reason = DropReason::kSpecialChar;
    } else if (IsAbbreviation(c.term)) {
      reason = DropReason::kAbbreviation;
    } else if (EndsInFunctionWord(c.term)) {
      reason = DropReason::kNonNounPhrase;
    } else if (!seen.insert(text::FoldKey(c.term)).second) {
      reason = DropReason::kDuplicate;
    }
    if (reason) {
      r.dropped.push_back({c, *reason});
    } else {
      r.kept.push_back(c);
    }
  }
  return r;
}

PromptSpec BuildExtractPrompt(const Chunk& chunk) {
  return Render(TemplateId::kExtractTerms, {{"chunk", chunk.text}});
}

std::vector<std::string> ParseTermList(std::string_view response) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    std::string t = StripListMarker(cur);
    if (!t.empty()) out.push_back(text::NormalizeTerm(t));
    cur.clear();
  };
  for (char c : response) {
    if (c == ';' || c == '\n') {
      flush();
    } else {
      cur += c;
    }
  }
  flush();
  return out;
}

PromptSpec BuildFilterPrompt(const std::vector<std::string>& candidates) {
  std::string block;
  for (const std::string& c : candidates) block += "- " + text::NormalizeTerm(c) + "\n";
  return Render(TemplateId::kFilterNonAi, {{"candidates", block}});
}

PromptSpec BuildDomainPrompt(std::string_view term, const std::vector<std::string>& taxonomy) {
  if (taxonomy.empty()) throw ValidationError("domain taxonomy is empty");
  std::string options;
  for (const std::string& label : taxonomy) options += "- " + label + "\n";
  options += "- " + std::string(kOtherDomain) + "\n";
  return Render(TemplateId::kClassifyDomain,
                {{"term", std::string(term)}, {"options", options}});
}

std::string ParseDomainResponse(std::string_view response,
                                const std::vector<std::string>& taxonomy,
                                const LogSink& log) {
  std::string answer = StripListMarker(std::string(response));
  while (!answer.empty() && answer.back() == '.') answer.pop_back();
  const std::string key = text::FoldKey(answer);
  for (const std::string& label : taxonomy) {
    if (text::FoldKey(label) == key) return label;
  }
  if (key == text::FoldKey(kOtherDomain)) return std::string(kOtherDomain);
  if (log) log("domain answer '" + text::Trim(response) + "' is not an option; using Other");
  return std::string(kOtherDomain);
}

PromptSpec BuildNeedsTranslationPrompt(std::string_view term, std::string_view target_lang) {
  return Render(TemplateId::kNeedsTranslation,
                {{"term", std::string(term)},
                 {"target_lang", std::string(target_lang)}});
}

bool ParseNeedsTranslation(std::string_view response) {
  std::string a = text::CaseFold(StripListMarker(std::string(response)));
  while (!a.empty() && a.back() == '.') a.pop_back();
  if (a == "translate") return true;
  if (a == "keep") return false;
  throw MalformedResponseError("expected 'translate' or 'keep', got '" +
                               std::string(response) + "'");
}

std::string SerializeCandidates(const std::vector<TermCandidate>& cands) {
  std::string out;
  for (const TermCandidate& c : cands) {
    nlohmann::ordered_json doc;
    doc["term"] = c.term;
    doc["doc_ids"] = c.doc_ids;
    nlohmann::ordered_json ctx = nlohmann::ordered_json::array();
    for (const Chunk& ch : c.contexts) {
      ctx.push_back({{"doc", ch.source_doc}, {"index", ch.index}, {"text", ch.text}});
    }
    doc["contexts"] = std::move(ctx);
    out += doc.dump() + "\n";
  }
  return out;
}

std::vector<TermCandidate> ParseCandidates(std::string_view jsonl) {
  std::vector<TermCandidate> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < jsonl.size()) {
    std::size_t nl = jsonl.find('\n', pos);
    if (nl == std::string_view::npos) nl = jsonl.size();
    const std::string_view line = jsonl.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (text::Trim(line).empty()) continue;
    try {
      const auto doc = nlohmann::json::parse(line);
      TermCandidate c;
      c.term = doc.at("term").get<std::string>();
      c.doc_ids = doc.at("doc_ids").get<std::set<std::string>>();
      if (doc.contains("contexts")) {
        for (const auto& ch : doc["contexts"]) {
          const std::string t = ch.at("text").get<std::string>();
          c.contexts.push_back(Chunk{t, text::SplitWhitespace(t).size(),
                                     ch.at("doc").get<std::string>(),
                                     ch.at("index").get<std::size_t>()});
        }
      }
      if (c.contexts.size() > kMaxTermContexts) {
        throw ParseError(line_no, "more than 3 contexts");
      }
      out.push_back(std::move(c));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return out;
}

}  // namespace termforge
