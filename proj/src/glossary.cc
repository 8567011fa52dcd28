#include "termforge/glossary.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "termforge/error.h"
#include "termforge/text.h"

namespace termforge {
namespace {

using nlohmann::json;

std::string LowerAscii(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string_view> SplitLines(std::string_view content) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= content.size()) {
    std::size_t end = content.find('\n', start);
    if (end == std::string_view::npos) end = content.size();
    std::string_view line = content.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (end == content.size()) break;
    start = end + 1;
  }
  return lines;
}

std::vector<std::string> StringArray(const json& obj, const char* key,
                                     std::size_t line) {
  std::vector<std::string> out;
  if (!obj.contains(key) || obj[key].is_null()) return out;
  const json& arr = obj[key];
  if (!arr.is_array()) throw ParseError(line, std::string(key) + " must be an array");
  for (const json& v : arr) {
    if (!v.is_string()) {
      throw ParseError(line, std::string(key) + " must contain strings");
    }
    out.push_back(v.get<std::string>());
  }
  return out;
}

std::string RequiredString(const json& obj, const char* key, std::size_t line) {
  if (!obj.contains(key)) throw ParseError(line, std::string("missing key ") + key);
  if (!obj[key].is_string()) {
    throw ParseError(line, std::string(key) + " must be a string");
  }
  return obj[key].get<std::string>();
}

GlossaryEntry ParseJsonlLine(std::string_view line, std::size_t line_no) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(line_no, std::string("invalid JSON: ") + e.what());
  }
  if (!obj.is_object()) throw ParseError(line_no, "expected a JSON object");
  GlossaryEntry e;
  e.source_term = RequiredString(obj, "source_term", line_no);
  e.language = RequiredString(obj, "language", line_no);
  e.translation = RequiredString(obj, "translation", line_no);
  e.contexts = StringArray(obj, "contexts", line_no);
  e.domains = StringArray(obj, "domains", line_no);
  if (e.contexts.size() > kMaxContexts) {
    throw ParseError(line_no, "contexts has more than 3 items");
  }
  if (obj.contains("provenance") && !obj["provenance"].is_null()) {
    if (!obj["provenance"].is_string()) {
      throw ParseError(line_no, "provenance must be a string");
    }
    try {
      e.provenance = ParseProvenance(obj["provenance"].get<std::string>());
    } catch (const ValidationError& err) {
      throw ParseError(line_no, err.what());
    }
  }
  return e;
}

std::string TsvUnescape(std::string_view field, std::size_t line_no) {
  std::string out;
  for (std::size_t i = 0; i < field.size(); ++i) {
    if (field[i] != '\\') {
      out += field[i];
      continue;
    }
    if (i + 1 == field.size()) throw ParseError(line_no, "dangling backslash");
    switch (field[++i]) {
      case 't': out += '\t'; break;
      case 'n': out += '\n'; break;
      case '\\': out += '\\'; break;
      default: throw ParseError(line_no, "unknown escape sequence");
    }
  }
  return out;
}

std::string TsvEscape(std::string_view field) {
  std::string out;
  for (char c : field) {
    switch (c) {
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\\': out += "\\\\"; break;
      default: out += c;
    }
  }
  return out;
}

GlossaryEntry ParseTsvLine(std::string_view line, std::size_t line_no) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  if (fields.size() != 4) {
    throw ParseError(line_no, "expected 4 tab-separated columns, got " +
                                  std::to_string(fields.size()));
  }
  GlossaryEntry e;
  e.source_term = TsvUnescape(fields[0], line_no);
  e.language = TsvUnescape(fields[1], line_no);
  e.translation = TsvUnescape(fields[2], line_no);
  try {
    e.provenance = ParseProvenance(TsvUnescape(fields[3], line_no));
  } catch (const ValidationError& err) {
    throw ParseError(line_no, err.what());
  }
  return e;
}

MeanStd Moments(const std::vector<double>& xs) {
  MeanStd out;
  if (xs.empty()) return out;
  double sum = 0.0;
  for (double x : xs) sum += x;
  out.mean = sum / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - out.mean) * (x - out.mean);
  out.stddev = std::sqrt(ss / static_cast<double>(xs.size()));
  return out;
}

}  // namespace

std::string_view ToString(Provenance p) {
  switch (p) {
    case Provenance::kExtracted: return "extracted";
    case Provenance::kExternal: return "external";
    case Provenance::kMerged: return "merged";
  }
  return "external";
}

Provenance ParseProvenance(std::string_view name) {
  if (name == "extracted") return Provenance::kExtracted;
  if (name == "external") return Provenance::kExternal;
  if (name == "merged") return Provenance::kMerged;
  throw ValidationError("unknown provenance '" + std::string(name) + "'");
}

GlossaryEntry NormalizeEntry(GlossaryEntry entry) {
  entry.source_term = text::NormalizeTerm(entry.source_term);
  entry.translation = text::NormalizeTerm(entry.translation);
  entry.language = LowerAscii(text::Trim(entry.language));
  for (std::string& c : entry.contexts) c = text::Nfc(c);
  for (std::string& d : entry.domains) d = text::NormalizeTerm(d);
  return entry;
}

Glossary Glossary::FromEntries(std::vector<GlossaryEntry> entries) {
  Glossary g;
  g.entries_.reserve(entries.size());
  for (GlossaryEntry& raw : entries) {
    GlossaryEntry e = NormalizeEntry(std::move(raw));
    if (e.source_term.empty()) throw EmptyFieldError("source_term is empty");
    if (e.translation.empty()) {
      throw EmptyFieldError("translation for '" + e.source_term + "' is empty");
    }
    if (e.language.empty()) {
      throw EmptyFieldError("language for '" + e.source_term + "' is empty");
    }
    if (e.contexts.size() > kMaxContexts) {
      throw ValidationError("'" + e.source_term + "' has more than 3 contexts");
    }
    auto& lang_index = g.index_[e.language];
    if (lang_index.contains(e.source_term)) {
      throw DuplicateKeyError("duplicate key ('" + e.source_term + "', " +
                              e.language + ")");
    }
    lang_index.emplace(e.source_term, g.entries_.size());
    g.entries_.push_back(std::move(e));
  }
  return g;
}

std::vector<const GlossaryEntry*> Glossary::ForLanguage(
    std::string_view language) const {
  std::vector<const GlossaryEntry*> out;
  const std::string lang = LowerAscii(language);
  for (const GlossaryEntry& e : entries_) {
    if (e.language == lang) out.push_back(&e);
  }
  return out;
}

std::vector<std::string> Glossary::Languages() const {
  std::vector<std::string> out;
  for (const auto& [lang, idx] : index_) {
    if (!idx.empty()) out.push_back(lang);
  }
  return out;
}

const GlossaryEntry* Glossary::Find(std::string_view source_term,
                                    std::string_view language) const {
  auto lang_it = index_.find(LowerAscii(text::Trim(language)));
  if (lang_it == index_.end()) return nullptr;
  auto it = lang_it->second.find(text::NormalizeTerm(source_term));
  if (it == lang_it->second.end()) return nullptr;
  return &entries_[it->second];
}

GlossaryFormat FormatFromPath(const std::filesystem::path& path) {
  return path.extension() == ".tsv" ? GlossaryFormat::kTsv
                                    : GlossaryFormat::kJsonl;
}

Glossary ParseGlossary(std::string_view content, GlossaryFormat format) {
  std::vector<GlossaryEntry> entries;
  std::vector<std::size_t> line_numbers;
  const auto lines = SplitLines(content);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string_view line = lines[i];
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    entries.push_back(format == GlossaryFormat::kJsonl
                          ? ParseJsonlLine(line, i + 1)
                          : ParseTsvLine(line, i + 1));
    line_numbers.push_back(i + 1);
  }
  // Validate entry by entry so errors point at the offending line.
  std::set<std::pair<std::string, std::string>> seen;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const GlossaryEntry e = NormalizeEntry(entries[i]);
    const std::string where = "line " + std::to_string(line_numbers[i]) + ": ";
    if (e.source_term.empty()) throw EmptyFieldError(where + "source_term is empty");
    if (e.translation.empty()) throw EmptyFieldError(where + "translation is empty");
    if (e.language.empty()) throw EmptyFieldError(where + "language is empty");
    if (!seen.emplace(e.source_term, e.language).second) {
      throw DuplicateKeyError(where + "duplicate key ('" + e.source_term +
                              "', " + e.language + ")");
    }
  }
  return Glossary::FromEntries(std::move(entries));
}

Glossary LoadGlossary(const std::filesystem::path& path, GlossaryFormat format) {
  return ParseGlossary(ReadFile(path), format);
}

std::string SerializeGlossary(const Glossary& g, GlossaryFormat format) {
  std::string out;
  for (const GlossaryEntry& e : g.entries()) {
    if (format == GlossaryFormat::kTsv) {
      out += TsvEscape(e.source_term) + '\t' + TsvEscape(e.language) + '\t' +
             TsvEscape(e.translation) + '\t' + std::string(ToString(e.provenance));
    } else {
      json obj = json::object();
      obj["source_term"] = e.source_term;
      obj["language"] = e.language;
      obj["translation"] = e.translation;
      if (!e.contexts.empty()) obj["contexts"] = e.contexts;
      if (!e.domains.empty()) obj["domains"] = e.domains;
      obj["provenance"] = std::string(ToString(e.provenance));
      out += obj.dump(-1, ' ', false, json::error_handler_t::replace);
    }
    out += '\n';
  }
  return out;
}

void SaveGlossary(const Glossary& g, const std::filesystem::path& path,
                  GlossaryFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << SerializeGlossary(g, format);
}

MergePolicy ParseMergePolicy(std::string_view name) {
  if (name == "prefer_base") return MergePolicy::kPreferBase;
  if (name == "prefer_other") return MergePolicy::kPreferOther;
  if (name == "error_on_conflict") return MergePolicy::kErrorOnConflict;
  throw ValidationError("unknown merge policy '" + std::string(name) + "'");
}

Glossary Merge(const Glossary& base, const Glossary& other, MergePolicy policy) {
  std::vector<GlossaryEntry> merged;
  merged.reserve(base.size() + other.size());
  for (const GlossaryEntry& e : base.entries()) {
    const GlossaryEntry* theirs = other.Find(e.source_term, e.language);
    if (theirs == nullptr || theirs->translation == e.translation) {
      merged.push_back(e);
      continue;
    }
    switch (policy) {
      case MergePolicy::kErrorOnConflict:
        throw ConflictError("conflicting translations for ('" + e.source_term +
                            "', " + e.language + "): '" + e.translation +
                            "' vs '" + theirs->translation + "'");
      case MergePolicy::kPreferBase:
        merged.push_back(e);
        break;
      case MergePolicy::kPreferOther:
        merged.push_back(*theirs);
        break;
    }
    merged.back().provenance = Provenance::kMerged;
  }
  for (const GlossaryEntry& e : other.entries()) {
    if (base.Find(e.source_term, e.language) == nullptr) merged.push_back(e);
  }
  return Glossary::FromEntries(std::move(merged));
}

std::optional<GlossaryEntry> Lookup(const Glossary& g,
                                    std::string_view source_term,
                                    std::string_view language) {
  const GlossaryEntry* e = g.Find(source_term, language);
  if (e == nullptr) return std::nullopt;
  return *e;
}

LexicalStats ComputeLexicalStats(const Glossary& g, std::string_view language,
                                 const WordSegmenter& src_segmenter,
                                 const WordSegmenter& tgt_segmenter) {
  const auto entries = g.ForLanguage(language);
  if (entries.empty()) {
    throw NoEntriesError("no glossary entries for language '" +
                         std::string(language) + "'");
  }
  std::set<std::string> src_vocab;
  std::set<std::string> tgt_vocab;
  std::vector<double> src_words, tgt_words, src_chars, tgt_chars;
  for (const GlossaryEntry* e : entries) {
    const auto sw = src_segmenter.Segment(e->source_term);
    const auto tw = tgt_segmenter.Segment(e->translation);
    src_vocab.insert(sw.begin(), sw.end());
    tgt_vocab.insert(tw.begin(), tw.end());
    src_words.push_back(static_cast<double>(sw.size()));
    tgt_words.push_back(static_cast<double>(tw.size()));
    src_chars.push_back(static_cast<double>(text::CountNonSpaceChars(e->source_term)));
    tgt_chars.push_back(static_cast<double>(text::CountNonSpaceChars(e->translation)));
  }
  LexicalStats stats;
  stats.n_terms = entries.size();
  stats.unique_src_words = src_vocab.size();
  stats.unique_tgt_words = tgt_vocab.size();
  stats.src_words_per_term = Moments(src_words);
  stats.tgt_words_per_term = Moments(tgt_words);
  stats.src_chars_per_term = Moments(src_chars);
  stats.tgt_chars_per_term = Moments(tgt_chars);
  return stats;
}

}  // namespace termforge
