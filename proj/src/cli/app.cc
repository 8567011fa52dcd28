#include "app.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "termforge/aligner.h"
#include "termforge/decoder.h"
#include "termforge/embed_dump.h"
#include "termforge/error.h"
#include "termforge/glossary.h"
#include "termforge/ingest.h"
#include "termforge/llm_client.h"
#include "termforge/matcher.h"
#include "termforge/metrics.h"
#include "termforge/refiner.h"
#include "termforge/report.h"
#include "termforge/stats.h"
#include "termforge/substituter.h"
#include "termforge/text.h"
#include "termforge/tokenizer.h"

namespace termforge::cli {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

// Config file keys, dotted for nested objects. Flags given on the command line
// override them.
const std::set<std::string, std::less<>> kConfigKeys = {
    "glossary",           "source_lang",           "target_lang",
    "seed",               "aligner.threshold",     "decoder.beam_width",
    "decoder.max_len",    "decoder.boost_factor",  "decoder.boost_mode",
    "client.base_url",    "client.model",          "client.api_key_env",
    "client.timeout_s",   "client.max_retries",    "client.max_concurrency",
    "metrics.smoothing",  "metrics.char_order",    "metrics.chrf_pp_word_order",
    "metrics.beta",
};

void CollectKeys(const nlohmann::json& node, const std::string& prefix,
                 std::vector<std::string>& out) {
  for (auto it = node.begin(); it != node.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (it->is_object()) {
      CollectKeys(*it, key, out);
    } else {
      out.push_back(key);
    }
  }
}

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const fs::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("failed writing " + path.string());
}

// One segment per line; a final newline does not add an empty segment.
std::vector<std::string> ReadLines(const fs::path& path) {
  const std::string content = ReadFile(path);
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos < content.size()) {
    std::size_t nl = content.find('\n', pos);
    if (nl == std::string::npos) nl = content.size();
    std::string line = content.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    pos = nl + 1;
  }
  return lines;
}

std::vector<double> ReadNumbers(const fs::path& path) {
  std::vector<double> out;
  std::size_t line_no = 0;
  for (const std::string& line : ReadLines(path)) {
    ++line_no;
    const std::string t = text::Trim(line);
    if (t.empty()) continue;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size()) {
      throw ParseError(line_no, "not a number: '" + t + "'");
    }
    out.push_back(v);
  }
  return out;
}

std::vector<double> ParseNumberList(std::string_view s) {
  std::vector<double> out;
  for (const std::string& part : text::SplitWhitespace(std::string(s))) {
    std::size_t start = 0;
    while (start <= part.size()) {
      std::size_t comma = part.find(',', start);
      if (comma == std::string::npos) comma = part.size();
      const std::string item = part.substr(start, comma - start);
      if (!item.empty()) out.push_back(ParseFactor(item));
      start = comma + 1;
    }
  }
  return out;
}

std::vector<TokenId> ParseTokenList(std::string_view s) {
  std::vector<TokenId> out;
  for (double v : ParseNumberList(s)) {
    if (v != static_cast<double>(static_cast<TokenId>(v))) {
      throw ValidationError("token ids must be integers");
    }
    out.push_back(static_cast<TokenId>(v));
  }
  return out;
}

std::string TsvEscape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '\t') {
      out += "\\t";
    } else if (c == '\n') {
      out += "\\n";
    } else if (c == '\\') {
      out += "\\\\";
    } else {
      out += c;
    }
  }
  return out;
}

std::string TsvCell(const Json& v) {
  if (v.is_string()) return TsvEscape(v.get<std::string>());
  if (v.is_null()) return "";
  return TsvEscape(v.dump());
}

void Flatten(const Json& v, const std::string& prefix, std::string& out) {
  if (v.is_object()) {
    for (auto it = v.begin(); it != v.end(); ++it) {
      Flatten(*it, prefix.empty() ? it.key() : prefix + "." + it.key(), out);
    }
    return;
  }
  out += TsvEscape(prefix) + "\t" + TsvCell(v) + "\n";
}

// A document whose only array member holds objects becomes a table with one
// row per element; anything else becomes "dotted.key<TAB>value" lines.
std::string JsonToTsv(const Json& doc) {
  const Json* rows = nullptr;
  if (doc.is_object()) {
    for (auto it = doc.begin(); it != doc.end(); ++it) {
      if (it->is_array() && !it->empty() && it->front().is_object()) {
        if (rows != nullptr) {
          rows = nullptr;
          break;
        }
        rows = &*it;
      }
    }
  }
  std::string out;
  if (rows == nullptr) {
    Flatten(doc, "", out);
    return out;
  }
  std::vector<std::string> columns;
  for (const Json& row : *rows) {
    for (auto it = row.begin(); it != row.end(); ++it) {
      if (std::find(columns.begin(), columns.end(), it.key()) == columns.end()) {
        columns.push_back(it.key());
      }
    }
  }
  for (std::size_t c = 0; c < columns.size(); ++c) out += (c ? "\t" : "") + columns[c];
  out += "\n";
  for (const Json& row : *rows) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c) out += "\t";
      if (row.contains(columns[c])) out += TsvCell(row[columns[c]]);
    }
    out += "\n";
  }
  return out;
}

struct Globals {
  std::string config_path;
  std::string out_path;
  std::string format = "json";
};

class Context {
 public:
  Context(const Globals& g, std::ostream& out) : globals_(g), out_(out) {
    if (g.config_path.empty()) return;
    try {
      config_ = nlohmann::json::parse(ReadFile(g.config_path));
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(0, "config " + g.config_path + ": " + e.what());
    }
    if (!config_.is_object()) throw ValidationError("config must be a JSON object");
    std::vector<std::string> keys;
    CollectKeys(config_, "", keys);
    for (const std::string& k : keys) {
      if (!kConfigKeys.contains(k)) throw ValidationError("unknown config key '" + k + "'");
    }
  }

  // Flag value if the flag was given, else the config value, else the flag's
  // default.
  template <typename T>
  T Get(const CLI::Option* opt, const T& flag_value, std::string_view key) const {
    if (opt != nullptr && opt->count() > 0) return flag_value;
    const nlohmann::json* node = &config_;
    std::size_t start = 0;
    while (node != nullptr && start <= key.size()) {
      std::size_t dot = key.find('.', start);
      if (dot == std::string_view::npos) dot = key.size();
      const std::string part(key.substr(start, dot - start));
      node = node->is_object() && node->contains(part) ? &(*node)[part] : nullptr;
      start = dot + 1;
    }
    if (node == nullptr) return flag_value;
    try {
      return node->get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ValidationError("config key '" + std::string(key) + "' has the wrong type");
    }
  }

  bool tsv() const { return globals_.format == "tsv"; }

  void Emit(const Json& doc) const { Write(tsv() ? JsonToTsv(doc) : doc.dump(2) + "\n"); }

  void Write(std::string_view content) const {
    if (globals_.out_path.empty()) {
      out_ << content;
    } else {
      WriteFile(globals_.out_path, content);
    }
  }

 private:
  const Globals& globals_;
  std::ostream& out_;
  nlohmann::json config_ = nlohmann::json::object();
};

std::string Require(std::string value, std::string_view what) {
  if (value.empty()) throw CLI::RequiredError(std::string(what));
  return value;
}

Glossary LoadGlossaryFile(const std::string& path) {
  return LoadGlossary(path, FormatFromPath(path));
}

// Two-column source/translation file (tab- or comma-separated, optional
// header, CSV quoting). Repeated source terms keep their first translation.
Glossary ImportPairs(const std::string& path, const std::string& language, std::ostream& err) {
  const std::vector<std::string> lines = ReadLines(path);
  std::vector<GlossaryEntry> entries;
  std::set<std::string> seen;
  std::size_t skipped = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    if (text::Trim(line).empty()) continue;
    const char sep = line.find('\t') != std::string::npos ? '\t' : ',';
    std::vector<std::string> cells(1);
    bool quoted = false;
    for (std::size_t k = 0; k < line.size(); ++k) {
      const char c = line[k];
      if (sep == ',' && c == '"') {
        if (quoted && k + 1 < line.size() && line[k + 1] == '"') {
          cells.back() += '"';
          ++k;
        } else {
          quoted = !quoted;
        }
      } else if (c == sep && !quoted) {
        cells.emplace_back();
      } else {
        cells.back() += c;
      }
    }
    if (cells.size() < 2) throw ParseError(i + 1, "expected source and translation columns");
    if (i == 0 && (text::CaseFold(text::Trim(cells[0])) == "source" ||
                   text::CaseFold(text::Trim(cells[0])) == "term" ||
                   text::CaseFold(text::Trim(cells[0])) == "source_term")) {
      continue;
    }
    GlossaryEntry e;
    e.source_term = cells[0];
    e.translation = cells[1];
    e.language = language;
    e = NormalizeEntry(std::move(e));
    if (e.source_term.empty() || e.translation.empty()) {
      throw ParseError(i + 1, "empty source or translation");
    }
    if (!seen.insert(e.source_term).second) {
      ++skipped;
      continue;
    }
    entries.push_back(std::move(e));
  }
  if (skipped > 0) {
    err << "warning: " << skipped << " repeated source terms ignored\n";
  }
  return Glossary::FromEntries(std::move(entries));
}

Json StatsJson(const MeanStd& m) { return {{"mean", m.mean}, {"std", m.stddev}}; }

Json MatchJson(const TermMatch& m) {
  return {{"begin", m.word_range.begin},
          {"end", m.word_range.end},
          {"surface", m.surface},
          {"source_term", m.entry->source_term},
          {"translation", m.entry->translation}};
}

std::vector<std::vector<TermMatch>> MatchAll(const std::vector<std::string>& sources,
                                             const Glossary& g, const std::string& lang,
                                             const std::string& src_lang) {
  const TermIndex index(g, lang);
  std::vector<std::vector<TermMatch>> out;
  for (const std::string& s : sources) out.push_back(index.Find(Tokenize(s, src_lang)));
  return out;
}

std::vector<std::vector<TermMatch>> LoadMatches(const std::string& path, const Glossary& g,
                                                const std::string& lang,
                                                const std::vector<TokenizedSentence>& src) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(ReadFile(path));
    const auto& segs = doc.at("segments");
    if (segs.size() != src.size()) {
      throw LengthMismatchError("matches file has " + std::to_string(segs.size()) +
                                " segments, source has " + std::to_string(src.size()));
    }
    std::vector<std::vector<TermMatch>> out(src.size());
    for (std::size_t i = 0; i < src.size(); ++i) {
      for (const auto& m : segs[i].at("matches")) {
        TermMatch tm;
        tm.word_range = {m.at("begin").get<std::size_t>(), m.at("end").get<std::size_t>()};
        if (tm.word_range.begin >= tm.word_range.end || tm.word_range.end > src[i].size()) {
          throw ValidationError("segment " + std::to_string(i + 1) + ": match outside sentence");
        }
        tm.entry = g.Find(m.at("source_term").get<std::string>(), lang);
        if (tm.entry == nullptr) {
          throw ValidationError("segment " + std::to_string(i + 1) + ": '" +
                                m.at("source_term").get<std::string>() +
                                "' is not in the glossary");
        }
        const auto& spans = src[i].word_spans;
        tm.surface = src[i].text.substr(spans[tm.word_range.begin].begin,
                                        spans[tm.word_range.end - 1].end -
                                            spans[tm.word_range.begin].begin);
        out[i].push_back(std::move(tm));
      }
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, "matches file: " + std::string(e.what()));
  }
}

std::vector<Alignment> LoadAlignments(const std::string& path) {
  try {
    const auto doc = nlohmann::json::parse(ReadFile(path));
    std::vector<Alignment> out;
    for (const auto& seg : doc.at("segments")) {
      Alignment a;
      for (const auto& link : seg.at("links")) {
        a.links.insert({link.at(0).get<std::size_t>(), link.at(1).get<std::size_t>()});
      }
      out.push_back(std::move(a));
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, "alignments file: " + std::string(e.what()));
  }
}

std::vector<Alignment> AlignDump(const DumpFile& dump, const AlignerConfig& cfg) {
  std::vector<Alignment> out;
  for (const EmbeddedPair& p : dump.pairs) {
    out.push_back(Align(p.src.embeddings, p.tgt.embeddings, cfg));
  }
  return out;
}

Json LinksJson(const Alignment& a) {
  Json links = Json::array();
  for (const auto& [s, t] : a.links) links.push_back({s, t});
  return links;
}

void CheckDumpWords(const DumpFile& dump, const std::vector<TokenizedSentence>& src,
                    const std::vector<TokenizedSentence>& tgt) {
  if (dump.pairs.size() != src.size()) {
    throw LengthMismatchError("dump has " + std::to_string(dump.pairs.size()) +
                              " pairs, input has " + std::to_string(src.size()) + " segments");
  }
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (dump.pairs[i].src.words != src[i].words || dump.pairs[i].tgt.words != tgt[i].words) {
      throw ValidationError("segment " + std::to_string(i + 1) +
                            ": dump words differ from the tokenized input");
    }
  }
}

struct ClientFlags {
  std::string base_url;
  std::string model;
  std::string api_key_env = std::string(kApiKeyEnv);
  double timeout_s = 60.0;
  int max_retries = 3;
  int max_concurrency = 4;
  CLI::Option* o_base_url = nullptr;
  CLI::Option* o_model = nullptr;
  CLI::Option* o_key = nullptr;
  CLI::Option* o_timeout = nullptr;
  CLI::Option* o_retries = nullptr;
  CLI::Option* o_concurrency = nullptr;

  void Register(CLI::App* sub) {
    o_base_url = sub->add_option("--base-url", base_url, "Chat-completion endpoint base URL");
    o_model = sub->add_option("--model", model, "Model name sent with each request");
    o_key = sub->add_option("--api-key-env", api_key_env,
                            "Environment variable holding the API key");
    o_timeout = sub->add_option("--timeout", timeout_s, "Request timeout in seconds");
    o_retries = sub->add_option("--max-retries", max_retries, "Retries on transient failures");
    o_concurrency = sub->add_option("--max-concurrency", max_concurrency,
                                    "Requests in flight at once");
  }

  ClientConfig Resolve(const Context& ctx) const {
    ClientConfig cfg;
    cfg.base_url = ctx.Get(o_base_url, base_url, "client.base_url");
    cfg.model_name = ctx.Get(o_model, model, "client.model");
    cfg.api_key_env = ctx.Get(o_key, api_key_env, "client.api_key_env");
    const double t = ctx.Get(o_timeout, timeout_s, "client.timeout_s");
    if (!(t > 0.0)) throw ValidationError("timeout must be positive");
    cfg.timeout = std::chrono::milliseconds(static_cast<std::int64_t>(t * 1000.0));
    cfg.max_retries = ctx.Get(o_retries, max_retries, "client.max_retries");
    cfg.max_concurrency = ctx.Get(o_concurrency, max_concurrency, "client.max_concurrency");
    cfg.Validate();
    return cfg;
  }
};

// Shared language/glossary flags.
struct TermFlags {
  std::string glossary;
  std::string lang;
  std::string src_lang = "en";
  CLI::Option* o_glossary = nullptr;
  CLI::Option* o_lang = nullptr;
  CLI::Option* o_src_lang = nullptr;

  void Register(CLI::App* sub) {
    o_glossary = sub->add_option("--glossary", glossary, "Glossary file (.jsonl or .tsv)");
    o_lang = sub->add_option("--lang", lang, "Target language code");
    o_src_lang = sub->add_option("--src-lang", src_lang, "Source language code");
  }
  std::string Glossary(const Context& ctx) const {
    return Require(ctx.Get(o_glossary, glossary, "glossary"), "--glossary");
  }
  std::string Lang(const Context& ctx) const {
    return text::CaseFold(Require(ctx.Get(o_lang, lang, "target_lang"), "--lang"));
  }
  std::string SrcLang(const Context& ctx) const {
    return text::CaseFold(ctx.Get(o_src_lang, src_lang, "source_lang"));
  }
};

}  // namespace

int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Glossary-driven terminology tools for machine translation", "termforge"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals globals;
  app.add_option("--config", globals.config_path, "JSON config file; flags override it")
      ->check(CLI::ExistingFile);
  app.add_option("--out", globals.out_path, "Write the result here instead of stdout");
  app.add_option("--format", globals.format, "Output format")
      ->check(CLI::IsMember({"json", "tsv"}));

  std::function<void(Context&)> action;
  auto on = [&](CLI::App* sub, std::function<void(Context&)> f) {
    sub->fallthrough();
    sub->callback([&action, f = std::move(f)] { action = f; });
  };

  // glossary
  CLI::App* glossary = app.add_subcommand("glossary", "Inspect, merge and validate glossaries");
  glossary->require_subcommand(1);
  glossary->fallthrough();

  std::string g_in;
  std::string g_pairs;
  std::string g_lang;
  std::string g_src_lang = "en";
  std::string g_segmenter = "default";
  CLI::App* g_stats = glossary->add_subcommand("stats", "Lexical statistics for one language");
  g_stats->add_option("--in", g_in, "Glossary file")->check(CLI::ExistingFile);
  g_stats->add_option("--pairs", g_pairs, "Two-column source/translation file instead of --in")
      ->check(CLI::ExistingFile);
  CLI::Option* o_gs_lang = g_stats->add_option("--lang", g_lang, "Target language code");
  g_stats->add_option("--src-lang", g_src_lang, "Source language code");
  g_stats->add_option("--segmenter", g_segmenter, "Word segmentation")
      ->check(CLI::IsMember({"default", "whitespace"}));
  on(g_stats, [&](Context& ctx) {
    const std::string lang =
        text::CaseFold(Require(ctx.Get(o_gs_lang, g_lang, "target_lang"), "--lang"));
    Glossary g;
    if (!g_pairs.empty()) {
      g = ImportPairs(g_pairs, lang, err);
    } else {
      g = LoadGlossaryFile(Require(g_in, "--in or --pairs"));
    }
    std::unique_ptr<WordSegmenter> src_seg;
    std::unique_ptr<WordSegmenter> tgt_seg;
    if (g_segmenter == "whitespace") {
      src_seg = std::make_unique<WhitespaceSegmenter>();
      tgt_seg = std::make_unique<WhitespaceSegmenter>();
    } else {
      src_seg = MakeSegmenter(g_src_lang);
      tgt_seg = MakeSegmenter(lang);
    }
    const LexicalStats s = ComputeLexicalStats(g, lang, *src_seg, *tgt_seg);
    ctx.Emit({{"language", lang},
              {"n_terms", s.n_terms},
              {"unique_src_words", s.unique_src_words},
              {"unique_tgt_words", s.unique_tgt_words},
              {"src_words_per_term", StatsJson(s.src_words_per_term)},
              {"tgt_words_per_term", StatsJson(s.tgt_words_per_term)},
              {"src_chars_per_term", StatsJson(s.src_chars_per_term)},
              {"tgt_chars_per_term", StatsJson(s.tgt_chars_per_term)}});
  });

  std::string g_base;
  std::string g_other;
  std::string g_policy = "prefer_base";
  CLI::App* g_merge = glossary->add_subcommand("merge", "Merge two glossaries");
  g_merge->add_option("--base", g_base, "Base glossary")->required()->check(CLI::ExistingFile);
  g_merge->add_option("--other", g_other, "Glossary merged into the base")
      ->required()
      ->check(CLI::ExistingFile);
  g_merge->add_option("--policy", g_policy, "prefer_base, prefer_other or error_on_conflict");
  on(g_merge, [&](Context& ctx) {
    const Glossary merged =
        Merge(LoadGlossaryFile(g_base), LoadGlossaryFile(g_other), ParseMergePolicy(g_policy));
    ctx.Write(SerializeGlossary(merged, ctx.tsv() ? GlossaryFormat::kTsv : GlossaryFormat::kJsonl));
  });

  CLI::App* g_validate = glossary->add_subcommand("validate", "Check a glossary file");
  g_validate->add_option("--in", g_in, "Glossary file")->required()->check(CLI::ExistingFile);
  on(g_validate, [&](Context& ctx) {
    const Glossary g = LoadGlossaryFile(g_in);
    ctx.Emit({{"valid", true}, {"entries", g.size()}, {"languages", g.Languages()}});
  });

  // match
  TermFlags m_terms;
  std::string m_in;
  CLI::App* match = app.add_subcommand("match", "Find glossary terms in source sentences");
  m_terms.Register(match);
  match->add_option("--in", m_in, "Source sentences, one per line")
      ->required()
      ->check(CLI::ExistingFile);
  on(match, [&](Context& ctx) {
    const Glossary g = LoadGlossaryFile(m_terms.Glossary(ctx));
    const auto matches = MatchAll(ReadLines(m_in), g, m_terms.Lang(ctx), m_terms.SrcLang(ctx));
    Json segs = Json::array();
    for (std::size_t i = 0; i < matches.size(); ++i) {
      Json ms = Json::array();
      for (const TermMatch& m : matches[i]) ms.push_back(MatchJson(m));
      segs.push_back({{"index", i}, {"matches", std::move(ms)}});
    }
    ctx.Emit({{"segments", std::move(segs)}});
  });

  // align
  std::string a_dump;
  double threshold = AlignerConfig{}.threshold;
  CLI::App* align = app.add_subcommand("align", "Word alignments from an embedding dump");
  align->add_option("--dump", a_dump, "Embedding dump (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  CLI::Option* o_a_threshold =
      align->add_option("--threshold", threshold, "Link threshold on the softmax product");
  on(align, [&](Context& ctx) {
    const AlignerConfig cfg{ctx.Get(o_a_threshold, threshold, "aligner.threshold")};
    cfg.Validate();
    const DumpFile dump = LoadDump(a_dump);
    const auto alignments = AlignDump(dump, cfg);
    Json segs = Json::array();
    for (std::size_t i = 0; i < alignments.size(); ++i) {
      segs.push_back({{"index", i},
                      {"n_src_words", dump.pairs[i].src.words.size()},
                      {"n_tgt_words", dump.pairs[i].tgt.words.size()},
                      {"links", LinksJson(alignments[i])}});
    }
    ctx.Emit({{"threshold", cfg.threshold}, {"segments", std::move(segs)}});
  });

  // substitute
  TermFlags s_terms;
  std::string s_src;
  std::string s_tgt;
  std::string s_dump;
  std::string s_alignments;
  std::string s_matches;
  double s_threshold = AlignerConfig{}.threshold;
  CLI::App* substitute =
      app.add_subcommand("substitute", "Replace aligned target spans with glossary translations");
  s_terms.Register(substitute);
  substitute->add_option("--src", s_src, "Source sentences")->required()->check(CLI::ExistingFile);
  substitute->add_option("--tgt", s_tgt, "Machine translations")
      ->required()
      ->check(CLI::ExistingFile);
  CLI::Option* o_s_dump =
      substitute->add_option("--dump", s_dump, "Embedding dump to align")->check(CLI::ExistingFile);
  substitute
      ->add_option("--alignments", s_alignments, "Alignments from `align` instead of --dump")
      ->check(CLI::ExistingFile)
      ->excludes(o_s_dump);
  substitute->add_option("--matches", s_matches, "Matches from `match`; recomputed if absent")
      ->check(CLI::ExistingFile);
  CLI::Option* o_s_threshold =
      substitute->add_option("--threshold", s_threshold, "Aligner threshold with --dump");
  on(substitute, [&](Context& ctx) {
    const Glossary g = LoadGlossaryFile(s_terms.Glossary(ctx));
    const std::string lang = s_terms.Lang(ctx);
    const std::string src_lang = s_terms.SrcLang(ctx);
    const std::vector<std::string> src_lines = ReadLines(s_src);
    const std::vector<std::string> tgt_lines = ReadLines(s_tgt);
    if (src_lines.size() != tgt_lines.size()) {
      throw LengthMismatchError("source and target differ in segment count");
    }
    std::vector<TokenizedSentence> src;
    std::vector<TokenizedSentence> tgt;
    for (std::size_t i = 0; i < src_lines.size(); ++i) {
      src.push_back(Tokenize(src_lines[i], src_lang));
      tgt.push_back(Tokenize(tgt_lines[i], lang));
    }
    std::vector<Alignment> alignments;
    if (!s_dump.empty()) {
      const AlignerConfig cfg{ctx.Get(o_s_threshold, s_threshold, "aligner.threshold")};
      cfg.Validate();
      const DumpFile dump = LoadDump(s_dump);
      CheckDumpWords(dump, src, tgt);
      alignments = AlignDump(dump, cfg);
    } else {
      alignments = LoadAlignments(Require(s_alignments, "--dump or --alignments"));
      if (alignments.size() != src.size()) {
        throw LengthMismatchError("alignments cover " + std::to_string(alignments.size()) +
                                  " segments, input has " + std::to_string(src.size()));
      }
      for (std::size_t i = 0; i < src.size(); ++i) {
        for (const auto& [s, t] : alignments[i].links) {
          if (s >= src[i].size() || t >= tgt[i].size()) {
            throw ValidationError("segment " + std::to_string(i + 1) +
                                  ": alignment link outside the sentence");
          }
        }
      }
    }
    std::vector<std::vector<TermMatch>> matches;
    if (!s_matches.empty()) {
      matches = LoadMatches(s_matches, g, lang, src);
    } else {
      const TermIndex index(g, lang);
      for (const TokenizedSentence& s : src) matches.push_back(index.Find(s));
    }
    Json segs = Json::array();
    for (std::size_t i = 0; i < src.size(); ++i) {
      const SubstitutionPlan plan = PlanSubstitutions(matches[i], alignments[i], tgt[i]);
      const AppliedText applied = ApplyPlanWithSpans(tgt[i], plan);
      Json edits = Json::array();
      for (std::size_t k = 0; k < plan.edits.size(); ++k) {
        const SubstitutionEdit& e = plan.edits[plan.edits.size() - 1 - k];
        edits.push_back({{"tgt_begin", e.tgt_range.begin},
                         {"tgt_end", e.tgt_range.end},
                         {"src_begin", e.src_range.begin},
                         {"src_end", e.src_range.end},
                         {"source_term", e.term->source_term},
                         {"replacement", e.replacement},
                         {"byte_begin", applied.replaced[k].begin},
                         {"byte_end", applied.replaced[k].end}});
      }
      segs.push_back({{"index", i},
                      {"text", applied.text},
                      {"edits", std::move(edits)},
                      {"warnings", plan.warnings}});
    }
    ctx.Emit({{"segments", std::move(segs)}});
  });

  // refine
  TermFlags r_terms;
  ClientFlags r_client;
  std::string r_src;
  std::string r_tgt;
  CLI::App* refine =
      app.add_subcommand("refine", "Ask a chat model to fix terminology in translations");
  r_terms.Register(refine);
  r_client.Register(refine);
  refine->add_option("--src", r_src, "Source sentences")->required()->check(CLI::ExistingFile);
  refine->add_option("--tgt", r_tgt, "Initial translations")
      ->required()
      ->check(CLI::ExistingFile);
  on(refine, [&](Context& ctx) {
    const Glossary g = LoadGlossaryFile(r_terms.Glossary(ctx));
    const std::string lang = r_terms.Lang(ctx);
    const std::string src_lang = r_terms.SrcLang(ctx);
    const std::vector<std::string> src = ReadLines(r_src);
    const std::vector<std::string> tgt = ReadLines(r_tgt);
    if (src.size() != tgt.size()) {
      throw LengthMismatchError("source and target differ in segment count");
    }
    HttpChatClient client(r_client.Resolve(ctx));
    const auto matches = MatchAll(src, g, lang, src_lang);
    std::vector<PromptSpec> prompts;
    std::vector<std::size_t> asked;
    std::vector<std::vector<TermPair>> terms(src.size());
    for (std::size_t i = 0; i < src.size(); ++i) {
      for (const TermMatch& m : matches[i]) {
        terms[i].emplace_back(m.entry->source_term, m.entry->translation);
      }
      if (terms[i].empty()) continue;  // nothing to enforce
      prompts.push_back(BuildRefinePrompt(src[i], tgt[i], terms[i], src_lang, lang));
      asked.push_back(i);
    }
    const std::vector<std::string> answers = client.CompleteAll(prompts);
    std::vector<std::string> refined = tgt;
    for (std::size_t k = 0; k < asked.size(); ++k) {
      refined[asked[k]] = ParseFencedOrReprompt(client, prompts[k], answers[k]);
    }
    Json segs = Json::array();
    for (std::size_t i = 0; i < src.size(); ++i) {
      Json tp = Json::array();
      for (const auto& [s, t] : terms[i]) tp.push_back({{"source", s}, {"target", t}});
      segs.push_back({{"index", i},
                      {"initial", tgt[i]},
                      {"refined", refined[i]},
                      {"terms", std::move(tp)}});
    }
    ctx.Emit({{"segments", std::move(segs)}});
  });

  // select
  ClientFlags sel_client;
  std::string sel_in;
  std::string sel_strategy = "vote_then_llm";
  CLI::App* select =
      app.add_subcommand("select", "Pick one translation per term from 11 candidates");
  sel_client.Register(select);
  select
      ->add_option("--in", sel_in,
                   "JSONL: {\"term\", \"language\", \"candidates\": [11], \"contexts\": [...]}")
      ->required()
      ->check(CLI::ExistingFile);
  select->add_option("--strategy", sel_strategy, "llm_only or vote_then_llm");
  on(select, [&](Context& ctx) {
    const SelectionStrategy strategy = ParseSelectionStrategy(sel_strategy);
    std::unique_ptr<HttpChatClient> client;
    Json results = Json::array();
    std::size_t line_no = 0;
    for (const std::string& line : ReadLines(sel_in)) {
      ++line_no;
      if (text::Trim(line).empty()) continue;
      CandidateSet cs;
      std::vector<std::string> contexts;
      try {
        const auto doc = nlohmann::json::parse(line);
        cs.term = doc.at("term").get<std::string>();
        cs.language = doc.value("language", "");
        cs.candidates = doc.at("candidates").get<std::vector<std::string>>();
        contexts = doc.value("contexts", std::vector<std::string>{});
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(line_no, e.what());
      }
      if (contexts.size() > kMaxTermContexts) contexts.resize(kMaxTermContexts);
      cs.Validate();
      Selection sel;
      if (strategy == SelectionStrategy::kVoteThenLlm && MajorityVote(cs)) {
        sel = {*MajorityVote(cs), SelectionSource::kVote, std::nullopt};
      } else {
        if (!client) client = std::make_unique<HttpChatClient>(sel_client.Resolve(ctx));
        sel = SelectBest(cs, contexts, *client, strategy);
      }
      Json row = {{"term", cs.term},
                  {"language", cs.language},
                  {"translation", sel.translation},
                  {"source", ToString(sel.source)}};
      row["label"] = sel.index ? Json(*sel.index + 1) : Json(nullptr);
      results.push_back(std::move(row));
    }
    ctx.Emit({{"results", std::move(results)}});
  });

  // decode-demo
  std::string d_table;
  std::vector<std::string> d_constraints;
  std::size_t beam_width = 4;
  std::size_t max_len = 8;
  std::string d_boost;
  std::string d_factor = "10/7";
  std::string d_mode = "multiplicative";
  CLI::App* decode = app.add_subcommand(
      "decode-demo", "Constrained beam search and logit boosting on a toy scorer table");
  decode->add_option("--table", d_table, "Scorer table JSON")
      ->required()
      ->check(CLI::ExistingFile);
  decode->add_option("--constraint", d_constraints,
                     "Required token phrase, e.g. \"3 4\"; repeatable");
  CLI::Option* o_beam = decode->add_option("--beam", beam_width, "Beam width");
  CLI::Option* o_max_len = decode->add_option("--max-len", max_len, "Maximum non-EOS tokens");
  decode->add_option("--boost", d_boost, "Token ids to boost during greedy decoding, e.g. 2,3");
  CLI::Option* o_factor =
      decode->add_option("--factor", d_factor, "Boost factor, decimal or fraction (10/7)");
  CLI::Option* o_mode =
      decode->add_option("--mode", d_mode, "multiplicative or additive (adds log factor)");
  on(decode, [&](Context& ctx) {
    const TableScorer scorer = TableScorer::FromJson(ReadFile(d_table));
    DecodingConstraint constraint;
    for (const std::string& c : d_constraints) constraint.phrases.push_back(ParseTokenList(c));
    const std::size_t width = ctx.Get(o_beam, beam_width, "decoder.beam_width");
    const std::size_t len = ctx.Get(o_max_len, max_len, "decoder.max_len");
    Json doc;
    const DecodeResult beam = BeamSearch(scorer, constraint, width, len);
    doc["beam"] = {{"tokens", beam.tokens}, {"score", beam.score}};
    doc["greedy"] = GreedyDecode(scorer, std::nullopt, len);
    if (!d_boost.empty()) {
      LogitBoost boost;
      for (TokenId t : ParseTokenList(d_boost)) boost.token_ids.insert(t);
      boost.factor = ParseFactor(ctx.Get(o_factor, d_factor, "decoder.boost_factor"));
      const std::string mode = ctx.Get(o_mode, d_mode, "decoder.boost_mode");
      if (mode == "multiplicative") {
        boost.mode = BoostMode::kMultiplicative;
      } else if (mode == "additive") {
        boost.mode = BoostMode::kAdditive;
      } else {
        throw ValidationError("boost mode must be multiplicative or additive");
      }
      doc["boost"] = {{"tokens", boost.token_ids}, {"factor", boost.factor}, {"mode", mode}};
      doc["greedy_boosted"] = GreedyDecode(scorer, boost, len);
    }
    ctx.Emit(doc);
  });

  // evaluate
  std::string e_hyp;
  std::string e_ref;
  std::string e_lang;
  std::string e_smoothing = "exp";
  std::size_t char_order = 6;
  std::size_t word_order = 2;
  double beta = 2.0;
  double comet = 0.0;
  CLI::App* evaluate = app.add_subcommand("evaluate", "BLEU, ChrF, ChrF++ and TER");
  evaluate->add_option("--hyp", e_hyp, "Hypotheses, one per line")
      ->required()
      ->check(CLI::ExistingFile);
  evaluate->add_option("--ref", e_ref, "References, one per line")
      ->required()
      ->check(CLI::ExistingFile);
  CLI::Option* o_e_lang = evaluate->add_option("--lang", e_lang, "Target language code");
  CLI::Option* o_smoothing =
      evaluate->add_option("--smoothing", e_smoothing, "BLEU smoothing: exp, none or floor");
  CLI::Option* o_char_order = evaluate->add_option("--char-order", char_order, "ChrF order");
  CLI::Option* o_word_order =
      evaluate->add_option("--word-order", word_order, "ChrF++ word n-gram order");
  CLI::Option* o_beta = evaluate->add_option("--beta", beta, "ChrF recall weight");
  CLI::Option* o_comet =
      evaluate->add_option("--comet", comet, "Externally computed COMET score to include");
  on(evaluate, [&](Context& ctx) {
    const std::string lang =
        text::CaseFold(Require(ctx.Get(o_e_lang, e_lang, "target_lang"), "--lang"));
    MetricOptions opts;
    opts.bleu.smoothing =
        ParseBleuSmoothing(ctx.Get(o_smoothing, e_smoothing, "metrics.smoothing"));
    opts.char_order = ctx.Get(o_char_order, char_order, "metrics.char_order");
    opts.chrf_pp_word_order = ctx.Get(o_word_order, word_order, "metrics.chrf_pp_word_order");
    opts.beta = ctx.Get(o_beta, beta, "metrics.beta");
    MetricReport report = Evaluate(ReadLines(e_hyp), ReadLines(e_ref), lang, opts);
    if (o_comet->count() > 0) report.comet = comet;
    ctx.Emit(Json::parse(ToJson(report)));
  });

  // agreement
  std::string k_table;
  CLI::App* agreement = app.add_subcommand("agreement", "Fleiss' kappa for a rating table");
  agreement->add_option("--table", k_table, "CSV, items x categories counts")
      ->required()
      ->check(CLI::ExistingFile);
  on(agreement, [&](Context& ctx) {
    const RatingTable t = RatingTable::FromCsv(ReadFile(k_table));
    const double kappa = FleissKappa(t);
    ctx.Emit({{"kappa", kappa},
              {"n_items", t.counts.size()},
              {"n_categories", t.counts[0].size()},
              {"n_raters", t.n_raters}});
  });

  // ttest
  std::string t_a;
  std::string t_b;
  double mu0 = 0.0;
  std::string t_alt = "greater";
  CLI::App* ttest = app.add_subcommand("ttest", "One-sided paired or one-sample t-test");
  ttest->add_option("--a", t_a, "Sample, one number per line")
      ->required()
      ->check(CLI::ExistingFile);
  CLI::Option* o_b =
      ttest->add_option("--b", t_b, "Paired sample; tests a - b")->check(CLI::ExistingFile);
  ttest->add_option("--mu0", mu0, "Hypothesized mean for a one-sample test")->excludes(o_b);
  ttest->add_option("--alternative", t_alt, "greater or less");
  on(ttest, [&](Context& ctx) {
    const Alternative alt = ParseAlternative(t_alt);
    const TestResult r = t_b.empty() ? OneSampleTOneSided(ReadNumbers(t_a), mu0, alt)
                                     : PairedTOneSided(ReadNumbers(t_a), ReadNumbers(t_b), alt);
    ctx.Emit(Json::parse(ToJson(r)));
  });

  // rarefy
  std::string rf_papers;
  std::string rf_dict;
  std::string rf_lang;
  std::string rf_fractions = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0";
  std::size_t rf_samples = 50;
  std::uint64_t seed = 0;
  bool rf_exhaustive = false;
  double rf_test_fraction = 0.6;
  double rf_test_mu0 = 0.0;
  std::size_t rf_test_samples = 1000;
  CLI::App* rarefy = app.add_subcommand("rarefy", "Dictionary coverage of random paper subsets");
  rarefy->add_option("--papers", rf_papers, "JSONL, one term list (or {\"terms\": [...]}) per paper")
      ->required()
      ->check(CLI::ExistingFile);
  rarefy->add_option("--dictionary", rf_dict, "Glossary (.jsonl/.tsv) or .txt, one term per line")
      ->required()
      ->check(CLI::ExistingFile);
  rarefy->add_option("--lang", rf_lang, "Only glossary entries of this language");
  rarefy->add_option("--fractions", rf_fractions, "Comma-separated fractions in (0, 1]");
  rarefy->add_option("--samples", rf_samples, "Subsets drawn per fraction");
  CLI::Option* o_seed = rarefy->add_option("--seed", seed, "RNG seed");
  rarefy->add_flag("--exhaustive", rf_exhaustive, "Enumerate every subset instead of sampling");
  CLI::Option* o_test_mu0 = rarefy->add_option(
      "--test-mu0", rf_test_mu0, "Also test mean coverage > mu0 at --test-fraction");
  rarefy->add_option("--test-fraction", rf_test_fraction, "Fraction used by --test-mu0");
  rarefy->add_option("--test-samples", rf_test_samples, "Samples used by --test-mu0");
  on(rarefy, [&](Context& ctx) {
    std::vector<std::vector<std::string>> papers;
    std::size_t line_no = 0;
    for (const std::string& line : ReadLines(rf_papers)) {
      ++line_no;
      if (text::Trim(line).empty()) continue;
      try {
        const auto doc = nlohmann::json::parse(line);
        papers.push_back((doc.is_object() ? doc.at("terms") : doc).get<std::vector<std::string>>());
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(line_no, e.what());
      }
    }
    std::vector<std::string> dictionary;
    if (fs::path(rf_dict).extension() == ".txt") {
      for (const std::string& l : ReadLines(rf_dict)) {
        if (!text::Trim(l).empty()) dictionary.push_back(l);
      }
    } else {
      const Glossary g = LoadGlossaryFile(rf_dict);
      for (const GlossaryEntry& e : g.entries()) {
        if (rf_lang.empty() || e.language == text::CaseFold(rf_lang)) {
          dictionary.push_back(e.source_term);
        }
      }
    }
    const std::uint64_t s = ctx.Get(o_seed, seed, "seed");
    const std::vector<double> fractions = ParseNumberList(rf_fractions);
    const RarefactionResult r = rf_exhaustive
                                    ? RarefactionExhaustive(papers, dictionary, fractions)
                                    : Rarefaction(papers, dictionary, fractions, rf_samples, s);
    Json doc = Json::parse(ToJson(r));
    doc["seed"] = s;
    doc["exhaustive"] = rf_exhaustive;
    if (o_test_mu0->count() > 0) {
      const std::vector<double> cov =
          CoverageSamples(papers, dictionary, rf_test_fraction, rf_test_samples, s, fractions.size());
      Json test = Json::parse(ToJson(OneSampleTOneSided(cov, rf_test_mu0, Alternative::kGreater)));
      test["fraction"] = rf_test_fraction;
      test["mu0"] = rf_test_mu0;
      test["n_samples"] = rf_test_samples;
      doc["test"] = std::move(test);
    }
    ctx.Emit(doc);
  });

  // report
  std::string p_src;
  std::string p_direct;
  std::string p_refined;
  std::string p_subs;
  std::string p_title = ReportOptions{}.title;
  std::string p_src_lang;
  std::string p_lang;
  CLI::App* report =
      app.add_subcommand("report", "Side-by-side HTML page of source, direct and refined text");
  report->add_option("--src", p_src, "Source sentences")->required()->check(CLI::ExistingFile);
  report->add_option("--direct", p_direct, "Direct machine translations")
      ->required()
      ->check(CLI::ExistingFile);
  CLI::Option* o_refined =
      report->add_option("--refined", p_refined, "Refined translations, no highlights")
          ->check(CLI::ExistingFile);
  report->add_option("--substitutions", p_subs, "Output of `substitute`; highlights its edits")
      ->check(CLI::ExistingFile)
      ->excludes(o_refined);
  report->add_option("--title", p_title, "Page title");
  CLI::Option* o_p_src_lang = report->add_option("--src-lang", p_src_lang, "Source language");
  CLI::Option* o_p_lang = report->add_option("--lang", p_lang, "Target language");
  on(report, [&](Context& ctx) {
    const std::vector<std::string> src = ReadLines(p_src);
    const std::vector<std::string> direct = ReadLines(p_direct);
    std::vector<std::string> refined;
    std::vector<Highlight> highlights;
    if (!p_subs.empty()) {
      try {
        const auto doc = nlohmann::json::parse(ReadFile(p_subs));
        const auto& segs = doc.at("segments");
        for (std::size_t i = 0; i < segs.size(); ++i) {
          refined.push_back(segs[i].at("text").get<std::string>());
          for (const auto& e : segs[i].at("edits")) {
            highlights.push_back(
                {i, {e.at("byte_begin").get<std::size_t>(), e.at("byte_end").get<std::size_t>()}});
          }
        }
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(0, "substitutions file: " + std::string(e.what()));
      }
    } else {
      refined = ReadLines(Require(p_refined, "--refined or --substitutions"));
    }
    ReportOptions opts;
    opts.title = p_title;
    opts.source_lang = ctx.Get(o_p_src_lang, p_src_lang, "source_lang");
    opts.target_lang = ctx.Get(o_p_lang, p_lang, "target_lang");
    ctx.Write(EmitReport(src, direct, refined, highlights, opts));
  });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
    Context ctx(globals, out);
    action(ctx);
    return kExitOk;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    err << app.help();
    return kExitUsage;
  } catch (const termforge::Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomainError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomainError;
  }
}

}  // namespace termforge::cli
