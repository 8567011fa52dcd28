#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "termforge/aligner.h"
#include "termforge/decoder.h"
#include "termforge/embed_dump.h"
#include "termforge/error.h"
#include "termforge/glossary.h"
#include "termforge/ingest.h"
#include "termforge/matcher.h"
#include "termforge/metrics.h"
#include "termforge/refiner.h"
#include "termforge/report.h"
#include "termforge/stats.h"
#include "termforge/substituter.h"
#include "termforge/tokenizer.h"

namespace py = pybind11;
namespace tf = termforge;

namespace {

// JSON documents produced by the core become plain Python containers.
py::object FromJson(const std::string& text) {
  return py::module_::import("json").attr("loads")(text);
}

std::string ToJsonText(const py::object& obj) {
  if (py::isinstance<py::str>(obj)) return obj.cast<std::string>();
  return py::module_::import("json").attr("dumps")(obj).cast<std::string>();
}

tf::Alternative Alt(const std::string& s) { return tf::ParseAlternative(s); }

py::dict TestDict(const tf::TestResult& r) {
  return FromJson(tf::ToJson(r)).cast<py::dict>();
}

tf::EmbeddingMatrix Matrix(const Eigen::MatrixXd& vectors,
                           const std::vector<std::size_t>& subword_to_word) {
  tf::EmbeddingMatrix m;
  m.vectors = vectors;
  m.subword_to_word = subword_to_word;
  m.subword_tokens.resize(subword_to_word.size());
  return m;
}

py::dict EntryDict(const tf::GlossaryEntry& e) {
  py::dict d;
  d["source_term"] = e.source_term;
  d["language"] = e.language;
  d["translation"] = e.translation;
  d["contexts"] = e.contexts;
  d["domains"] = e.domains;
  d["provenance"] = std::string(tf::ToString(e.provenance));
  return d;
}

tf::GlossaryFormat Format(const std::string& name) {
  if (name == "jsonl") return tf::GlossaryFormat::kJsonl;
  if (name == "tsv") return tf::GlossaryFormat::kTsv;
  throw tf::ValidationError("format must be 'jsonl' or 'tsv'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Terminology tools: glossary matching, alignment, substitution, metrics";
  py::register_exception<tf::Error>(m, "TermforgeError", PyExc_ValueError);

  m.def("tokenize", [](const std::string& text, const std::string& lang) {
    return tf::Tokenize(text, lang).words;
  }, py::arg("text"), py::arg("lang") = "en");

  py::class_<tf::Glossary>(m, "Glossary")
      .def("__len__", &tf::Glossary::size)
      .def("languages", &tf::Glossary::Languages)
      .def("entries", [](const tf::Glossary& g) {
        py::list out;
        for (const auto& e : g.entries()) out.append(EntryDict(e));
        return out;
      })
      .def("serialize", [](const tf::Glossary& g, const std::string& format) {
        return tf::SerializeGlossary(g, Format(format));
      }, py::arg("format") = "jsonl");

  m.def("parse_glossary", [](const std::string& content, const std::string& format) {
    return tf::ParseGlossary(content, Format(format));
  }, py::arg("content"), py::arg("format") = "jsonl");

  m.def("merge_glossaries", [](const tf::Glossary& base, const tf::Glossary& other,
                               const std::string& policy) {
    return tf::Merge(base, other, tf::ParseMergePolicy(policy));
  }, py::arg("base"), py::arg("other"), py::arg("policy") = "prefer_base");

  m.def("glossary_stats", [](const tf::Glossary& g, const std::string& lang,
                             const std::string& src_lang) {
    const auto s = tf::ComputeLexicalStats(g, lang, *tf::MakeSegmenter(src_lang),
                                           *tf::MakeSegmenter(lang));
    py::dict d;
    d["n_terms"] = s.n_terms;
    d["unique_src_words"] = s.unique_src_words;
    d["unique_tgt_words"] = s.unique_tgt_words;
    d["src_words_per_term"] = py::make_tuple(s.src_words_per_term.mean, s.src_words_per_term.stddev);
    d["tgt_words_per_term"] = py::make_tuple(s.tgt_words_per_term.mean, s.tgt_words_per_term.stddev);
    d["src_chars_per_term"] = py::make_tuple(s.src_chars_per_term.mean, s.src_chars_per_term.stddev);
    d["tgt_chars_per_term"] = py::make_tuple(s.tgt_chars_per_term.mean, s.tgt_chars_per_term.stddev);
    return d;
  }, py::arg("glossary"), py::arg("lang"), py::arg("src_lang") = "en");

  m.def("find_matches", [](const std::string& sentence, const tf::Glossary& g,
                           const std::string& lang, const std::string& src_lang) {
    py::list out;
    for (const auto& match : tf::FindMatches(tf::Tokenize(sentence, src_lang), g, lang)) {
      py::dict d;
      d["begin"] = match.word_range.begin;
      d["end"] = match.word_range.end;
      d["surface"] = match.surface;
      d["source_term"] = match.entry->source_term;
      d["translation"] = match.entry->translation;
      out.append(d);
    }
    return out;
  }, py::arg("sentence"), py::arg("glossary"), py::arg("lang"), py::arg("src_lang") = "en");

  m.def("align", [](const Eigen::MatrixXd& src_vectors, const std::vector<std::size_t>& src_map,
                    const Eigen::MatrixXd& tgt_vectors, const std::vector<std::size_t>& tgt_map,
                    double threshold) {
    const tf::AlignerConfig cfg{threshold};
    const auto a = tf::Align(Matrix(src_vectors, src_map), Matrix(tgt_vectors, tgt_map), cfg);
    return std::vector<tf::WordPair>(a.links.begin(), a.links.end());
  }, py::arg("src_vectors"), py::arg("src_subword_to_word"), py::arg("tgt_vectors"),
     py::arg("tgt_subword_to_word"), py::arg("threshold") = 1e-4);

  m.def("dump_violations", [](const std::string& json_text) {
    try {
      tf::ParseDump(json_text);
    } catch (const tf::ValidationError& e) {
      return std::vector<std::string>{e.what()};
    }
    return std::vector<std::string>{};
  }, py::arg("json_text"));

  m.def("substitute", [](const std::string& src, const std::string& tgt, const tf::Glossary& g,
                         const std::string& lang, const std::vector<tf::WordPair>& links,
                         const std::string& src_lang) {
    const auto s = tf::Tokenize(src, src_lang);
    const auto t = tf::Tokenize(tgt, lang);
    tf::Alignment a;
    a.links.insert(links.begin(), links.end());
    const auto plan = tf::PlanSubstitutions(tf::FindMatches(s, g, lang), a, t);
    const auto applied = tf::ApplyPlanWithSpans(t, plan);
    py::list spans;
    for (const auto& sp : applied.replaced) spans.append(py::make_tuple(sp.begin, sp.end));
    py::dict d;
    d["text"] = applied.text;
    d["replaced"] = spans;
    d["warnings"] = plan.warnings;
    return d;
  }, py::arg("src"), py::arg("tgt"), py::arg("glossary"), py::arg("lang"), py::arg("links"),
     py::arg("src_lang") = "en");

  m.def("beam_search", [](const py::object& table, const std::vector<std::vector<tf::TokenId>>& phrases,
                          std::size_t beam_width, std::size_t max_len) {
    const auto scorer = tf::TableScorer::FromJson(ToJsonText(table));
    const auto r = tf::BeamSearch(scorer, tf::DecodingConstraint{phrases}, beam_width, max_len);
    return py::make_tuple(r.tokens, r.score);
  }, py::arg("table"), py::arg("constraints"), py::arg("beam_width"), py::arg("max_len"));

  m.def("greedy_decode", [](const py::object& table, const std::vector<tf::TokenId>& boost_tokens,
                            const py::object& factor, const std::string& mode, std::size_t max_len) {
    const auto scorer = tf::TableScorer::FromJson(ToJsonText(table));
    if (boost_tokens.empty()) return tf::GreedyDecode(scorer, std::nullopt, max_len);
    tf::LogitBoost boost;
    boost.token_ids.insert(boost_tokens.begin(), boost_tokens.end());
    boost.factor = py::isinstance<py::str>(factor) ? tf::ParseFactor(factor.cast<std::string>())
                                                   : factor.cast<double>();
    if (mode == "additive") {
      boost.mode = tf::BoostMode::kAdditive;
    } else if (mode != "multiplicative") {
      throw tf::ValidationError("mode must be 'multiplicative' or 'additive'");
    }
    return tf::GreedyDecode(scorer, boost, max_len);
  }, py::arg("table"), py::arg("boost_tokens") = std::vector<tf::TokenId>{},
     py::arg("factor") = py::str("10/7"), py::arg("mode") = "multiplicative",
     py::arg("max_len") = 16);

  m.def("bleu", [](const std::vector<tf::Tokens>& hyps, const std::vector<tf::Tokens>& refs,
                   const std::string& smoothing) {
    return tf::CorpusBleu(hyps, refs, {tf::ParseBleuSmoothing(smoothing)}).score;
  }, py::arg("hyps"), py::arg("refs"), py::arg("smoothing") = "exp");
  m.def("chrf", [](const std::vector<std::string>& hyps, const std::vector<std::string>& refs,
                   std::size_t char_order, std::size_t word_order, double beta) {
    return tf::CorpusChrf(hyps, refs, {char_order, word_order, beta}).score;
  }, py::arg("hyps"), py::arg("refs"), py::arg("char_order") = 6, py::arg("word_order") = 0,
     py::arg("beta") = 2.0);
  m.def("ter", [](const std::vector<tf::Tokens>& hyps, const std::vector<tf::Tokens>& refs) {
    return tf::CorpusTer(hyps, refs).score;
  }, py::arg("hyps"), py::arg("refs"));
  m.def("evaluate", [](const std::vector<std::string>& hyps, const std::vector<std::string>& refs,
                       const std::string& lang) {
    return FromJson(tf::ToJson(tf::Evaluate(hyps, refs, lang)));
  }, py::arg("hyps"), py::arg("refs"), py::arg("lang"));

  m.def("fleiss_kappa", [](const std::vector<std::vector<std::int64_t>>& counts) {
    tf::RatingTable t;
    t.counts = counts;
    for (std::int64_t c : counts.empty() ? std::vector<std::int64_t>{} : counts[0]) {
      t.n_raters += static_cast<std::size_t>(std::max<std::int64_t>(c, 0));
    }
    return tf::FleissKappa(t);
  }, py::arg("counts"));
  m.def("student_t_cdf", &tf::StudentTCdf, py::arg("t"), py::arg("dof"));
  m.def("paired_t", [](const std::vector<double>& a, const std::vector<double>& b,
                       const std::string& alternative) {
    return TestDict(tf::PairedTOneSided(a, b, Alt(alternative)));
  }, py::arg("a"), py::arg("b"), py::arg("alternative") = "greater");
  m.def("one_sample_t", [](const std::vector<double>& x, double mu0, const std::string& alternative) {
    return TestDict(tf::OneSampleTOneSided(x, mu0, Alt(alternative)));
  }, py::arg("x"), py::arg("mu0"), py::arg("alternative") = "greater");
  m.def("rarefaction", [](const std::vector<std::vector<std::string>>& papers,
                          const std::vector<std::string>& dictionary,
                          const std::vector<double>& fractions, std::size_t n_samples,
                          std::uint64_t seed, bool exhaustive) {
    const auto r = exhaustive ? tf::RarefactionExhaustive(papers, dictionary, fractions)
                              : tf::Rarefaction(papers, dictionary, fractions, n_samples, seed);
    return FromJson(tf::ToJson(r));
  }, py::arg("papers"), py::arg("dictionary"), py::arg("fractions"), py::arg("n_samples") = 50,
     py::arg("seed") = 0, py::arg("exhaustive") = false);

  m.def("majority_vote", [](const std::vector<std::string>& candidates) {
    return tf::MajorityVote(tf::CandidateSet{"", "", candidates});
  }, py::arg("candidates"));
  m.def("build_refine_prompt", [](const std::string& src, const std::string& initial,
                                  const std::vector<tf::TermPair>& terms,
                                  const std::string& src_lang, const std::string& tgt_lang) {
    return tf::BuildRefinePrompt(src, initial, terms, src_lang, tgt_lang).rendered_text;
  }, py::arg("src"), py::arg("initial"), py::arg("terms"), py::arg("src_lang"),
     py::arg("tgt_lang"));
  m.def("build_select_prompt", [](const std::string& term, const std::string& lang,
                                  const std::vector<std::string>& candidates,
                                  const std::vector<std::string>& contexts) {
    return tf::BuildSelectPrompt({term, lang, candidates}, contexts).rendered_text;
  }, py::arg("term"), py::arg("lang"), py::arg("candidates"),
     py::arg("contexts") = std::vector<std::string>{});
  m.def("parse_select_response", [](const std::string& r) { return tf::ParseSelectResponse(r); },
        py::arg("response"));
  m.def("parse_dictionary_block", &tf::ParseDictionaryBlock, py::arg("rendered"));

  m.def("chunk_text", [](const std::vector<std::string>& sentences, const std::string& doc,
                         std::size_t max_words) {
    py::list out;
    for (const auto& c : tf::ChunkText(sentences, doc, max_words)) {
      py::dict d;
      d["text"] = c.text;
      d["word_count"] = c.word_count;
      d["source_doc"] = c.source_doc;
      d["index"] = c.index;
      out.append(d);
    }
    return out;
  }, py::arg("sentences"), py::arg("doc") = "", py::arg("max_words") = tf::kMaxChunkWords);
  m.def("filter_candidates", [](const std::vector<std::pair<std::string, std::set<std::string>>>& cands) {
    std::vector<tf::TermCandidate> in;
    for (const auto& [term, docs] : cands) in.push_back({term, docs, {}});
    const auto r = tf::FilterCandidates(in);
    py::list kept;
    for (const auto& c : r.kept) kept.append(c.term);
    py::list dropped;
    for (const auto& d : r.dropped) {
      dropped.append(py::make_tuple(d.candidate.term, std::string(tf::ToString(d.reason))));
    }
    py::dict out;
    out["kept"] = kept;
    out["dropped"] = dropped;
    return out;
  }, py::arg("candidates"));
  m.def("parse_term_list", &tf::ParseTermList, py::arg("response"));

  m.def("emit_report", [](const std::vector<std::string>& src, const std::vector<std::string>& direct,
                          const std::vector<std::string>& refined,
                          const std::vector<std::tuple<std::size_t, std::size_t, std::size_t>>& highlights,
                          const std::string& title) {
    std::vector<tf::Highlight> hs;
    for (const auto& [seg, b, e] : highlights) hs.push_back({seg, {b, e}});
    tf::ReportOptions opts;
    opts.title = title;
    return tf::EmitReport(src, direct, refined, hs, opts);
  }, py::arg("src"), py::arg("direct"), py::arg("refined"),
     py::arg("highlights") = std::vector<std::tuple<std::size_t, std::size_t, std::size_t>>{},
     py::arg("title") = tf::ReportOptions{}.title);
}
