#include "termforge/embed_dump.h"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "termforge/error.h"

namespace termforge {
namespace {

using nlohmann::json;

EmbeddedSentence ParseSide(const json& side, std::size_t dim,
                           const std::string& where) {
  if (!side.is_object()) throw ParseError(0, where + ": expected an object");
  EmbeddedSentence out;
  try {
    out.words = side.at("words").get<std::vector<std::string>>();
    out.embeddings.subword_tokens =
        side.at("subword_tokens").get<std::vector<std::string>>();
    out.embeddings.subword_to_word =
        side.at("subword_to_word").get<std::vector<std::size_t>>();
    const json& rows = side.at("vectors");
    if (!rows.is_array()) throw ParseError(0, where + ": vectors must be an array");
    out.embeddings.vectors.resize(static_cast<Eigen::Index>(rows.size()),
                                  static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto row = rows[i].get<std::vector<double>>();
      if (row.size() != dim) {
        throw ParseError(0, where + ": vector " + std::to_string(i) + " has " +
                                std::to_string(row.size()) + " components, expected " +
                                std::to_string(dim));
      }
      for (std::size_t k = 0; k < dim; ++k) {
        out.embeddings.vectors(static_cast<Eigen::Index>(i),
                               static_cast<Eigen::Index>(k)) = row[k];
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(0, where + ": " + e.what());
  }
  return out;
}

json SideToJson(const EmbeddedSentence& s) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < s.embeddings.vectors.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < s.embeddings.vectors.cols(); ++k) {
      row.push_back(s.embeddings.vectors(i, k));
    }
    rows.push_back(std::move(row));
  }
  return json{{"words", s.words},
              {"subword_tokens", s.embeddings.subword_tokens},
              {"subword_to_word", s.embeddings.subword_to_word},
              {"vectors", std::move(rows)}};
}

}  // namespace

std::vector<std::string> DumpViolations(const DumpFile& dump) {
  std::vector<std::string> out;
  for (std::size_t p = 0; p < dump.pairs.size(); ++p) {
    for (const auto* side : {&dump.pairs[p].src, &dump.pairs[p].tgt}) {
      const std::string where =
          "pair " + std::to_string(p) + (side == &dump.pairs[p].src ? " src" : " tgt");
      for (const std::string& v : side->embeddings.Violations()) {
        out.push_back(where + ": " + v);
      }
      if (side->embeddings.num_words() != side->words.size()) {
        out.push_back(where + ": subwords cover " +
                      std::to_string(side->embeddings.num_words()) + " words but " +
                      std::to_string(side->words.size()) + " are listed");
      }
      if (side->embeddings.dim() != dump.dim) {
        out.push_back(where + ": dim " + std::to_string(side->embeddings.dim()) +
                      " != file dim " + std::to_string(dump.dim));
      }
    }
  }
  return out;
}

DumpFile ParseDump(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(0, std::string("invalid JSON: ") + e.what());
  }
  DumpFile dump;
  try {
    dump.format_version = doc.at("format_version").get<int>();
    dump.layer = doc.at("layer").get<int>();
    dump.dim = doc.at("dim").get<std::size_t>();
  } catch (const json::exception& e) {
    throw ParseError(0, std::string("dump header: ") + e.what());
  }
  if (dump.format_version != kDumpFormatVersion) {
    throw ParseError(0, "unsupported dump format_version " +
                            std::to_string(dump.format_version));
  }
  if (!doc.contains("pairs") || !doc["pairs"].is_array()) {
    throw ParseError(0, "dump: pairs must be an array");
  }
  for (std::size_t i = 0; i < doc["pairs"].size(); ++i) {
    const json& pair = doc["pairs"][i];
    const std::string where = "pair " + std::to_string(i);
    if (!pair.is_object() || !pair.contains("src") || !pair.contains("tgt")) {
      throw ParseError(0, where + ": expected {src, tgt}");
    }
    dump.pairs.push_back({ParseSide(pair["src"], dump.dim, where + " src"),
                          ParseSide(pair["tgt"], dump.dim, where + " tgt")});
  }
  const auto violations = DumpViolations(dump);
  if (!violations.empty()) {
    std::string msg = "dump invariant violations:";
    for (const auto& v : violations) msg += "\n  " + v;
    throw ValidationError(msg);
  }
  return dump;
}

DumpFile LoadDump(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ParseDump(ss.str());
}

std::string SerializeDump(const DumpFile& dump) {
  json pairs = json::array();
  for (const EmbeddedPair& p : dump.pairs) {
    pairs.push_back({{"src", SideToJson(p.src)}, {"tgt", SideToJson(p.tgt)}});
  }
  json doc{{"format_version", dump.format_version},
           {"layer", dump.layer},
           {"dim", dump.dim},
           {"pairs", std::move(pairs)}};
  return doc.dump();
}

}  // namespace termforge
