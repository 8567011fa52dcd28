#ifndef TERMFORGE_EMBED_DUMP_H_
#define TERMFORGE_EMBED_DUMP_H_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "termforge/aligner.h"

// Reader/writer for the embedding dump container produced by the Python
// exporter:
//
//   {"format_version": 1, "layer": <int>, "dim": <int>,
//    "pairs": [{"src": SIDE, "tgt": SIDE}, ...]}
//   SIDE = {"words": [str], "subword_tokens": [str],
//           "subword_to_word": [int], "vectors": [[float] * dim]}
//
// Sequence delimiter tokens are not part of the dump.
namespace termforge {

inline constexpr int kDumpFormatVersion = 1;

struct EmbeddedSentence {
  std::vector<std::string> words;
  EmbeddingMatrix embeddings;
};

struct EmbeddedPair {
  EmbeddedSentence src;
  EmbeddedSentence tgt;
};

struct DumpFile {
  int format_version = kDumpFormatVersion;
  int layer = 0;
  std::size_t dim = 0;
  std::vector<EmbeddedPair> pairs;
};

// Every invariant violation in the file ("pair 3 tgt: ..."); empty if valid.
std::vector<std::string> DumpViolations(const DumpFile& dump);

// Throws ParseError on malformed JSON or schema, ValidationError on invariant
// violations.
DumpFile ParseDump(std::string_view json_text);
DumpFile LoadDump(const std::filesystem::path& path);
std::string SerializeDump(const DumpFile& dump);

}  // namespace termforge

#endif  // TERMFORGE_EMBED_DUMP_H_
