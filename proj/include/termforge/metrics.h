#ifndef TERMFORGE_METRICS_H_
#define TERMFORGE_METRICS_H_

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Corpus-level MT metrics on a 0-100 scale. BLEU and TER take pre-tokenized
// segments; ChrF works on raw strings.
namespace termforge {

using Tokens = std::vector<std::string>;

enum class BleuSmoothing { kNone, kExp, kFloor };
BleuSmoothing ParseBleuSmoothing(std::string_view name);

struct BleuOptions {
  BleuSmoothing smoothing = BleuSmoothing::kExp;
  double floor_value = 0.1;  // used by kFloor
};

inline constexpr std::size_t kBleuOrder = 4;

struct BleuResult {
  double score = 0.0;
  std::array<std::size_t, kBleuOrder> matches{};  // clipped
  std::array<std::size_t, kBleuOrder> totals{};
  std::array<double, kBleuOrder> precisions{};   // percent, after smoothing
  double brevity_penalty = 1.0;
  std::size_t hyp_len = 0;
  std::size_t ref_len = 0;
};

// Throws LengthMismatchError or EmptyCorpusError.
BleuResult CorpusBleu(const std::vector<Tokens>& hyps, const std::vector<Tokens>& refs,
                      const BleuOptions& opts = {});

struct ChrfOptions {
  std::size_t char_order = 6;
  std::size_t word_order = 0;  // 2 for ChrF++
  double beta = 2.0;
};

// Per order: {hyp n-gram count, ref n-gram count, clipped matches}. Character
// orders come first, then word orders.
struct ChrfResult {
  double score = 0.0;
  std::vector<std::array<std::size_t, 3>> stats;
};

ChrfResult CorpusChrf(const std::vector<std::string>& hyps,
                      const std::vector<std::string>& refs, const ChrfOptions& opts = {});

struct TerSegment {
  std::size_t edits = 0;   // insertions + deletions + substitutions + shifts
  std::size_t shifts = 0;
  std::size_t ref_len = 0;
};

// Plain Levenshtein distance over tokens.
std::size_t EditDistance(const Tokens& a, const Tokens& b);

// Greedy block-shift search: while some shift of a hypothesis block (at most
// kMaxShiftSize tokens, found contiguously in the reference) lowers the edit
// distance by more than its own cost, apply the best one. Best is the largest
// reduction, then the longer block, then the earlier start, then the earlier
// destination.
inline constexpr std::size_t kMaxShiftSize = 10;
TerSegment SegmentTer(const Tokens& hyp, const Tokens& ref);

struct TerResult {
  double score = 0.0;  // 100 * sum edits / sum ref_len
  std::size_t edits = 0;
  std::size_t shifts = 0;
  std::size_t ref_len = 0;
};

// Throws LengthMismatchError, EmptyCorpusError, EmptyReferenceError.
TerResult CorpusTer(const std::vector<Tokens>& hyps, const std::vector<Tokens>& refs);

struct MetricOptions {
  BleuOptions bleu;
  std::size_t char_order = 6;
  std::size_t chrf_pp_word_order = 2;
  double beta = 2.0;
};

struct MetricReport {
  BleuResult bleu;
  ChrfResult chrf;
  ChrfResult chrf_pp;
  TerResult ter;
  std::size_t n_segments = 0;
  std::optional<double> comet;  // supplied externally, display only
};

// Tokenizes with the language's default segmenter for BLEU and TER and
// computes every metric.
MetricReport Evaluate(const std::vector<std::string>& hyps,
                      const std::vector<std::string>& refs, std::string_view language,
                      const MetricOptions& opts = {});

std::string ToJson(const MetricReport& report);

}  // namespace termforge

#endif  // TERMFORGE_METRICS_H_
