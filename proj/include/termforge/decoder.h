#ifndef TERMFORGE_DECODER_H_
#define TERMFORGE_DECODER_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string_view>
#include <vector>

namespace termforge {

using TokenId = std::int32_t;

// Incremental next-token scorer standing in for an MT model.
class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual std::size_t vocab_size() const = 0;
  virtual TokenId eos() const = 0;
  // Finite logits over the whole vocabulary for the given prefix.
  virtual std::vector<double> Logits(std::span<const TokenId> prefix) const = 0;
};

// Scorer backed by an explicit prefix -> logits table, loadable from JSON:
//   {"vocab_size": 3, "eos": 2, "default": [0, 0, 0],
//    "table": [{"prefix": [0], "logits": [1.5, 0.2, -1]}]}
// "default" is optional; a prefix missing from the table without a default
// throws ValidationError.
class TableScorer : public Scorer {
 public:
  TableScorer(std::size_t vocab_size, TokenId eos);

  static TableScorer FromJson(std::string_view json_text);

  void Set(std::vector<TokenId> prefix, std::vector<double> logits);
  void SetDefault(std::vector<double> logits);

  std::size_t vocab_size() const override { return vocab_size_; }
  TokenId eos() const override { return eos_; }
  std::vector<double> Logits(std::span<const TokenId> prefix) const override;

 private:
  std::size_t vocab_size_;
  TokenId eos_;
  std::map<std::vector<TokenId>, std::vector<double>> table_;
  std::optional<std::vector<double>> default_;
};

class FunctionScorer : public Scorer {
 public:
  using Fn = std::function<std::vector<double>(std::span<const TokenId>)>;
  FunctionScorer(std::size_t vocab_size, TokenId eos, Fn fn)
      : vocab_size_(vocab_size), eos_(eos), fn_(std::move(fn)) {}

  std::size_t vocab_size() const override { return vocab_size_; }
  TokenId eos() const override { return eos_; }
  std::vector<double> Logits(std::span<const TokenId> prefix) const override {
    return fn_(prefix);
  }

 private:
  std::size_t vocab_size_;
  TokenId eos_;
  Fn fn_;
};

enum class BoostMode {
  kMultiplicative,  // logit * factor (flips the effect on negative logits)
  kAdditive,        // logit + log(factor), i.e. probability scaled by factor
};

struct LogitBoost {
  std::set<TokenId> token_ids;
  double factor = 10.0 / 7.0;
  BoostMode mode = BoostMode::kMultiplicative;

  // Throws ValidationError unless factor > 0 and finite.
  void Validate() const;
};

// Accepts "1.25" or a fraction such as "10/7".
double ParseFactor(std::string_view text);

std::vector<double> AdjustLogits(std::span<const double> logits,
                                 const LogitBoost& boost);

std::vector<double> LogSoftmax(std::span<const double> logits);

struct DecodingConstraint {
  std::vector<std::vector<TokenId>> phrases;  // each must appear contiguously
};

bool ContainsPhrase(std::span<const TokenId> tokens, std::span<const TokenId> phrase);
bool SatisfiesAll(std::span<const TokenId> tokens, const DecodingConstraint& c);

struct DecodeResult {
  std::vector<TokenId> tokens;  // EOS excluded
  double score = 0.0;           // sum of log-softmax values, EOS step included
};

// Constrained beam search. A hypothesis holds at most max_len non-EOS tokens
// and finishes by emitting EOS, which is only allowed once every phrase is
// contained. Candidates are grouped into banks by constraint progress (tokens
// of fulfilled phrases plus the longest partial phrase in progress) and the
// beam is filled round-robin from the most advanced bank down, so unconstrained
// hypotheses cannot crowd out progressing ones. Scores are raw sums; ties go
// to the lexicographically smaller sequence.
//
// Throws UnsatisfiableError when the phrases are longer than max_len in total
// and NoCompletionError when no hypothesis finishes.
DecodeResult BeamSearch(const Scorer& scorer, const DecodingConstraint& constraint,
                        std::size_t beam_width, std::size_t max_len);

// Argmax decoding over (optionally boosted) logits; ties go to the lower token
// id. Stops at EOS (not included) or after max_len tokens.
std::vector<TokenId> GreedyDecode(const Scorer& scorer,
                                  const std::optional<LogitBoost>& boost,
                                  std::size_t max_len);

}  // namespace termforge

#endif  // TERMFORGE_DECODER_H_
