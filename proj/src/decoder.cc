#include "termforge/decoder.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <string>

#include <json.hpp>

#include "termforge/error.h"

namespace termforge {
namespace {

struct Hypothesis {
  std::vector<TokenId> tokens;
  double score = 0.0;
  std::size_t progress = 0;
};

bool Better(const Hypothesis& a, const Hypothesis& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.tokens < b.tokens;
}

// Longest k < phrase.size() such that the last k tokens equal the first k of
// the phrase.
std::size_t PartialProgress(std::span<const TokenId> tokens,
                            std::span<const TokenId> phrase) {
  const std::size_t max_k = std::min(tokens.size(), phrase.size() - 1);
  for (std::size_t k = max_k; k > 0; --k) {
    if (std::equal(tokens.end() - static_cast<std::ptrdiff_t>(k), tokens.end(),
                   phrase.begin())) {
      return k;
    }
  }
  return 0;
}

struct ConstraintState {
  std::size_t progress = 0;      // bank key
  std::size_t min_remaining = 0;  // lower bound on tokens still needed
  bool satisfied = true;
};

ConstraintState Evaluate(std::span<const TokenId> tokens,
                         const DecodingConstraint& c) {
  ConstraintState st;
  std::size_t best_partial = 0;
  for (const auto& phrase : c.phrases) {
    if (ContainsPhrase(tokens, phrase)) {
      st.progress += phrase.size();
      continue;
    }
    st.satisfied = false;
    const std::size_t partial = PartialProgress(tokens, phrase);
    best_partial = std::max(best_partial, partial);
    st.min_remaining = std::max(st.min_remaining, phrase.size() - partial);
  }
  st.progress += best_partial;
  return st;
}

void ValidateLogits(const std::vector<double>& logits, const Scorer& scorer) {
  if (logits.size() != scorer.vocab_size()) {
    throw DimensionMismatchError("scorer returned " + std::to_string(logits.size()) +
                                 " logits for a vocabulary of " +
                                 std::to_string(scorer.vocab_size()));
  }
  for (double v : logits) {
    if (!std::isfinite(v)) throw ValidationError("scorer returned a non-finite logit");
  }
}

// Round-robin fill from the most advanced bank down.
std::vector<Hypothesis> SelectBeam(std::vector<Hypothesis> candidates,
                                   std::size_t beam_width) {
  std::map<std::size_t, std::vector<Hypothesis>, std::greater<>> banks;
  for (Hypothesis& h : candidates) banks[h.progress].push_back(std::move(h));
  for (auto& [progress, bank] : banks) {
    std::sort(bank.begin(), bank.end(), Better);
  }
  std::vector<Hypothesis> beam;
  std::size_t round = 0;
  bool any = true;
  while (beam.size() < beam_width && any) {
    any = false;
    for (auto& [progress, bank] : banks) {
      if (round < bank.size()) {
        any = true;
        beam.push_back(std::move(bank[round]));
        if (beam.size() == beam_width) break;
      }
    }
    ++round;
  }
  return beam;
}

}  // namespace

TableScorer::TableScorer(std::size_t vocab_size, TokenId eos)
    : vocab_size_(vocab_size), eos_(eos) {
  if (vocab_size == 0) throw ValidationError("vocabulary must not be empty");
  if (eos < 0 || static_cast<std::size_t>(eos) >= vocab_size) {
    throw ValidationError("eos id outside the vocabulary");
  }
}

TableScorer TableScorer::FromJson(std::string_view json_text) {
  using nlohmann::json;
  try {
    const json doc = json::parse(json_text);
    TableScorer scorer(doc.at("vocab_size").get<std::size_t>(),
                       doc.at("eos").get<TokenId>());
    if (doc.contains("default")) scorer.SetDefault(doc["default"].get<std::vector<double>>());
    if (doc.contains("table")) {
      for (const json& row : doc["table"]) {
        scorer.Set(row.at("prefix").get<std::vector<TokenId>>(),
                   row.at("logits").get<std::vector<double>>());
      }
    }
    return scorer;
  } catch (const json::exception& e) {
    throw ParseError(0, std::string("scorer table: ") + e.what());
  }
}

void TableScorer::Set(std::vector<TokenId> prefix, std::vector<double> logits) {
  if (logits.size() != vocab_size_) {
    throw ValidationError("logit row length does not match the vocabulary");
  }
  table_[std::move(prefix)] = std::move(logits);
}

void TableScorer::SetDefault(std::vector<double> logits) {
  if (logits.size() != vocab_size_) {
    throw ValidationError("default logit row length does not match the vocabulary");
  }
  default_ = std::move(logits);
}

std::vector<double> TableScorer::Logits(std::span<const TokenId> prefix) const {
  auto it = table_.find(std::vector<TokenId>(prefix.begin(), prefix.end()));
  if (it != table_.end()) return it->second;
  if (default_) return *default_;
  throw ValidationError("scorer table has no row for prefix of length " +
                        std::to_string(prefix.size()));
}

void LogitBoost::Validate() const {
  if (!(factor > 0.0) || !std::isfinite(factor)) {
    throw ValidationError("boost factor must be positive and finite");
  }
}

double ParseFactor(std::string_view text) {
  auto parse = [&](std::string_view s) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw ValidationError("invalid factor '" + std::string(text) + "'");
    }
    return v;
  };
  const std::size_t slash = text.find('/');
  if (slash == std::string_view::npos) return parse(text);
  const double den = parse(text.substr(slash + 1));
  if (den == 0.0) throw ValidationError("factor denominator is zero");
  return parse(text.substr(0, slash)) / den;
}

std::vector<double> AdjustLogits(std::span<const double> logits,
                                 const LogitBoost& boost) {
  boost.Validate();
  std::vector<double> out(logits.begin(), logits.end());
  const double shift = std::log(boost.factor);
  for (TokenId t : boost.token_ids) {
    if (t < 0 || static_cast<std::size_t>(t) >= out.size()) continue;
    if (boost.mode == BoostMode::kMultiplicative) {
      out[t] *= boost.factor;
    } else {
      out[t] += shift;
    }
  }
  return out;
}

std::vector<double> LogSoftmax(std::span<const double> logits) {
  std::vector<double> out(logits.begin(), logits.end());
  if (out.empty()) return out;
  const double m = *std::max_element(out.begin(), out.end());
  double sum = 0.0;
  for (double v : out) sum += std::exp(v - m);
  const double log_z = m + std::log(sum);
  for (double& v : out) v -= log_z;
  return out;
}

bool ContainsPhrase(std::span<const TokenId> tokens, std::span<const TokenId> phrase) {
  if (phrase.empty()) return true;
  return std::search(tokens.begin(), tokens.end(), phrase.begin(), phrase.end()) !=
         tokens.end();
}

bool SatisfiesAll(std::span<const TokenId> tokens, const DecodingConstraint& c) {
  return std::all_of(c.phrases.begin(), c.phrases.end(),
                     [&](const auto& p) { return ContainsPhrase(tokens, p); });
}

DecodeResult BeamSearch(const Scorer& scorer, const DecodingConstraint& constraint,
                        std::size_t beam_width, std::size_t max_len) {
  if (beam_width == 0) throw ValidationError("beam width must be at least 1");
  const TokenId eos = scorer.eos();
  std::size_t total = 0;
  for (const auto& phrase : constraint.phrases) {
    if (phrase.empty()) throw ValidationError("constraint phrase is empty");
    for (TokenId t : phrase) {
      if (t < 0 || static_cast<std::size_t>(t) >= scorer.vocab_size() || t == eos) {
        throw ValidationError("constraint token " + std::to_string(t) +
                              " is not a valid non-EOS token");
      }
    }
    total += phrase.size();
  }
  if (total > max_len) {
    throw UnsatisfiableError("constraint phrases need " + std::to_string(total) +
                             " tokens but max_len is " + std::to_string(max_len));
  }

  std::vector<Hypothesis> live{Hypothesis{{}, 0.0, Evaluate({}, constraint).progress}};
  std::optional<Hypothesis> best;
  while (!live.empty()) {
    std::vector<Hypothesis> candidates;
    for (const Hypothesis& h : live) {
      const std::vector<double> logits = scorer.Logits(h.tokens);
      ValidateLogits(logits, scorer);
      const std::vector<double> lp = LogSoftmax(logits);
      if (SatisfiesAll(h.tokens, constraint)) {
        Hypothesis done{h.tokens, h.score + lp[eos], h.progress};
        if (!best || Better(done, *best)) best = std::move(done);
      }
      if (h.tokens.size() == max_len) continue;
      for (TokenId t = 0; static_cast<std::size_t>(t) < lp.size(); ++t) {
        if (t == eos) continue;
        Hypothesis next{h.tokens, h.score + lp[t], 0};
        next.tokens.push_back(t);
        const ConstraintState st = Evaluate(next.tokens, constraint);
        if (st.min_remaining > max_len - next.tokens.size()) continue;
        next.progress = st.progress;
        candidates.push_back(std::move(next));
      }
    }
    // Log-probabilities only decrease with length, so nothing left can beat a
    // finished hypothesis that already outscores every candidate.
    if (best) {
      std::erase_if(candidates, [&](const Hypothesis& h) { return h.score < best->score; });
    }
    live = SelectBeam(std::move(candidates), beam_width);
  }
  if (!best) {
    throw NoCompletionError("no hypothesis reached EOS with every constraint met");
  }
  return DecodeResult{std::move(best->tokens), best->score};
}

std::vector<TokenId> GreedyDecode(const Scorer& scorer,
                                  const std::optional<LogitBoost>& boost,
                                  std::size_t max_len) {
  std::vector<TokenId> out;
  while (out.size() < max_len) {
    std::vector<double> logits = scorer.Logits(out);
    ValidateLogits(logits, scorer);
    if (boost) logits = AdjustLogits(logits, *boost);
    const auto it = std::max_element(logits.begin(), logits.end());
    const TokenId next = static_cast<TokenId>(it - logits.begin());
    if (next == scorer.eos()) break;
    out.push_back(next);
  }
  return out;
}

}  // namespace termforge
