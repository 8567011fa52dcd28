#include "termforge/metrics.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include <json.hpp>

#include "termforge/error.h"
#include "termforge/text.h"
#include "termforge/tokenizer.h"

namespace termforge {
namespace {

template <typename A, typename B>
void CheckCorpus(const std::vector<A>& hyps, const std::vector<B>& refs) {
  if (hyps.size() != refs.size()) {
    throw LengthMismatchError(std::to_string(hyps.size()) + " hypotheses but " +
                              std::to_string(refs.size()) + " references");
  }
  if (hyps.empty()) throw EmptyCorpusError("corpus has no segments");
}

template <typename Seq>
std::map<Seq, std::size_t> NgramCounts(const Seq& seq, std::size_t n) {
  std::map<Seq, std::size_t> counts;
  if (seq.size() < n) return counts;
  for (std::size_t i = 0; i + n <= seq.size(); ++i) {
    ++counts[Seq(seq.begin() + i, seq.begin() + i + n)];
  }
  return counts;
}

// {hyp total, ref total, clipped matches}
template <typename Seq>
std::array<std::size_t, 3> NgramStats(const Seq& hyp, const Seq& ref, std::size_t n) {
  const auto h = NgramCounts(hyp, n);
  const auto r = NgramCounts(ref, n);
  std::array<std::size_t, 3> st{};
  for (const auto& [g, c] : h) {
    st[0] += c;
    auto it = r.find(g);
    if (it != r.end()) st[2] += std::min(c, it->second);
  }
  for (const auto& [g, c] : r) st[1] += c;
  return st;
}

std::u32string StripSpaces(std::string_view s) {
  std::u32string out;
  for (char32_t c : text::Decode(s)) {
    if (!text::IsSpace(c)) out.push_back(c);
  }
  return out;
}

Tokens ShiftBlock(const Tokens& seq, std::size_t start, std::size_t len,
                  std::size_t dest) {
  Tokens rest;
  rest.reserve(seq.size());
  rest.insert(rest.end(), seq.begin(), seq.begin() + start);
  rest.insert(rest.end(), seq.begin() + start + len, seq.end());
  Tokens out(rest.begin(), rest.begin() + dest);
  out.insert(out.end(), seq.begin() + start, seq.begin() + start + len);
  out.insert(out.end(), rest.begin() + dest, rest.end());
  return out;
}

bool OccursIn(const Tokens& ref, Tokens::const_iterator b, Tokens::const_iterator e) {
  return std::search(ref.begin(), ref.end(), b, e) != ref.end();
}

}  // namespace

BleuSmoothing ParseBleuSmoothing(std::string_view name) {
  if (name == "none") return BleuSmoothing::kNone;
  if (name == "exp") return BleuSmoothing::kExp;
  if (name == "floor") return BleuSmoothing::kFloor;
  throw ValidationError("unknown BLEU smoothing '" + std::string(name) + "'");
}

BleuResult CorpusBleu(const std::vector<Tokens>& hyps, const std::vector<Tokens>& refs,
                      const BleuOptions& opts) {
  CheckCorpus(hyps, refs);
  BleuResult r;
  for (std::size_t s = 0; s < hyps.size(); ++s) {
    r.hyp_len += hyps[s].size();
    r.ref_len += refs[s].size();
    for (std::size_t n = 1; n <= kBleuOrder; ++n) {
      const auto st = NgramStats(hyps[s], refs[s], n);
      r.totals[n - 1] += st[0];
      r.matches[n - 1] += st[2];
    }
  }
  if (r.hyp_len == 0 || r.matches[0] == 0) {
    r.brevity_penalty = r.hyp_len == 0 ? 0.0 : r.brevity_penalty;
    return r;
  }
  r.brevity_penalty = r.hyp_len < r.ref_len
                          ? std::exp(1.0 - static_cast<double>(r.ref_len) /
                                               static_cast<double>(r.hyp_len))
                          : 1.0;
  double smooth = 1.0;
  double log_sum = 0.0;
  bool zero = false;
  // Totals shrink with n; an order with no hypothesis n-grams at all carries
  // no evidence and is left out of the mean, so hyp = ref always scores 100.
  std::size_t effective = 0;
  for (std::size_t n = 0; n < kBleuOrder; ++n) {
    const double total = static_cast<double>(r.totals[n]);
    if (r.totals[n] == 0) break;
    ++effective;
    if (r.matches[n] > 0) {
      r.precisions[n] = 100.0 * static_cast<double>(r.matches[n]) / total;
    } else if (opts.smoothing == BleuSmoothing::kExp) {
      smooth *= 2.0;
      r.precisions[n] = 100.0 / (smooth * total);
    } else if (opts.smoothing == BleuSmoothing::kFloor) {
      r.precisions[n] = 100.0 * opts.floor_value / total;
    }
    if (r.precisions[n] <= 0.0) {
      zero = true;
      break;
    }
    log_sum += std::log(r.precisions[n]);
  }
  if (zero) return r;
  r.score = std::min(100.0, r.brevity_penalty *
                                std::exp(log_sum / static_cast<double>(effective)));
  return r;
}

ChrfResult CorpusChrf(const std::vector<std::string>& hyps,
                      const std::vector<std::string>& refs, const ChrfOptions& opts) {
  CheckCorpus(hyps, refs);
  if (opts.char_order == 0 && opts.word_order == 0) {
    throw ValidationError("ChrF needs at least one n-gram order");
  }
  if (!(opts.beta > 0.0)) throw ValidationError("ChrF beta must be positive");
  ChrfResult r;
  r.stats.assign(opts.char_order + opts.word_order, {0, 0, 0});
  for (std::size_t s = 0; s < hyps.size(); ++s) {
    const std::u32string hc = StripSpaces(hyps[s]);
    const std::u32string rc = StripSpaces(refs[s]);
    for (std::size_t n = 1; n <= opts.char_order; ++n) {
      const auto st = NgramStats(hc, rc, n);
      for (int k = 0; k < 3; ++k) r.stats[n - 1][k] += st[k];
    }
    if (opts.word_order > 0) {
      const Tokens hw = text::SplitWhitespace(hyps[s]);
      const Tokens rw = text::SplitWhitespace(refs[s]);
      for (std::size_t n = 1; n <= opts.word_order; ++n) {
        const auto st = NgramStats(hw, rw, n);
        for (int k = 0; k < 3; ++k) r.stats[opts.char_order + n - 1][k] += st[k];
      }
    }
  }
  double prec = 0.0;
  double rec = 0.0;
  std::size_t effective = 0;
  for (const auto& st : r.stats) {
    if (st[0] == 0 && st[1] == 0) continue;
    ++effective;
    if (st[0] > 0) prec += static_cast<double>(st[2]) / static_cast<double>(st[0]);
    if (st[1] > 0) rec += static_cast<double>(st[2]) / static_cast<double>(st[1]);
  }
  if (effective == 0) {
    r.score = 100.0;  // both sides empty everywhere
    return r;
  }
  prec /= static_cast<double>(effective);
  rec /= static_cast<double>(effective);
  const double b2 = opts.beta * opts.beta;
  const double denom = b2 * prec + rec;
  r.score = denom > 0.0 ? 100.0 * (1.0 + b2) * prec * rec / denom : 0.0;
  return r;
}

std::size_t EditDistance(const Tokens& a, const Tokens& b) {
  std::vector<std::size_t> prev(b.size() + 1);
  std::vector<std::size_t> cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

TerSegment SegmentTer(const Tokens& hyp, const Tokens& ref) {
  TerSegment seg;
  seg.ref_len = ref.size();
  Tokens cur = hyp;
  std::size_t dist = EditDistance(cur, ref);
  while (dist > 1) {
    // (reduction, block length, -start, -dest) maximized lexicographically.
    std::tuple<std::size_t, std::size_t, std::size_t, std::size_t> best{0, 0, 0, 0};
    bool found = false;
    const std::size_t n = cur.size();
    for (std::size_t start = 0; start < n; ++start) {
      for (std::size_t len = 1; len <= kMaxShiftSize && start + len <= n; ++len) {
        if (!OccursIn(ref, cur.begin() + start, cur.begin() + start + len)) break;
        for (std::size_t dest = 0; dest + len <= n; ++dest) {
          if (dest == start) continue;
          const std::size_t nd = EditDistance(ShiftBlock(cur, start, len, dest), ref);
          if (nd + 1 >= dist) continue;
          const std::size_t gain = dist - nd;
          const bool better =
              !found || gain > std::get<0>(best) ||
              (gain == std::get<0>(best) &&
               (len > std::get<1>(best) ||
                (len == std::get<1>(best) &&
                 (start < std::get<2>(best) ||
                  (start == std::get<2>(best) && dest < std::get<3>(best))))));
          if (better) {
            best = {gain, len, start, dest};
            found = true;
          }
        }
      }
    }
    if (!found) break;
    cur = ShiftBlock(cur, std::get<2>(best), std::get<1>(best), std::get<3>(best));
    dist -= std::get<0>(best);
    ++seg.shifts;
  }
  seg.edits = dist + seg.shifts;
  return seg;
}

TerResult CorpusTer(const std::vector<Tokens>& hyps, const std::vector<Tokens>& refs) {
  CheckCorpus(hyps, refs);
  TerResult r;
  for (std::size_t s = 0; s < hyps.size(); ++s) {
    if (refs[s].empty()) {
      throw EmptyReferenceError("reference " + std::to_string(s + 1) + " is empty");
    }
    const TerSegment seg = SegmentTer(hyps[s], refs[s]);
    r.edits += seg.edits;
    r.shifts += seg.shifts;
    r.ref_len += seg.ref_len;
  }
  r.score = 100.0 * static_cast<double>(r.edits) / static_cast<double>(r.ref_len);
  return r;
}

MetricReport Evaluate(const std::vector<std::string>& hyps,
                      const std::vector<std::string>& refs, std::string_view language,
                      const MetricOptions& opts) {
  CheckCorpus(hyps, refs);
  const auto seg = MakeSegmenter(language);
  std::vector<Tokens> ht;
  std::vector<Tokens> rt;
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    ht.push_back(seg->Segment(hyps[i]));
    rt.push_back(seg->Segment(refs[i]));
  }
  MetricReport report;
  report.n_segments = hyps.size();
  report.bleu = CorpusBleu(ht, rt, opts.bleu);
  report.chrf = CorpusChrf(hyps, refs, {opts.char_order, 0, opts.beta});
  report.chrf_pp = CorpusChrf(hyps, refs, {opts.char_order, opts.chrf_pp_word_order, opts.beta});
  report.ter = CorpusTer(ht, rt);
  return report;
}

std::string ToJson(const MetricReport& report) {
  using nlohmann::ordered_json;
  auto chrf_stats = [](const ChrfResult& c) {
    ordered_json rows = ordered_json::array();
    for (const auto& st : c.stats) {
      rows.push_back({{"hyp", st[0]}, {"ref", st[1]}, {"match", st[2]}});
    }
    return rows;
  };
  ordered_json doc;
  doc["bleu"] = report.bleu.score;
  doc["chrf"] = report.chrf.score;
  doc["chrf_pp"] = report.chrf_pp.score;
  doc["ter"] = report.ter.score;
  doc["n_segments"] = report.n_segments;
  doc["comet"] = report.comet ? ordered_json(*report.comet) : ordered_json(nullptr);
  doc["components"] = {
      {"bleu",
       {{"matches", report.bleu.matches},
        {"totals", report.bleu.totals},
        {"precisions", report.bleu.precisions},
        {"brevity_penalty", report.bleu.brevity_penalty},
        {"hyp_len", report.bleu.hyp_len},
        {"ref_len", report.bleu.ref_len}}},
      {"chrf", chrf_stats(report.chrf)},
      {"chrf_pp", chrf_stats(report.chrf_pp)},
      {"ter",
       {{"edits", report.ter.edits},
        {"shifts", report.ter.shifts},
        {"ref_len", report.ter.ref_len}}}};
  return doc.dump(2);
}

}  // namespace termforge
