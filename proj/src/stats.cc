#include "termforge/stats.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include <boost/math/special_functions/beta.hpp>
#include <json.hpp>

#include "termforge/error.h"
#include "termforge/text.h"

namespace termforge {
namespace {

using UnderflowToZero = boost::math::policies::policy<
    boost::math::policies::underflow_error<boost::math::policies::ignore_error>>;

std::uint64_t Mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;  // sample (n - 1)
};

MeanSd SampleMoments(const std::vector<double>& x) {
  MeanSd m;
  m.mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - m.mean) * (v - m.mean);
  m.sd = std::sqrt(ss / static_cast<double>(x.size() - 1));
  return m;
}

TestResult TTest(const std::vector<double>& x, double mu0, Alternative alt) {
  if (x.size() < 2) throw ValidationError("t-test needs at least 2 observations");
  for (double v : x) {
    if (!std::isfinite(v)) throw ValidationError("t-test input is not finite");
  }
  const MeanSd m = SampleMoments(x);
  if (m.sd <= 1e-14 * std::max(1.0, std::abs(m.mean))) {
    throw ZeroVarianceError("sample variance is zero");
  }
  TestResult r;
  r.alternative = alt;
  r.degrees_of_freedom = x.size() - 1;
  r.t_statistic = (m.mean - mu0) / (m.sd / std::sqrt(static_cast<double>(x.size())));
  const double dof = static_cast<double>(r.degrees_of_freedom);
  r.p_value = alt == Alternative::kGreater ? StudentTUpperTail(r.t_statistic, dof)
                                           : StudentTUpperTail(-r.t_statistic, dof);
  if (r.p_value < kPValueFloor) {
    r.p_value = kPValueFloor;
    r.p_value_is_bound = true;
  }
  return r;
}

struct CoverageIndex {
  std::vector<std::vector<std::size_t>> papers;  // dictionary ids per paper
  std::size_t dict_size = 0;
};

CoverageIndex BuildIndex(const std::vector<std::vector<std::string>>& paper_term_sets,
                         const std::vector<std::string>& dictionary) {
  std::unordered_map<std::string, std::size_t> ids;
  for (const std::string& t : dictionary) {
    const std::string key = text::FoldKey(t);
    if (!key.empty()) ids.emplace(key, ids.size());
  }
  if (ids.empty()) throw EmptyDictionaryError("dictionary has no terms");
  if (paper_term_sets.empty()) throw ValidationError("no papers supplied");
  CoverageIndex idx;
  idx.dict_size = ids.size();
  for (const auto& terms : paper_term_sets) {
    std::vector<std::size_t> hit;
    for (const std::string& t : terms) {
      auto it = ids.find(text::FoldKey(t));
      if (it != ids.end()) hit.push_back(it->second);
    }
    std::sort(hit.begin(), hit.end());
    hit.erase(std::unique(hit.begin(), hit.end()), hit.end());
    idx.papers.push_back(std::move(hit));
  }
  return idx;
}

double Coverage(const CoverageIndex& idx, const std::vector<std::size_t>& subset,
                std::vector<char>& seen) {
  std::fill(seen.begin(), seen.end(), 0);
  std::size_t covered = 0;
  for (std::size_t p : subset) {
    for (std::size_t id : idx.papers[p]) {
      if (!seen[id]) {
        seen[id] = 1;
        ++covered;
      }
    }
  }
  return static_cast<double>(covered) / static_cast<double>(idx.dict_size);
}

std::vector<double> SampledCoverages(const CoverageIndex& idx, double fraction,
                                     std::size_t n_samples, std::uint64_t seed,
                                     std::size_t fraction_index) {
  const std::size_t n = idx.papers.size();
  const std::size_t k = SubsetSize(fraction, n);
  std::vector<double> out;
  out.reserve(n_samples);
  std::vector<std::size_t> order(n);
  std::vector<char> seen(idx.dict_size);
  for (std::size_t s = 0; s < n_samples; ++s) {
    std::iota(order.begin(), order.end(), 0);
    CounterRng rng(seed, fraction_index, s);
    for (std::size_t i = 0; i < k; ++i) {
      std::swap(order[i], order[i + rng.Below(n - i)]);
    }
    out.push_back(
        Coverage(idx, std::vector<std::size_t>(order.begin(), order.begin() + k), seen));
  }
  return out;
}

RarefactionPoint Summarize(double fraction, std::size_t k, const std::vector<double>& cov) {
  RarefactionPoint p;
  p.fraction = fraction;
  p.subset_size = k;
  p.n_samples = cov.size();
  p.mean_coverage = std::accumulate(cov.begin(), cov.end(), 0.0) /
                    static_cast<double>(cov.size());
  double ss = 0.0;
  for (double c : cov) ss += (c - p.mean_coverage) * (c - p.mean_coverage);
  p.std = std::sqrt(ss / static_cast<double>(cov.size()));
  return p;
}

void CheckFractions(const std::vector<double>& fractions) {
  if (fractions.empty()) throw ValidationError("no fractions supplied");
  for (std::size_t i = 0; i < fractions.size(); ++i) {
    if (!(fractions[i] > 0.0 && fractions[i] <= 1.0)) {
      throw ValidationError("fraction outside (0, 1]");
    }
    if (i > 0 && !(fractions[i] > fractions[i - 1])) {
      throw ValidationError("fractions must be strictly increasing");
    }
  }
}

}  // namespace

void RatingTable::Validate() const {
  if (counts.empty()) throw ValidationError("rating table has no items");
  if (n_raters < 2) throw ValidationError("rating table needs at least 2 raters");
  const std::size_t k = counts.front().size();
  if (k < 2) throw ValidationError("rating table needs at least 2 categories");
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i].size() != k) {
      throw ValidationError("item " + std::to_string(i + 1) + " has " +
                            std::to_string(counts[i].size()) + " categories, expected " +
                            std::to_string(k));
    }
    std::int64_t sum = 0;
    for (std::int64_t c : counts[i]) {
      if (c < 0) throw ValidationError("negative count in item " + std::to_string(i + 1));
      sum += c;
    }
    if (sum != static_cast<std::int64_t>(n_raters)) {
      throw ValidationError("item " + std::to_string(i + 1) + " sums to " +
                            std::to_string(sum) + ", expected " + std::to_string(n_raters));
    }
  }
}

RatingTable RatingTable::FromCsv(std::string_view csv) {
  RatingTable t;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= csv.size()) {
    std::size_t nl = csv.find('\n', pos);
    if (nl == std::string_view::npos) nl = csv.size();
    std::string_view line = csv.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (text::Trim(line).empty()) continue;
    std::vector<std::int64_t> row;
    bool numeric = true;
    std::size_t cell_start = 0;
    while (true) {
      std::size_t comma = line.find(',', cell_start);
      const std::string cell = text::Trim(line.substr(
          cell_start, comma == std::string_view::npos ? std::string_view::npos
                                                      : comma - cell_start));
      std::int64_t v = 0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size()) {
        numeric = false;
      }
      row.push_back(v);
      if (comma == std::string_view::npos) break;
      cell_start = comma + 1;
    }
    if (!numeric) {
      if (t.counts.empty() && line_no == 1) continue;  // header
      throw ParseError(line_no, "non-integer count");
    }
    t.counts.push_back(std::move(row));
  }
  if (t.counts.empty()) throw ParseError(line_no, "no rating rows");
  const std::int64_t first = std::accumulate(t.counts[0].begin(), t.counts[0].end(),
                                             std::int64_t{0});
  t.n_raters = first > 0 ? static_cast<std::size_t>(first) : 0;
  return t;
}

double FleissKappa(const RatingTable& table) {
  table.Validate();
  const std::size_t n_items = table.counts.size();
  const std::size_t k = table.counts[0].size();
  const double n = static_cast<double>(table.n_raters);
  std::vector<double> category_mass(k, 0.0);
  double p_bar = 0.0;
  for (const auto& row : table.counts) {
    double sq = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const double c = static_cast<double>(row[j]);
      sq += c * c;
      category_mass[j] += c;
    }
    p_bar += (sq - n) / (n * (n - 1.0));
  }
  p_bar /= static_cast<double>(n_items);
  double p_e = 0.0;
  for (double m : category_mass) {
    const double pj = m / (static_cast<double>(n_items) * n);
    p_e += pj * pj;
  }
  if (1.0 - p_e < 1e-12) {
    throw DegenerateError("expected agreement is 1: every rating falls in one category");
  }
  return (p_bar - p_e) / (1.0 - p_e);
}

Alternative ParseAlternative(std::string_view name) {
  if (name == "greater") return Alternative::kGreater;
  if (name == "less") return Alternative::kLess;
  throw ValidationError("alternative must be 'greater' or 'less'");
}

std::string_view ToString(Alternative a) {
  return a == Alternative::kGreater ? "greater" : "less";
}

std::string ToJson(const TestResult& r) {
  nlohmann::ordered_json doc;
  doc["t_statistic"] = r.t_statistic;
  doc["p_value"] = r.p_value;
  doc["p_value_is_bound"] = r.p_value_is_bound;
  doc["degrees_of_freedom"] = r.degrees_of_freedom;
  doc["alternative"] = ToString(r.alternative);
  return doc.dump(2);
}

double StudentTUpperTail(double t, double dof) {
  if (!(dof > 0.0)) throw ValidationError("degrees of freedom must be positive");
  if (std::isnan(t)) throw ValidationError("t is NaN");
  if (std::isinf(t)) return t > 0 ? 0.0 : 1.0;
  const double x = dof / (dof + t * t);
  const double half_tail = 0.5 * boost::math::ibeta(dof / 2.0, 0.5, x, UnderflowToZero());
  return t >= 0.0 ? half_tail : 1.0 - half_tail;
}

double StudentTCdf(double t, double dof) { return StudentTUpperTail(-t, dof); }

TestResult PairedTOneSided(const std::vector<double>& a, const std::vector<double>& b,
                           Alternative alt) {
  if (a.size() != b.size()) {
    throw LengthMismatchError("paired samples differ in length");
  }
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return TTest(d, 0.0, alt);
}

TestResult OneSampleTOneSided(const std::vector<double>& x, double mu0, Alternative alt) {
  return TTest(x, mu0, alt);
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index)
    : state_(Mix(Mix(Mix(seed) ^ stream) ^ index)) {}

std::uint64_t CounterRng::Next() {
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t CounterRng::Below(std::uint64_t n) {
  // Rejects the top partial block so every residue is equally likely.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t v;
  do {
    v = Next();
  } while (v >= limit);
  return v % n;
}

std::string ToJson(const RarefactionResult& r) {
  nlohmann::ordered_json points = nlohmann::ordered_json::array();
  for (const RarefactionPoint& p : r.points) {
    points.push_back({{"fraction", p.fraction},
                      {"subset_size", p.subset_size},
                      {"mean_coverage", p.mean_coverage},
                      {"std", p.std},
                      {"n_samples", p.n_samples}});
  }
  nlohmann::ordered_json doc;
  doc["points"] = std::move(points);
  return doc.dump(2);
}

std::size_t SubsetSize(double fraction, std::size_t n_papers) {
  const double raw = std::ceil(fraction * static_cast<double>(n_papers) - 1e-9);
  return std::clamp<std::size_t>(static_cast<std::size_t>(std::max(raw, 1.0)), 1, n_papers);
}

std::vector<double> CoverageSamples(const std::vector<std::vector<std::string>>& paper_term_sets,
                                    const std::vector<std::string>& dictionary,
                                    double fraction, std::size_t n_samples,
                                    std::uint64_t seed, std::size_t fraction_index) {
  CheckFractions({fraction});
  if (n_samples == 0) throw ValidationError("n_samples must be at least 1");
  return SampledCoverages(BuildIndex(paper_term_sets, dictionary), fraction, n_samples,
                          seed, fraction_index);
}

RarefactionResult Rarefaction(const std::vector<std::vector<std::string>>& paper_term_sets,
                              const std::vector<std::string>& dictionary,
                              const std::vector<double>& fractions, std::size_t n_samples,
                              std::uint64_t seed) {
  CheckFractions(fractions);
  if (n_samples == 0) throw ValidationError("n_samples must be at least 1");
  const CoverageIndex idx = BuildIndex(paper_term_sets, dictionary);
  RarefactionResult r;
  for (std::size_t fi = 0; fi < fractions.size(); ++fi) {
    r.points.push_back(Summarize(fractions[fi], SubsetSize(fractions[fi], idx.papers.size()),
                                 SampledCoverages(idx, fractions[fi], n_samples, seed, fi)));
  }
  return r;
}

RarefactionResult RarefactionExhaustive(
    const std::vector<std::vector<std::string>>& paper_term_sets,
    const std::vector<std::string>& dictionary, const std::vector<double>& fractions) {
  CheckFractions(fractions);
  const CoverageIndex idx = BuildIndex(paper_term_sets, dictionary);
  const std::size_t n = idx.papers.size();
  RarefactionResult r;
  std::vector<char> seen(idx.dict_size);
  for (double f : fractions) {
    const std::size_t k = SubsetSize(f, n);
    std::vector<char> mask(n, 0);
    std::fill(mask.begin(), mask.begin() + k, 1);
    std::vector<double> cov;
    do {
      std::vector<std::size_t> subset;
      for (std::size_t i = 0; i < n; ++i) {
        if (mask[i]) subset.push_back(i);
      }
      cov.push_back(Coverage(idx, subset, seen));
    } while (std::prev_permutation(mask.begin(), mask.end()));
    r.points.push_back(Summarize(f, k, cov));
  }
  return r;
}

}  // namespace termforge
