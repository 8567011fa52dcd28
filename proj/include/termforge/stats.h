#ifndef TERMFORGE_STATS_H_
#define TERMFORGE_STATS_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace termforge {

// N items x K categories; counts[i][j] raters put item i in category j.
struct RatingTable {
  std::vector<std::vector<std::int64_t>> counts;
  std::size_t n_raters = 0;

  // Throws ValidationError unless N >= 1, K >= 2, n_raters >= 2, counts are
  // nonnegative and every row sums to n_raters.
  void Validate() const;

  // Comma-separated integer rows; a first row with any non-integer cell is a
  // header and skipped. n_raters is the first row's sum. Throws ParseError.
  static RatingTable FromCsv(std::string_view csv);
};

// Throws DegenerateError when expected agreement is 1.
double FleissKappa(const RatingTable& table);

enum class Alternative { kGreater, kLess };
Alternative ParseAlternative(std::string_view name);
std::string_view ToString(Alternative a);

// p-values below this are reported as this bound.
inline constexpr double kPValueFloor = 1e-300;

struct TestResult {
  double t_statistic = 0.0;
  double p_value = 1.0;
  std::size_t degrees_of_freedom = 0;
  Alternative alternative = Alternative::kGreater;
  bool p_value_is_bound = false;  // true p is below kPValueFloor
};

std::string ToJson(const TestResult& r);

// Student-t distribution with `dof` degrees of freedom (dof > 0).
double StudentTCdf(double t, double dof);
// P(T > t), computed without cancellation for large t.
double StudentTUpperTail(double t, double dof);

// t on d = a - b. Throws LengthMismatchError, ValidationError (n < 2),
// ZeroVarianceError.
TestResult PairedTOneSided(const std::vector<double>& a, const std::vector<double>& b,
                           Alternative alt);
TestResult OneSampleTOneSided(const std::vector<double>& x, double mu0, Alternative alt);

// SplitMix64 keyed by (seed, stream, index): every draw sequence depends only
// on those three values.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);
  std::uint64_t Next();
  // Uniform on [0, n), unbiased. n > 0.
  std::uint64_t Below(std::uint64_t n);

 private:
  std::uint64_t state_;
};

struct RarefactionPoint {
  double fraction = 0.0;
  std::size_t subset_size = 0;
  double mean_coverage = 0.0;
  double std = 0.0;  // population
  std::size_t n_samples = 0;
};

struct RarefactionResult {
  std::vector<RarefactionPoint> points;
};

std::string ToJson(const RarefactionResult& r);

// ceil(fraction * n_papers), guarded against rounding just above an integer.
std::size_t SubsetSize(double fraction, std::size_t n_papers);

// Coverage of every sampled subset for one fraction. Sample s of fraction
// index fi uses CounterRng(seed, fi, s). Terms are compared by fold key.
std::vector<double> CoverageSamples(const std::vector<std::vector<std::string>>& paper_term_sets,
                                    const std::vector<std::string>& dictionary,
                                    double fraction, std::size_t n_samples,
                                    std::uint64_t seed, std::size_t fraction_index = 0);

// Throws EmptyDictionaryError, ValidationError (no papers, fractions outside
// (0, 1] or not strictly increasing, n_samples = 0).
RarefactionResult Rarefaction(const std::vector<std::vector<std::string>>& paper_term_sets,
                              const std::vector<std::string>& dictionary,
                              const std::vector<double>& fractions, std::size_t n_samples,
                              std::uint64_t seed);

// Same statistics over all C(P, k) subsets instead of random draws.
RarefactionResult RarefactionExhaustive(
    const std::vector<std::vector<std::string>>& paper_term_sets,
    const std::vector<std::string>& dictionary, const std::vector<double>& fractions);

}  // namespace termforge

#endif  // TERMFORGE_STATS_H_
