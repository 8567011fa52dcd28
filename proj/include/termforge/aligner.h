#ifndef TERMFORGE_ALIGNER_H_
#define TERMFORGE_ALIGNER_H_

#include <cstddef>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace termforge {

// Per-subword contextual vectors for one sentence. Row i of `vectors` belongs
// to subword_tokens[i], which is part of word subword_to_word[i].
struct EmbeddingMatrix {
  std::vector<std::string> subword_tokens;
  Eigen::MatrixXd vectors;  // n_subwords x dim
  std::vector<std::size_t> subword_to_word;

  std::size_t num_subwords() const { return subword_tokens.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(vectors.cols()); }
  // 1 + the largest word index referenced (0 when empty).
  std::size_t num_words() const;

  // Human-readable invariant violations; empty when valid. Checks row count,
  // finiteness, and that subword_to_word is nondecreasing and onto
  // [0, num_words()).
  std::vector<std::string> Violations() const;
  // Throws ValidationError listing the violations.
  void Validate() const;
};

struct AlignerConfig {
  double threshold = 1e-4;

  // Throws ValidationError unless 0 < threshold < 1.
  void Validate() const;
};

using SubwordPair = std::pair<std::size_t, std::size_t>;
using WordPair = std::pair<std::size_t, std::size_t>;

struct Alignment {
  std::set<WordPair> links;  // (src word, tgt word)

  friend bool operator==(const Alignment&, const Alignment&) = default;
};

// S[i][j] = <src_i, tgt_j>. Throws DimensionMismatchError.
Eigen::MatrixXd Similarity(const EmbeddingMatrix& src, const EmbeddingMatrix& tgt);

// Row-wise (source -> target) and column-wise (target -> source) softmax of S,
// both max-shifted.
Eigen::MatrixXd RowSoftmax(const Eigen::MatrixXd& s);
Eigen::MatrixXd ColumnSoftmax(const Eigen::MatrixXd& s);

// Elementwise product of the two softmaxes; a pair is kept iff its score
// exceeds the threshold.
Eigen::MatrixXd BidirectionalScores(const Eigen::MatrixXd& s);

std::set<SubwordPair> AlignSubwords(const Eigen::MatrixXd& s,
                                    const AlignerConfig& cfg);

// A word pair is linked iff any of its subword pairs is.
Alignment AggregateToWords(const std::set<SubwordPair>& pairs,
                           const EmbeddingMatrix& src, const EmbeddingMatrix& tgt);

Alignment Align(const EmbeddingMatrix& src, const EmbeddingMatrix& tgt,
                const AlignerConfig& cfg);

}  // namespace termforge

#endif  // TERMFORGE_ALIGNER_H_
