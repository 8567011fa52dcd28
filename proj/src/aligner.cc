#include "termforge/aligner.h"

#include <cmath>

#include "termforge/error.h"

namespace termforge {

std::size_t EmbeddingMatrix::num_words() const {
  std::size_t n = 0;
  for (std::size_t w : subword_to_word) n = std::max(n, w + 1);
  return n;
}

std::vector<std::string> EmbeddingMatrix::Violations() const {
  std::vector<std::string> out;
  if (static_cast<std::size_t>(vectors.rows()) != subword_tokens.size()) {
    out.push_back("vector rows (" + std::to_string(vectors.rows()) +
                  ") != subword count (" + std::to_string(subword_tokens.size()) + ")");
  }
  if (subword_to_word.size() != subword_tokens.size()) {
    out.push_back("subword_to_word length (" +
                  std::to_string(subword_to_word.size()) + ") != subword count (" +
                  std::to_string(subword_tokens.size()) + ")");
  }
  if (!vectors.allFinite()) out.push_back("non-finite vector component");
  for (std::size_t i = 0; i < subword_to_word.size(); ++i) {
    if (i == 0 && subword_to_word[0] != 0) {
      out.push_back("subword_to_word must start at word 0");
    }
    if (i > 0 && subword_to_word[i] < subword_to_word[i - 1]) {
      out.push_back("subword_to_word decreases at subword " + std::to_string(i));
    }
    if (i > 0 && subword_to_word[i] > subword_to_word[i - 1] + 1) {
      out.push_back("subword_to_word skips a word at subword " + std::to_string(i));
    }
  }
  return out;
}

void EmbeddingMatrix::Validate() const {
  const auto v = Violations();
  if (v.empty()) return;
  std::string msg = "invalid embedding matrix:";
  for (const std::string& s : v) msg += " " + s + ";";
  throw ValidationError(msg);
}

void AlignerConfig::Validate() const {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw ValidationError("alignment threshold must lie in (0, 1), got " +
                          std::to_string(threshold));
  }
}

Eigen::MatrixXd Similarity(const EmbeddingMatrix& src, const EmbeddingMatrix& tgt) {
  if (src.vectors.cols() != tgt.vectors.cols()) {
    throw DimensionMismatchError("embedding dims differ: " +
                                 std::to_string(src.vectors.cols()) + " vs " +
                                 std::to_string(tgt.vectors.cols()));
  }
  return src.vectors * tgt.vectors.transpose();
}

Eigen::MatrixXd RowSoftmax(const Eigen::MatrixXd& s) {
  Eigen::MatrixXd out(s.rows(), s.cols());
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    if (s.cols() == 0) break;
    const double m = s.row(i).maxCoeff();
    out.row(i) = (s.row(i).array() - m).exp().matrix();
    out.row(i) /= out.row(i).sum();
  }
  return out;
}

Eigen::MatrixXd ColumnSoftmax(const Eigen::MatrixXd& s) {
  return RowSoftmax(s.transpose()).transpose();
}

Eigen::MatrixXd BidirectionalScores(const Eigen::MatrixXd& s) {
  return RowSoftmax(s).cwiseProduct(ColumnSoftmax(s));
}

std::set<SubwordPair> AlignSubwords(const Eigen::MatrixXd& s,
                                    const AlignerConfig& cfg) {
  cfg.Validate();
  std::set<SubwordPair> out;
  if (s.rows() == 0 || s.cols() == 0) return out;
  const Eigen::MatrixXd scores = BidirectionalScores(s);
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    for (Eigen::Index j = 0; j < scores.cols(); ++j) {
      if (scores(i, j) > cfg.threshold) {
        out.emplace(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      }
    }
  }
  return out;
}

Alignment AggregateToWords(const std::set<SubwordPair>& pairs,
                           const EmbeddingMatrix& src, const EmbeddingMatrix& tgt) {
  Alignment out;
  for (const auto& [i, j] : pairs) {
    if (i >= src.subword_to_word.size() || j >= tgt.subword_to_word.size()) {
      throw RangeError("subword pair (" + std::to_string(i) + ", " +
                       std::to_string(j) + ") out of range");
    }
    out.links.emplace(src.subword_to_word[i], tgt.subword_to_word[j]);
  }
  return out;
}

Alignment Align(const EmbeddingMatrix& src, const EmbeddingMatrix& tgt,
                const AlignerConfig& cfg) {
  return AggregateToWords(AlignSubwords(Similarity(src, tgt), cfg), src, tgt);
}

}  // namespace termforge
