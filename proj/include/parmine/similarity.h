#ifndef PARMINE_SIMILARITY_H_
#define PARMINE_SIMILARITY_H_

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "parmine/corpus.h"
#include "parmine/embeddings.h"

namespace parmine {

// Smoothed sentence BLEU of a translated source against a target sentence.
// Unigram precision is raw, higher orders use (matches + 1) / (ngrams + 1);
// the brevity penalty is min(1, exp(1 - ref/hyp)). Tokens are lowercased
// first and an empty side scores 0. Throws ConfigError if max_order < 1.
double sim_bleu(std::span<const std::string> translated_src,
                std::span<const std::string> tgt, int max_order = 4);

// Supplies MT(f_i) for a document. Translation happens once per document.
class TranslationProvider {
 public:
  enum class Mode { kSidecar, kExternalCommand, kIdentity };

  static TranslationProvider sidecar();
  static TranslationProvider identity();
  // The command reads source sentences on stdin, one per line, and writes
  // exactly as many translations to stdout. Runs through /bin/sh.
  static TranslationProvider external_command(std::string command);

  Mode mode() const { return mode_; }
  const std::string& command() const { return command_; }

  // Returns the pair with translations filled in. Sidecar mode requires the
  // pair to carry them already; a count mismatch is a DataError.
  DocumentPair prepare(const DocumentPair& pair) const;

  // Translation of source sentence i of a prepared pair. Throws DataError
  // naming the document and line if it is missing.
  static const std::string& translation_of(const DocumentPair& pair,
                                           std::size_t i);

 private:
  TranslationProvider(Mode mode, std::string command)
      : mode_(mode), command_(std::move(command)) {}

  Mode mode_;
  std::string command_;
};

// cos(emb(MT(f)), emb(e)).
double sim_emb(std::span<const std::string> translated_src_tokens,
               const Sentence& tgt, const EmbeddingTable& table);
double sim_emb(const DocumentPair& pair, std::size_t src_index,
               std::size_t tgt_index, const EmbeddingTable& table);

class SimilarityMeasure {
 public:
  enum class Kind { kMtBleu, kMtCosine, kRawCosine };

  static SimilarityMeasure mt_bleu(int max_order = 4);
  static SimilarityMeasure mt_cosine(std::shared_ptr<const EmbeddingTable> table);
  // Cosine of the untranslated sentences; needs cross-lingual embeddings.
  static SimilarityMeasure raw_cosine(std::shared_ptr<const EmbeddingTable> table);

  Kind kind() const { return kind_; }
  bool needs_translation() const { return kind_ != Kind::kRawCosine; }
  int bleu_order() const { return bleu_order_; }
  const EmbeddingTable* table() const { return table_.get(); }

  // Measure of one cell, the reference for score_matrix.
  double score(const DocumentPair& pair, std::size_t src_index,
               std::size_t tgt_index) const;

 private:
  SimilarityMeasure(Kind kind, std::shared_ptr<const EmbeddingTable> table,
                    int bleu_order);

  Kind kind_;
  std::shared_ptr<const EmbeddingTable> table_;
  int bleu_order_;
};

// "mt-cosine", "mt-bleu" or "raw-cosine".
SimilarityMeasure::Kind parse_measure_kind(const std::string& name);
std::string to_string(SimilarityMeasure::Kind kind);

// Dense row-major score matrix.
class ScoreMatrix {
 public:
  ScoreMatrix() = default;
  ScoreMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return values_.empty(); }

  double operator()(std::size_t i, std::size_t j) const {
    return values_[i * cols_ + j];
  }
  double& operator()(std::size_t i, std::size_t j) {
    return values_[i * cols_ + j];
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

// Entry (i, j) is measure.score(pair, i, j). Sentence embeddings are
// computed once per row and column.
ScoreMatrix score_matrix(const DocumentPair& pair,
                         const SimilarityMeasure& measure);

}  // namespace parmine

#endif  // PARMINE_SIMILARITY_H_
