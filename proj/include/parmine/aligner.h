#ifndef PARMINE_ALIGNER_H_
#define PARMINE_ALIGNER_H_

#include <cstddef>
#include <optional>

#include "parmine/corpus.h"
#include "parmine/similarity.h"

namespace parmine {

enum class LengthUnit { kTokens, kCharacters };

struct AlignerConfig {
  double threshold = 0.92;
  // Pairs whose length ratio reaches this bound are never matched.
  double max_length_ratio = 2.0;
  // Cells with |i * cols / rows - j| > band_width are inadmissible.
  std::optional<double> band_width;
  LengthUnit length_unit = LengthUnit::kTokens;

  // Throws ConfigError if max_length_ratio <= 1 or band_width <= 0.
  void validate() const;
};

// sim >= threshold and max(len) < ratio * min(len). Zero-length sentences
// are never admissible.
bool admissible(double sim, std::size_t src_len, std::size_t tgt_len,
                const AlignerConfig& cfg);

std::size_t sentence_length(const Sentence& sentence, LengthUnit unit);

// Monotonic 1-1 / 0-1 / 1-0 alignment maximizing the summed score of the
// 1-1 matches. Gaps cost nothing. On equal scores the backtrace prefers a
// match, then skipping a source sentence, then skipping a target sentence.
AlignmentResult align(const DocumentPair& pair, const ScoreMatrix& scores,
                      const AlignerConfig& cfg);

}  // namespace parmine

#endif  // PARMINE_ALIGNER_H_
