#include "parmine/aligner.h"

#include <algorithm>
#include <cmath>

#include "parmine/error.h"
#include "parmine/text.h"

namespace parmine {

void AlignerConfig::validate() const {
  if (!(max_length_ratio > 1.0)) {
    throw ConfigError("length ratio bound k must be greater than 1");
  }
  if (band_width && !(*band_width > 0.0)) {
    throw ConfigError("band width must be positive");
  }
  if (std::isnan(threshold)) throw ConfigError("threshold is NaN");
}

bool admissible(double sim, std::size_t src_len, std::size_t tgt_len,
                const AlignerConfig& cfg) {
  if (src_len == 0 || tgt_len == 0) return false;
  if (!(sim >= cfg.threshold)) return false;
  const auto [lo, hi] = std::minmax(src_len, tgt_len);
  return static_cast<double>(hi) <
         cfg.max_length_ratio * static_cast<double>(lo);
}

std::size_t sentence_length(const Sentence& sentence, LengthUnit unit) {
  return unit == LengthUnit::kTokens ? sentence.tokens.size()
                                     : codepoint_length(sentence.text);
}

AlignmentResult align(const DocumentPair& pair, const ScoreMatrix& scores,
                      const AlignerConfig& cfg) {
  cfg.validate();
  const std::size_t n = pair.source().size();
  const std::size_t m = pair.target().size();
  if (n == 0 || m == 0) {
    if (!scores.empty()) {
      throw InvalidInput("score matrix of " + pair.pair_id() +
                         " should be empty");
    }
    return AlignmentResult(pair.pair_id(), {});
  }
  if (scores.rows() != n || scores.cols() != m) {
    throw InvalidInput("score matrix of " + pair.pair_id() + " is " +
                       std::to_string(scores.rows()) + "x" +
                       std::to_string(scores.cols()) + ", documents are " +
                       std::to_string(n) + "x" + std::to_string(m));
  }

  std::vector<std::size_t> src_len(n), tgt_len(m);
  for (std::size_t i = 0; i < n; ++i) {
    src_len[i] = sentence_length(pair.source()[i], cfg.length_unit);
  }
  for (std::size_t j = 0; j < m; ++j) {
    tgt_len[j] = sentence_length(pair.target()[j], cfg.length_unit);
  }
  const double slope = static_cast<double>(m) / static_cast<double>(n);
  auto can_match = [&](std::size_t i, std::size_t j) {
    if (cfg.band_width &&
        std::abs(static_cast<double>(i) * slope - static_cast<double>(j)) >
            *cfg.band_width) {
      return false;
    }
    return admissible(scores(i, j), src_len[i], tgt_len[j], cfg);
  };

  // best(i, j): best total over the first i source and j target sentences.
  const std::size_t width = m + 1;
  std::vector<double> best((n + 1) * width, 0.0);
  auto at = [&](std::size_t i, std::size_t j) -> double& {
    return best[i * width + j];
  };
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      double v = std::max(at(i - 1, j), at(i, j - 1));
      if (can_match(i - 1, j - 1)) {
        v = std::max(v, at(i - 1, j - 1) + scores(i - 1, j - 1));
      }
      at(i, j) = v;
    }
  }

  std::vector<Match> matches;
  std::size_t i = n, j = m;
  while (i > 0 && j > 0) {
    const double here = at(i, j);
    if (can_match(i - 1, j - 1) &&
        here == at(i - 1, j - 1) + scores(i - 1, j - 1)) {
      matches.push_back({i - 1, j - 1, scores(i - 1, j - 1)});
      --i;
      --j;
    } else if (here == at(i - 1, j)) {
      --i;
    } else {
      --j;
    }
  }
  std::reverse(matches.begin(), matches.end());
  return AlignmentResult(pair.pair_id(), std::move(matches));
}

}  // namespace parmine
