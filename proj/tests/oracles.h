// Independent reference implementations used as test oracles.
#ifndef PARMINE_TESTS_ORACLES_H_
#define PARMINE_TESTS_ORACLES_H_

#include <cstddef>
#include <functional>
#include <vector>

#include "parmine/similarity.h"

namespace parmine::testing {

// Best total over every monotone 1-1 match set, by recursive enumeration:
// each source sentence is either unmatched or matched to some target after
// the previous match. Sums run in increasing source order.
inline double brute_force_best(const ScoreMatrix& s,
                               const std::vector<std::vector<bool>>& ok) {
  const std::size_t n = s.rows(), m = s.cols();
  double best = 0.0;
  std::function<void(std::size_t, std::size_t, double)> go =
      [&](std::size_t i, std::size_t j0, double acc) {
        if (i == n) {
          if (acc > best) best = acc;
          return;
        }
        go(i + 1, j0, acc);
        for (std::size_t j = j0; j < m; ++j) {
          if (ok[i][j]) go(i + 1, j + 1, acc + s(i, j));
        }
      };
  go(0, 0, 0.0);
  return best;
}

}  // namespace parmine::testing

#endif  // PARMINE_TESTS_ORACLES_H_
