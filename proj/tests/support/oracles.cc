#include "support/oracles.h"

#include <algorithm>
#include <limits>
#include <numeric>

namespace triage::testing {

double BruteForceMinCost(const Rows& cost) {
  return BruteForcePartialMinCost(cost, cost.size());
}

double BruteForcePartialMinCost(const Rows& cost, std::size_t real_rows) {
  const std::size_t n = cost.size();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (std::size_t r = 0; r < real_rows; ++r) total += cost[r][perm[r]];
    best = std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

double GreedyRowByRowCost(const Rows& cost, std::size_t real_rows) {
  const std::size_t n = cost.size();
  std::vector<bool> used(n, false);
  double total = 0.0;
  for (std::size_t r = 0; r < real_rows; ++r) {
    std::size_t pick = n;
    for (std::size_t c = 0; c < n; ++c) {
      if (!used[c] && (pick == n || cost[r][c] < cost[r][pick])) pick = c;
    }
    used[pick] = true;
    total += cost[r][pick];
  }
  return total;
}

Rows RandomIntegerMatrix(std::mt19937_64& rng, std::size_t n, int lo, int hi) {
  std::uniform_int_distribution<int> dist(lo, hi);
  Rows rows(n, std::vector<double>(n));
  for (auto& row : rows) {
    for (auto& v : row) v = dist(rng);
  }
  return rows;
}

Rows RandomRealMatrix(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Rows rows(n, std::vector<double>(n));
  for (auto& row : rows) {
    for (auto& v : row) v = dist(rng);
  }
  return rows;
}

}  // namespace triage::testing
