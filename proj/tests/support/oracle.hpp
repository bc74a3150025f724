#pragma once

// Brute-force reference implementations used as test oracles. Written from
// the metric definitions with sets and explicit prefixes, independent of the
// library code paths.

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <set>
#include <vector>

namespace faultloc::oracle {

inline std::set<std::size_t> prefix(const std::vector<std::size_t>& ranking, std::size_t k) {
  return {ranking.begin(), ranking.begin() + static_cast<std::ptrdiff_t>(std::min(k, ranking.size()))};
}

inline std::size_t overlap(const std::set<std::size_t>& a, const std::set<std::size_t>& b) {
  std::vector<std::size_t> both;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(both));
  return both.size();
}

inline double hit(const std::vector<std::size_t>& ranking, const std::set<std::size_t>& truth, std::size_t k) {
  return overlap(prefix(ranking, k), truth) > 0 ? 1.0 : 0.0;
}

inline double recall(const std::vector<std::size_t>& ranking, const std::set<std::size_t>& truth, std::size_t k) {
  return static_cast<double>(overlap(prefix(ranking, k), truth)) / static_cast<double>(truth.size());
}

// precision@r summed over the ranks r that hold a relevant label.
inline double ap(const std::vector<std::size_t>& ranking, const std::set<std::size_t>& truth) {
  double total = 0.0;
  for (std::size_t r = 1; r <= ranking.size(); ++r) {
    if (!truth.contains(ranking[r - 1])) continue;
    total += static_cast<double>(overlap(prefix(ranking, r), truth)) / static_cast<double>(r);
  }
  return total / static_cast<double>(truth.size());
}

inline double rr(const std::vector<std::size_t>& ranking, const std::set<std::size_t>& truth) {
  for (std::size_t r = 1; r <= ranking.size(); ++r) {
    if (overlap(prefix(ranking, r), truth) > 0) return 1.0 / static_cast<double>(r);
  }
  return 0.0;
}

// Descending by score, equal scores by index: selection sort, O(n^2).
inline std::vector<std::size_t> argsort_desc(const std::vector<double>& scores) {
  std::vector<std::size_t> order;
  std::vector<bool> used(scores.size(), false);
  for (std::size_t step = 0; step < scores.size(); ++step) {
    std::size_t best = scores.size();
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (used[j]) continue;
      if (best == scores.size() || scores[j] > scores[best]) best = j;
    }
    used[best] = true;
    order.push_back(best);
  }
  return order;
}

}  // namespace faultloc::oracle
