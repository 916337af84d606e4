#pragma once

// Independent reference implementations used to check the engine. These stay
// deliberately naive (recount from scratch, O(n^3) scans, long double sums)
// and must not share code with the implementation paths they verify.

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "polaris/annotation.hpp"
#include "polaris/network.hpp"

namespace polaris::oracles {

// Leave-one-out majority agreement per worker: (n_agree, n_usable).
inline std::map<std::string, std::pair<int, int>> brute_force_map(
    const std::vector<AnnotationRecord>& records) {
  std::map<std::string, std::pair<int, int>> agree_usable;
  for (const auto& r : records) {
    int counts[3] = {0, 0, 0};
    for (const auto& other : records) {
      if (other.item_id == r.item_id && other.worker_id != r.worker_id) {
        counts[static_cast<int>(other.label)]++;
      }
    }
    int best = -1;
    bool tied = false;
    for (int s = 0; s < 3; ++s) {
      if (counts[s] == 0) continue;
      if (best < 0 || counts[s] > counts[best]) {
        best = s;
        tied = false;
      } else if (counts[s] == counts[best]) {
        tied = true;
      }
    }
    auto& [agree, usable] = agree_usable[r.worker_id];
    if (best < 0 || tied) continue;
    ++usable;
    if (static_cast<Stance>(best) == r.label) ++agree;
  }
  return agree_usable;
}

// O(n^3) triangle count over the adjacency matrix.
inline std::uint64_t brute_force_triangles(const InteractionGraph& g) {
  const std::size_t n = g.users.size();
  std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
  for (const auto& e : g.edges) adj[e.a][e.b] = adj[e.b][e.a] = true;
  std::uint64_t count = 0;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      if (!adj[a][b]) continue;
      for (std::size_t c = b + 1; c < n; ++c) {
        if (adj[a][c] && adj[b][c]) ++count;
      }
    }
  }
  return count;
}

// Textbook chi-square: expected counts from marginals, sum (O-E)^2 / E.
inline double chi2_sum_oracle(const std::array<std::array<std::uint64_t, 2>, 2>& o) {
  const long double a = o[0][0], b = o[0][1], c = o[1][0], d = o[1][1];
  const long double n = a + b + c + d;
  const long double rows[2] = {a + b, c + d};
  const long double cols[2] = {a + c, b + d};
  const long double obs[2][2] = {{a, b}, {c, d}};
  long double sum = 0.0;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const long double e = rows[i] * cols[j] / n;
      sum += (obs[i][j] - e) * (obs[i][j] - e) / e;
    }
  }
  return static_cast<double>(sum);
}

}  // namespace polaris::oracles
