#pragma once

// Reference instances and brute-force oracles shared by the unit tests and
// the acceptance runner. Everything here is deliberately naive and
// independent of the library's solvers.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "newsorder/data_gen.hpp"
#include "newsorder/neutrality.hpp"

namespace oracle {

using newsorder::NeutralityGraph;
using newsorder::Path;
using newsorder::PopMatrix;
using newsorder::Vertex;

// Example 2.2: C(1,2)=.1 C(1,3)=.3 C(1,4)=.2 C(2,3)=.7 C(2,4)=.8 C(3,4)=1.
inline PopMatrix example_2_2() {
  const std::vector<double> upper{0.1, 0.3, 0.2, 0.7, 0.8, 1.0};
  return PopMatrix::from_upper_triangle(4, upper);
}

// Six-vertex instance from the matching / cycle-cover walkthroughs, as
// neutrality weights. Edges not drawn in the figures weigh 0.
inline NeutralityGraph figure_instance() {
  const std::size_t n = 6;
  std::vector<double> w(n * n, 0.0);
  auto set = [&](std::size_t a, std::size_t b, double v) {
    w[(a - 1) * n + (b - 1)] = w[(b - 1) * n + (a - 1)] = v;
  };
  set(1, 2, 1.0);
  set(1, 3, 0.8);
  set(1, 4, 0.1);
  set(2, 3, 1.0);
  set(2, 4, 0.3);
  set(3, 4, 0.0);
  set(2, 5, 0.0);
  set(4, 6, 0.9);
  set(5, 6, 1.0);
  set(2, 6, 0.0);
  set(4, 5, 1.0);
  return NeutralityGraph(n, std::move(w));
}

inline NeutralityGraph random_graph(std::size_t n, std::uint64_t seed, bool quantized = false) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> w(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double v = u(rng);
      if (quantized) v = std::round(v * 4.0) / 4.0;  // plenty of ties
      w[i * n + j] = w[j * n + i] = v;
    }
  }
  return NeutralityGraph(n, std::move(w));
}

struct PathOptimum {
  double total = -1.0;
  double min_edge = -1.0;
};

// Depth-first extension of partial paths from every start vertex.
inline PathOptimum best_paths(const NeutralityGraph& g) {
  const std::size_t n = g.size();
  PathOptimum best;
  std::vector<bool> used(n, false);
  auto dfs = [&](auto&& self, Vertex last, std::size_t depth, double total, double lo) -> void {
    if (depth == n) {
      best.total = std::max(best.total, total);
      best.min_edge = std::max(best.min_edge, lo);
      return;
    }
    for (Vertex v = 0; v < n; ++v) {
      if (used[v]) continue;
      used[v] = true;
      const double w = g.weight(last, v);
      self(self, v, depth + 1, total + w, std::min(lo, w));
      used[v] = false;
    }
  };
  for (Vertex s = 0; s < n; ++s) {
    used[s] = true;
    dfs(dfs, s, 1, 0.0, 1.0);
    used[s] = false;
  }
  return best;
}

// Subset DP: the lowest vertex of the mask is left unmatched or matched to
// some other vertex of the mask. `w[i * n + j] < 0` marks a missing edge.
inline double max_matching_weight(std::size_t n, const std::vector<double>& w) {
  const std::size_t full = std::size_t{1} << n;
  std::vector<double> f(full, 0.0);
  for (std::size_t mask = 1; mask < full; ++mask) {
    const auto i = static_cast<std::size_t>(std::countr_zero(mask));
    const std::size_t rest = mask & ~(std::size_t{1} << i);
    double best = f[rest];
    for (std::size_t j = i + 1; j < n; ++j) {
      if ((rest >> j & 1) && w[i * n + j] >= 0.0) {
        best = std::max(best, f[rest & ~(std::size_t{1} << j)] + w[i * n + j]);
      }
    }
    f[mask] = best;
  }
  return f[full - 1];
}

// Largest sum of w(i, p(i)) over all permutations p (optionally only those
// without fixed points).
inline double best_permutation_sum(std::size_t n, const std::vector<double>& w, bool derangements) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), 0);
  double best = -std::numeric_limits<double>::infinity();
  do {
    bool ok = true;
    double s = 0.0;
    for (std::size_t i = 0; i < n && ok; ++i) {
      if (derangements && p[i] == i) ok = false;
      s += w[i * n + p[i]];
    }
    if (ok) best = std::max(best, s);
  } while (std::next_permutation(p.begin(), p.end()));
  return best;
}

// Best cover by cycles of length >= 3: max Hamiltonian cycle per subset
// (Held-Karp), then an exact partition DP.
inline double best_3cycle_cover(const NeutralityGraph& g) {
  const std::size_t n = g.size();
  const std::size_t full = std::size_t{1} << n;
  const double ninf = -std::numeric_limits<double>::infinity();
  std::vector<double> cyc(full, ninf);
  for (std::size_t s = 0; s < n; ++s) {
    // Paths from s through subsets whose lowest vertex is s.
    std::vector<double> dp(full * n, ninf);
    dp[(std::size_t{1} << s) * n + s] = 0.0;
    for (std::size_t mask = 0; mask < full; ++mask) {
      if (!(mask >> s & 1) || static_cast<std::size_t>(std::countr_zero(mask)) != s) continue;
      for (std::size_t v = 0; v < n; ++v) {
        const double cur = dp[mask * n + v];
        if (cur == ninf) continue;
        if (std::popcount(mask) >= 3) cyc[mask] = std::max(cyc[mask], cur + g.weight(v, s));
        for (std::size_t u = s + 1; u < n; ++u) {
          if (mask >> u & 1) continue;
          const std::size_t next = mask | (std::size_t{1} << u);
          dp[next * n + u] = std::max(dp[next * n + u], cur + g.weight(v, u));
        }
      }
    }
  }
  std::vector<double> part(full, ninf);
  part[0] = 0.0;
  for (std::size_t mask = 1; mask < full; ++mask) {
    const std::size_t low = std::size_t{1} << std::countr_zero(mask);
    for (std::size_t sub = mask; sub; sub = (sub - 1) & mask) {
      if (!(sub & low) || cyc[sub] == ninf || part[mask ^ sub] == ninf) continue;
      part[mask] = std::max(part[mask], cyc[sub] + part[mask ^ sub]);
    }
  }
  return part[full - 1];
}

// Instance drawn by either generator, converted to neutrality weights.
inline NeutralityGraph generated_graph(std::size_t n, std::uint64_t seed, bool triangle) {
  newsorder::GeneratorConfig cfg;
  cfg.n = n;
  cfg.seed = seed;
  cfg.triangle_constrained = triangle;
  return newsorder::build_neutrality_graph(newsorder::generate_pop_matrix(cfg));
}

}  // namespace oracle
