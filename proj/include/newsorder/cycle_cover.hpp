#pragma once

// Maximum-weight cycle covers via matching reductions: the bipartite double
// graph for covers that admit 2-cycles, and a gadget expansion solved by
// general matching for covers whose cycles all have length >= 3.

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "newsorder/errors.hpp"
#include "newsorder/matching.hpp"
#include "newsorder/neutrality.hpp"

namespace newsorder {

/// Vertex-disjoint cycles covering every vertex of the host graph.
/// A 2-cycle (u, v) traverses edge {u, v} in both directions.
struct CycleCover {
  std::vector<Path> cycles;

  double weight(const NeutralityGraph& g) const {
    double total = 0.0;
    for (const auto& c : cycles) total += g.cycle_weight(c);
    return total;
  }

  std::size_t min_cycle_length() const {
    std::size_t m = static_cast<std::size_t>(-1);
    for (const auto& c : cycles) m = std::min(m, c.size());
    return m;
  }
};

/// True when the cycles partition [0, n) and each has at least `min_length` vertices.
inline bool is_cycle_cover(const CycleCover& cover, std::size_t n, std::size_t min_length = 2) {
  std::vector<bool> seen(n, false);
  std::size_t count = 0;
  for (const auto& c : cover.cycles) {
    if (c.size() < min_length) return false;
    for (Vertex v : c) {
      if (v >= n || seen[v]) return false;
      seen[v] = true;
      ++count;
    }
  }
  return count == n;
}

/// Maximum-weight cycle cover of a complete digraph with arc weights
/// `w[i * n + j]` for i -> j. Cycles follow arc direction.
inline CycleCover max_weight_directed_cycle_cover(std::size_t n, std::span<const double> w) {
  if (n < 2) throw InvalidArgument("a cycle cover needs at least 2 vertices");
  BipartiteGraph bg;
  bg.n = n;
  bg.weights.assign(w.begin(), w.end());
  bg.forbidden.assign(n * n, false);
  for (std::size_t i = 0; i < n; ++i) {
    bg.forbidden[i * n + i] = true;
    bg.weights[i * n + i] = 0.0;
  }
  const auto successor = max_weight_perfect_bipartite_matching(bg);

  CycleCover cover;
  std::vector<bool> visited(n, false);
  for (Vertex start = 0; start < n; ++start) {
    if (visited[start]) continue;
    Path cycle;
    for (Vertex v = start; !visited[v]; v = successor[v]) {
      visited[v] = true;
      cycle.push_back(v);
    }
    cover.cycles.push_back(std::move(cycle));
  }
  return cover;
}

/// Maximum-weight cycle cover (2-cycles allowed) through the bipartite
/// double graph: left copy u -> right copy v carries w(u, v), u != v.
inline CycleCover max_weight_cycle_cover(const NeutralityGraph& g) {
  if (g.size() < 2) throw InvalidArgument("a cycle cover needs at least 2 vertices");
  return max_weight_directed_cycle_cover(g.size(), g.weights());
}

/// Default size gate for the 3-cycle-cover expansion (Theta(n^2) vertices).
inline constexpr std::size_t kThreeCycleCoverLimit = 30;

/// Gadget expansion whose perfect matchings correspond to 3-cycle covers.
///
/// Each original vertex x owns a complete bipartite gadget K_{n-1, n-3}: the
/// n-1 "right" vertices, one per other original vertex, and n-3 "left"
/// vertices. Every gadget edge weighs w_max. Original edge {x, y} becomes an
/// edge between x's right vertex reserved for y and y's right vertex reserved
/// for x, so each right vertex has degree exactly n-2. A perfect matching
/// saturates the left vertices, leaving exactly two right vertices per gadget
/// for original edges: a 2-factor, i.e. a cycle cover of the simple graph.
struct ThreeCycleExpansion {
  std::size_t n = 0;
  double gadget_weight = 0.0;
  WeightedGraph graph;

  std::size_t gadget_size() const { return 2 * n - 4; }
  std::size_t owner(std::size_t expanded_vertex) const { return expanded_vertex / gadget_size(); }

  /// Right-side slot of x reserved for neighbour y: the others of x in ascending order.
  std::size_t right_vertex(Vertex x, Vertex y) const {
    return x * gadget_size() + (y < x ? y : y - 1);
  }
  std::size_t left_vertex(Vertex x, std::size_t k) const {
    return x * gadget_size() + (n - 1) + k;
  }
  bool is_right_vertex(std::size_t expanded_vertex) const {
    return expanded_vertex % gadget_size() < n - 1;
  }

  /// Weight every perfect matching collects from gadget edges.
  double gadget_contribution() const {
    return static_cast<double>(n) * static_cast<double>(n - 3) * gadget_weight;
  }
};

inline ThreeCycleExpansion build_three_cycle_expansion(const NeutralityGraph& g) {
  const std::size_t n = g.size();
  if (n < 3) throw InvalidArgument("a 3-cycle cover needs at least 3 vertices");
  ThreeCycleExpansion ex;
  ex.n = n;
  ex.gadget_weight = g.max_weight();
  std::vector<WeightedEdge> edges;
  edges.reserve(n * (n - 1) * (n - 3) + n * (n - 1) / 2);
  for (Vertex x = 0; x < n; ++x) {
    for (Vertex y = 0; y < n; ++y) {
      if (y == x) continue;
      for (std::size_t k = 0; k + 3 < n; ++k) {
        edges.push_back({ex.right_vertex(x, y), ex.left_vertex(x, k), ex.gadget_weight});
      }
    }
  }
  for (Vertex x = 0; x < n; ++x) {
    for (Vertex y = x + 1; y < n; ++y) {
      edges.push_back({ex.right_vertex(x, y), ex.right_vertex(y, x), g.weight(x, y)});
    }
  }
  ex.graph = WeightedGraph(n * ex.gadget_size(), std::move(edges));
  return ex;
}

/// Reads the 3-cycle cover encoded by a perfect matching of the expansion.
inline CycleCover decode_three_cycle_matching(const ThreeCycleExpansion& ex, const Matching& m) {
  const std::size_t n = ex.n;
  std::vector<std::vector<Vertex>> adjacent(n);
  for (auto [a, b] : m.pairs) {
    if (ex.is_right_vertex(a) && ex.is_right_vertex(b) && ex.owner(a) != ex.owner(b)) {
      adjacent[ex.owner(a)].push_back(ex.owner(b));
      adjacent[ex.owner(b)].push_back(ex.owner(a));
    }
  }
  for (Vertex x = 0; x < n; ++x) {
    if (adjacent[x].size() != 2) {
      throw DegenerateInput("expanded matching is not perfect at vertex " + std::to_string(x));
    }
    std::sort(adjacent[x].begin(), adjacent[x].end());
  }
  CycleCover cover;
  std::vector<bool> visited(n, false);
  for (Vertex start = 0; start < n; ++start) {
    if (visited[start]) continue;
    Path cycle{start};
    visited[start] = true;
    Vertex prev = start, cur = adjacent[start][0];
    while (cur != start) {
      visited[cur] = true;
      cycle.push_back(cur);
      const Vertex next = adjacent[cur][0] == prev ? adjacent[cur][1] : adjacent[cur][0];
      prev = cur;
      cur = next;
    }
    cover.cycles.push_back(std::move(cycle));
  }
  return cover;
}

/// Maximum-weight cover by cycles of length >= 3, solved as a
/// maximum-cardinality maximum-weight matching on the gadget expansion.
inline CycleCover max_weight_3cycle_cover(const NeutralityGraph& g,
                                          std::size_t size_limit = kThreeCycleCoverLimit) {
  if (g.size() < 3) throw InvalidArgument("a 3-cycle cover needs at least 3 vertices");
  if (g.size() > size_limit) {
    throw ResourceLimit("3-cycle cover is limited to n <= " + std::to_string(size_limit) +
                        " (got n = " + std::to_string(g.size()) + ")");
  }
  const auto ex = build_three_cycle_expansion(g);
  const auto m = max_weight_matching(ex.graph, MatchingMode::MaxCardinalityWeight);
  return decode_three_cycle_matching(ex, m);
}

/// Opens a cycle into a path by deleting its first minimum-weight edge
/// (cycle[k] -> cycle[k+1]); the path starts at cycle[k+1]. `weight(a, b)`
/// is the weight of edge a -> b. A 2-cycle keeps its heavier arc.
template <typename WeightFn>
  requires std::invocable<WeightFn&, Vertex, Vertex>
Path remove_min_edge(std::span<const Vertex> cycle, WeightFn&& weight) {
  const std::size_t len = cycle.size();
  if (len < 2) return Path(cycle.begin(), cycle.end());
  if (len == 2) {
    // Keep the heavier of the two arcs.
    if (weight(cycle[1], cycle[0]) > weight(cycle[0], cycle[1])) return Path{cycle[1], cycle[0]};
    return Path{cycle[0], cycle[1]};
  }
  std::size_t cut = 0;
  double lowest = weight(cycle[0], cycle[1]);
  for (std::size_t k = 1; k < len; ++k) {
    const double w = weight(cycle[k], cycle[(k + 1) % len]);
    if (w < lowest) {
      lowest = w;
      cut = k;
    }
  }
  Path path;
  path.reserve(len);
  for (std::size_t k = 1; k <= len; ++k) path.push_back(cycle[(cut + k) % len]);
  return path;
}

inline Path remove_min_edge(std::span<const Vertex> cycle, const NeutralityGraph& g) {
  return remove_min_edge(cycle, [&g](Vertex a, Vertex b) { return g.weight(a, b); });
}

}  // namespace newsorder
