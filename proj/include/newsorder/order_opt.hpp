#pragma once

// Ordering optimisation on the neutrality graph.
//
//  * approx_mat  - iterated maximum-weight matching of super nodes (1/2-approx.)
//  * approx_cc   - iterated maximum-weight cycle cover (1/2-approx.)
//  * approx_3cc  - one maximum-weight 3-cycle cover (2/3-approx.)
//  * path_max_scatter - bottleneck heuristic: binary search over edge weights
//                       with a 2-opt feasibility probe
//  * brute_force_path, sampling_baseline - exact oracle and random baseline
//
// A super node is a path of original vertices built up across iterations.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "newsorder/cycle_cover.hpp"
#include "newsorder/detect.hpp"
#include "newsorder/errors.hpp"
#include "newsorder/matching.hpp"
#include "newsorder/neutrality.hpp"

namespace newsorder {

using Clock = std::chrono::steady_clock;

/// Cycle: a Hamiltonian cycle with every edge >= delta, which is then opened
/// at its minimum edge. Path: a Hamiltonian path with every edge >= delta,
/// probed as a cycle through an extra vertex joined to every story at zero
/// penalty, and opened at that vertex.
enum class ScatterProbe { Cycle, Path };

struct HeuristicConfig {
  /// Upper bound on 2-opt sweeps; empty runs to a local optimum.
  std::optional<std::size_t> max_two_opt_iters;
  /// A tour whose penalty is at most this counts as zero-penalty.
  double feasibility_tolerance = 1e-9;
  std::uint64_t rng_seed = 0;
  /// Random 2-opt starts per feasibility probe.
  std::size_t restarts = 3;
  /// What a feasibility probe looks for; see ScatterProbe.
  ScatterProbe probe = ScatterProbe::Path;
};

struct OptimizationResult {
  std::string algorithm;
  Path path;
  double total_weight = 0.0;
  double min_edge_weight = 0.0;
  AggregationKind aggregation = AggregationKind::ConditionalAverage;
  double neutrality = 0.0;
  std::chrono::nanoseconds elapsed{0};
  /// Number of candidate orderings evaluated (sampling baseline, brute force).
  std::size_t evaluations = 0;
  /// path_max_scatter only: the path from the highest-threshold cycle that
  /// probed feasible, when one was seen.
  std::optional<Path> best_feasible_path;
};

inline OptimizationResult make_result(const NeutralityGraph& g, std::string algorithm, Path path,
                                      AggregationKind agg, Clock::time_point started) {
  validate_permutation(path, g.size());
  OptimizationResult res;
  res.algorithm = std::move(algorithm);
  res.total_weight = g.path_weight(path);
  res.min_edge_weight = g.path_min_edge(path);
  res.aggregation = agg;
  res.neutrality = path_neutrality(g, path, agg);
  res.path = std::move(path);
  res.elapsed = std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - started);
  return res;
}

inline double elapsed_seconds(const OptimizationResult& r) {
  return std::chrono::duration<double>(r.elapsed).count();
}

inline void to_json(nlohmann::json& j, const OptimizationResult& r) {
  j = nlohmann::json{{"algorithm", r.algorithm},
                     {"n", r.path.size()},
                     {"aggregation", std::string(to_string(r.aggregation))},
                     {"neutrality", r.neutrality},
                     {"total_weight", r.total_weight},
                     {"min_edge_weight", r.min_edge_weight},
                     {"path", r.path},
                     {"elapsed_ms", std::chrono::duration<double, std::milli>(r.elapsed).count()}};
  if (r.best_feasible_path) j["best_feasible_path"] = *r.best_feasible_path;
}

/// Per-iteration bookkeeping for the iterated algorithms.
struct IterationTrace {
  std::size_t nodes_before = 0;
  std::size_t nodes_after = 0;
  /// Matching weight (approx_mat) or cycle-cover weight (approx_cc).
  double structure_weight = 0.0;
  /// approx_cc: cover weight left after each cycle loses its minimum edge.
  double retained_weight = 0.0;
};

namespace detail {

inline Path reversed(Path p) {
  std::reverse(p.begin(), p.end());
  return p;
}

inline Path concat(Path a, const Path& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

// Heaviest edge between the ends of two super nodes.
inline double endpoint_weight(const NeutralityGraph& g, const Path& a, const Path& b) {
  return std::max({g.weight(a.front(), b.front()), g.weight(a.front(), b.back()),
                   g.weight(a.back(), b.front()), g.weight(a.back(), b.back())});
}

// Joins two super nodes through their heaviest endpoint pair. Candidates are
// tried in the order (u1,v1), (u1,vb), (ua,v1), (ua,vb); ties keep the earlier.
inline Path merge_by_best_endpoints(const NeutralityGraph& g, const Path& u, const Path& v) {
  const double c[4] = {g.weight(u.front(), v.front()), g.weight(u.front(), v.back()),
                       g.weight(u.back(), v.front()), g.weight(u.back(), v.back())};
  int best = 0;
  for (int k = 1; k < 4; ++k) {
    if (c[k] > c[best]) best = k;
  }
  switch (best) {
    case 0: return concat(reversed(u), v);
    case 1: return concat(reversed(u), reversed(v));
    case 2: return concat(u, v);
    default: return concat(u, reversed(v));
  }
}

}  // namespace detail

/// Iterated-matching approximation for the maximum-weight Hamiltonian path.
///
/// Each round computes a maximum-weight matching over the current super
/// nodes (on a complete graph with non-negative weights a maximum-weight
/// matching can always be taken near-perfect, so the matcher runs in
/// maximum-cardinality mode), merges matched pairs by their best endpoints
/// and carries the unmatched node over when the count is odd.
inline OptimizationResult approx_mat(const NeutralityGraph& g,
                                     std::vector<IterationTrace>* trace = nullptr) {
  const auto started = Clock::now();
  const std::size_t n = g.size();
  if (n < 2) throw InvalidArgument("approx_mat needs at least 2 stories");

  std::vector<Path> nodes(n);
  for (Vertex v = 0; v < n; ++v) nodes[v] = {v};
  while (nodes.size() > 1) {
    const std::size_t k = nodes.size();
    std::vector<double> w(k * k, 0.0);
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = a + 1; b < k; ++b) {
        w[a * k + b] = w[b * k + a] = detail::endpoint_weight(g, nodes[a], nodes[b]);
      }
    }
    const auto sg = WeightedGraph::complete(k, w);
    const auto m = max_weight_matching(sg, MatchingMode::MaxCardinalityWeight);

    std::vector<Path> next;
    std::vector<bool> matched(k, false);
    for (auto [a, b] : m.pairs) {
      next.push_back(detail::merge_by_best_endpoints(g, nodes[a], nodes[b]));
      matched[a] = matched[b] = true;
    }
    for (std::size_t a = 0; a < k; ++a) {
      if (!matched[a]) next.push_back(std::move(nodes[a]));
    }
    if (trace) trace->push_back({k, next.size(), m.total_weight(sg), 0.0});
    nodes = std::move(next);
  }
  return make_result(g, "mat", std::move(nodes.front()), AggregationKind::ConditionalAverage,
                     started);
}

/// Iterated-cycle-cover approximation for the maximum-weight Hamiltonian path.
///
/// Super node p -> q is weighted w(last(p), first(q)). Every cycle of the
/// maximum-weight cover loses its minimum arc and its super nodes are chained
/// in cycle order; each appended node is flipped when its far end attaches
/// more heavily (strictly) than its near end. The first node of a chain is
/// flipped as well when that gives a strictly heavier first junction.
inline OptimizationResult approx_cc(const NeutralityGraph& g,
                                    std::vector<IterationTrace>* trace = nullptr) {
  const auto started = Clock::now();
  const std::size_t n = g.size();
  if (n < 2) throw InvalidArgument("approx_cc needs at least 2 stories");

  std::vector<Path> nodes(n);
  for (Vertex v = 0; v < n; ++v) nodes[v] = {v};
  while (nodes.size() > 1) {
    const std::size_t k = nodes.size();
    std::vector<double> w(k * k, 0.0);
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = 0; b < k; ++b) {
        if (a != b) w[a * k + b] = g.weight(nodes[a].back(), nodes[b].front());
      }
    }
    const auto arc = [&w, k](Vertex a, Vertex b) { return w[a * k + b]; };
    const auto cover = max_weight_directed_cycle_cover(k, w);

    IterationTrace it{k, cover.cycles.size(), 0.0, 0.0};
    std::vector<Path> next;
    for (const auto& cycle : cover.cycles) {
      double cycle_weight = 0.0, lowest = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < cycle.size(); ++i) {
        const double a = arc(cycle[i], cycle[(i + 1) % cycle.size()]);
        cycle_weight += a;
        lowest = std::min(lowest, a);
      }
      it.structure_weight += cycle_weight;
      it.retained_weight += cycle_weight - lowest;

      const Path order = remove_min_edge(cycle, arc);
      Path chain = nodes[order[0]];
      for (std::size_t i = 1; i < order.size(); ++i) {
        const Path& q = nodes[order[i]];
        if (i == 1) {
          const double keep = std::max(g.weight(chain.back(), q.front()), g.weight(chain.back(), q.back()));
          const double flip = std::max(g.weight(chain.front(), q.front()), g.weight(chain.front(), q.back()));
          if (flip > keep) std::reverse(chain.begin(), chain.end());
        }
        const Vertex tail = chain.back();
        if (g.weight(tail, q.front()) > g.weight(tail, q.back())) {
          chain.insert(chain.end(), q.begin(), q.end());
        } else {
          chain.insert(chain.end(), q.rbegin(), q.rend());
        }
      }
      next.push_back(std::move(chain));
    }
    if (trace) trace->push_back(it);
    nodes = std::move(next);
  }
  return make_result(g, "cc", std::move(nodes.front()), AggregationKind::ConditionalAverage,
                     started);
}

/// Concatenates paths in the given order.
inline Path join_paths(const std::vector<Path>& paths) {
  Path out;
  for (const auto& p : paths) out.insert(out.end(), p.begin(), p.end());
  return out;
}

/// 3-cycle-cover approximation: each cycle of a maximum-weight 3-cycle cover
/// loses its minimum edge; the paths are joined in ascending order of their
/// smallest vertex id.
inline OptimizationResult approx_3cc(const NeutralityGraph& g,
                                     std::size_t size_limit = kThreeCycleCoverLimit) {
  const auto started = Clock::now();
  if (g.size() < 3) throw InvalidArgument("approx_3cc needs at least 3 stories");
  const auto cover = max_weight_3cycle_cover(g, size_limit);
  std::vector<Path> paths;
  for (const auto& c : cover.cycles) paths.push_back(remove_min_edge(c, g));
  std::sort(paths.begin(), paths.end(), [](const Path& a, const Path& b) {
    return *std::min_element(a.begin(), a.end()) < *std::min_element(b.begin(), b.end());
  });
  return make_result(g, "3cc", join_paths(paths), AggregationKind::ConditionalAverage, started);
}

struct TwoOptStats {
  std::size_t sweeps = 0;
  std::size_t exchanges = 0;
  bool converged = false;
  /// Tour weight before the first sweep and after every sweep.
  std::vector<double> weight_history;
};

/// Moves that improve by less than this are ignored, which keeps the search finite.
inline constexpr double kTwoOptEpsilon = 1e-12;

template <typename WeightFn>
double tour_weight(std::span<const Vertex> tour, WeightFn&& w) {
  double total = 0.0;
  for (std::size_t i = 0; i < tour.size(); ++i) total += w(tour[i], tour[(i + 1) % tour.size()]);
  return total;
}

/// 2-opt local search minimising the weight of a Hamiltonian cycle.
///
/// One sweep visits every tour edge (t[i], t[i+1]) and applies the best
/// improving exchange against another edge (t[j], t[j+1]): the two edges are
/// replaced by (t[i], t[j]) and (t[i+1], t[j+1]) by reversing t[i+1..j].
/// Stops at a 2-opt local optimum or after `cfg.max_two_opt_iters` sweeps;
/// the tour is valid after any sweep.
template <typename WeightFn>
Path two_opt(Path tour, WeightFn&& w, const HeuristicConfig& cfg, TwoOptStats* stats = nullptr) {
  const std::size_t n = tour.size();
  TwoOptStats local;
  TwoOptStats& st = stats ? *stats : local;
  st = {};
  st.weight_history.push_back(tour_weight(tour, w));
  if (n < 4) {
    st.converged = true;
    return tour;
  }
  while (!cfg.max_two_opt_iters || st.sweeps < *cfg.max_two_opt_iters) {
    bool improved = false;
    for (std::size_t i = 0; i + 2 < n; ++i) {
      const Vertex a = tour[i], b = tour[i + 1];
      double best_delta = -kTwoOptEpsilon;
      std::size_t best_j = 0;
      for (std::size_t j = i + 2; j < n; ++j) {
        if (i == 0 && j == n - 1) continue;  // edges share t[0]
        const Vertex c = tour[j], d = tour[(j + 1) % n];
        const double delta = w(a, c) + w(b, d) - w(a, b) - w(c, d);
        if (delta < best_delta) {
          best_delta = delta;
          best_j = j;
        }
      }
      if (best_j != 0) {
        std::reverse(tour.begin() + static_cast<std::ptrdiff_t>(i + 1),
                     tour.begin() + static_cast<std::ptrdiff_t>(best_j + 1));
        ++st.exchanges;
        improved = true;
      }
    }
    ++st.sweeps;
    st.weight_history.push_back(tour_weight(tour, w));
    if (!improved) {
      st.converged = true;
      break;
    }
  }
  return tour;
}

inline Path two_opt(const NeutralityGraph& g, Path tour, const HeuristicConfig& cfg,
                    TwoOptStats* stats = nullptr) {
  validate_permutation(tour, g.size());
  return two_opt(std::move(tour), [&g](Vertex a, Vertex b) { return g.weight(a, b); }, cfg, stats);
}

struct FeasibilityProbe {
  /// Hamiltonian cycle of the input graph. In path mode it is the probed
  /// path closed up, so only its closing edge may fall below delta.
  Path cycle;
  bool feasible = false;
  double penalty = 0.0;
};

/// Looks for a Hamiltonian cycle (or path, per cfg.probe) whose edges all
/// weigh at least `delta` by running 2-opt on penalties max(delta - w, 0)
/// from random tours.
inline FeasibilityProbe is_feasible(const NeutralityGraph& g, double delta,
                                    const HeuristicConfig& cfg, Rng& rng) {
  const std::size_t n = g.size();
  if (n < 3) throw InvalidArgument("feasibility probe needs at least 3 stories");
  const bool open = cfg.probe == ScatterProbe::Path;
  const Vertex hub = n;  // the extra vertex in path mode
  const auto penalty = [&g, delta, open, hub](Vertex a, Vertex b) {
    if (open && (a == hub || b == hub)) return 0.0;
    return std::max(delta - g.weight(a, b), 0.0);
  };
  FeasibilityProbe best;
  best.penalty = std::numeric_limits<double>::infinity();
  for (std::size_t attempt = 0; attempt < std::max<std::size_t>(1, cfg.restarts); ++attempt) {
    Path tour = two_opt(random_path(open ? n + 1 : n, rng), penalty, cfg);
    const double p = tour_weight(tour, penalty);
    if (p < best.penalty) {
      best.penalty = p;
      best.cycle = std::move(tour);
    }
    if (best.penalty <= cfg.feasibility_tolerance) break;
  }
  if (open) {
    auto at = std::find(best.cycle.begin(), best.cycle.end(), hub);
    std::rotate(best.cycle.begin(), at + 1, best.cycle.end());
    best.cycle.pop_back();
  }
  best.feasible = best.penalty <= cfg.feasibility_tolerance;
  return best;
}

inline FeasibilityProbe is_feasible(const NeutralityGraph& g, double delta,
                                    const HeuristicConfig& cfg) {
  Rng rng(cfg.rng_seed);
  return is_feasible(g, delta, cfg, rng);
}

/// Sorted distinct edge weights of the complete graph.
inline std::vector<double> distinct_edge_weights(const NeutralityGraph& g) {
  std::vector<double> ws;
  for (Vertex i = 0; i < g.size(); ++i) {
    for (Vertex j = i + 1; j < g.size(); ++j) ws.push_back(g.weight(i, j));
  }
  std::sort(ws.begin(), ws.end());
  ws.erase(std::unique(ws.begin(), ws.end()), ws.end());
  return ws;
}

/// Heuristic for the Hamiltonian path with the largest minimum edge.
///
/// Binary search over indices of the sorted distinct edge weights: probe
/// m = ceil((l + r) / 2), continue in [m, r] when feasible and in [l, m - 1]
/// otherwise; when l = r the probed cycle is returned as is. The cycle then
/// loses its minimum edge, which is the best single cut of any cycle.
inline OptimizationResult path_max_scatter(const NeutralityGraph& g, const HeuristicConfig& cfg = {}) {
  const auto started = Clock::now();
  const std::size_t n = g.size();
  if (n < 3) throw InvalidArgument("path_max_scatter needs at least 3 stories");
  const auto weights = distinct_edge_weights(g);
  Rng rng(cfg.rng_seed);

  std::size_t lo = 0, hi = weights.size() - 1;
  std::optional<Path> best_cycle;
  double best_delta = -1.0;
  Path cycle;
  std::size_t probes = 0;
  while (true) {
    const std::size_t mid = (lo + hi + 1) / 2;
    auto probe = is_feasible(g, weights[mid], cfg, rng);
    ++probes;
    if (probe.feasible && weights[mid] > best_delta) {
      best_delta = weights[mid];
      best_cycle = probe.cycle;
    }
    if (lo == hi) {
      cycle = std::move(probe.cycle);
      break;
    }
    if (probe.feasible) {
      lo = mid;
    } else {
      hi = mid - 1;
    }
  }
  auto res = make_result(g, "scatter", remove_min_edge(cycle, g), AggregationKind::Minimum, started);
  res.evaluations = probes;
  if (best_cycle) res.best_feasible_path = remove_min_edge(*best_cycle, g);
  return res;
}

enum class PathObjective { TotalWeight, MinEdge };

/// Largest n accepted by brute_force_path by default (n!/2 paths).
inline constexpr std::size_t kBruteForceLimit = 10;

/// Exhaustive search over all n!/2 undirected Hamiltonian paths.
inline OptimizationResult brute_force_path(const NeutralityGraph& g, PathObjective objective,
                                           std::size_t size_limit = kBruteForceLimit) {
  const auto started = Clock::now();
  const std::size_t n = g.size();
  if (n > size_limit) {
    throw ResourceLimit("brute force is limited to n <= " + std::to_string(size_limit) +
                        " (got n = " + std::to_string(n) + "; " + std::to_string(n) +
                        "!/2 orderings would be enumerated)");
  }
  Path perm(n);
  for (Vertex v = 0; v < n; ++v) perm[v] = v;
  Path best = perm;
  double best_score = -std::numeric_limits<double>::infinity();
  std::size_t evaluated = 0;
  do {
    if (n > 1 && perm.front() > perm.back()) continue;  // each undirected path once
    ++evaluated;
    const double score =
        objective == PathObjective::TotalWeight ? g.path_weight(perm) : g.path_min_edge(perm);
    if (score > best_score) {
      best_score = score;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  const auto agg = objective == PathObjective::TotalWeight ? AggregationKind::ConditionalAverage
                                                           : AggregationKind::Minimum;
  auto res = make_result(g, "brute", std::move(best), agg, started);
  res.evaluations = evaluated;
  return res;
}

/// Either a fixed number of random orderings or a wall-clock allowance.
struct SamplingBudget {
  std::optional<std::size_t> samples;
  std::optional<std::chrono::nanoseconds> time;

  static SamplingBudget count(std::size_t k) { return {k, std::nullopt}; }
  static SamplingBudget duration(std::chrono::nanoseconds t) { return {std::nullopt, t}; }
};

/// Best of many uniformly random orderings. With a sample-count budget the
/// result is fully determined by (seed, count).
inline OptimizationResult sampling_baseline(const NeutralityGraph& g, AggregationKind agg,
                                            SamplingBudget budget, std::uint64_t seed) {
  const auto started = Clock::now();
  if (!budget.samples && !budget.time) throw InvalidArgument("sampling needs a budget");
  if (budget.samples && *budget.samples == 0) throw InvalidArgument("sample budget must be positive");
  if (budget.time && budget.time->count() <= 0) throw InvalidArgument("time budget must be positive");
  Rng rng(seed);
  Path best;
  double best_score = -std::numeric_limits<double>::infinity();
  std::size_t drawn = 0;
  while (true) {
    Path p = random_path(g.size(), rng);
    ++drawn;
    const double score = path_neutrality(g, p, agg);
    if (score > best_score) {
      best_score = score;
      best = std::move(p);
    }
    if (budget.samples && drawn >= *budget.samples) break;
    if (budget.time && Clock::now() - started >= *budget.time) break;
  }
  auto res = make_result(g, "sample", std::move(best), agg, started);
  res.evaluations = drawn;
  return res;
}

}  // namespace newsorder
