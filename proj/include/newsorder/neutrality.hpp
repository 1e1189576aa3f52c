#pragma once

// Story orderings, pairwise opinion priming (POP) values and the neutrality
// measures defined over them.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "newsorder/errors.hpp"

namespace newsorder {

using Vertex = std::size_t;
using Path = std::vector<Vertex>;

/// Absolute tolerance used when checking symmetry of externally supplied matrices.
inline constexpr double kSymmetryTolerance = 1e-9;

namespace detail {

inline std::string cell_name(std::size_t i, std::size_t j) {
  return "(" + std::to_string(i) + "," + std::to_string(j) + ")";
}

inline void require_unit_interval(double v, std::size_t i, std::size_t j, std::string_view what) {
  if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
    throw InvalidArgument(std::string(what) + " value at " + cell_name(i, j) + " is " +
                          std::to_string(v) + ", expected a value in [0, 1]");
  }
}

}  // namespace detail

/// Throws unless `path` visits every vertex in [0, n) exactly once.
inline void validate_permutation(std::span<const Vertex> path, std::size_t n) {
  if (path.size() != n) {
    throw InvalidArgument("expected a permutation of " + std::to_string(n) + " items, got " +
                          std::to_string(path.size()));
  }
  std::vector<bool> seen(n, false);
  for (Vertex v : path) {
    if (v >= n) throw InvalidArgument("vertex " + std::to_string(v) + " out of range");
    if (seen[v]) throw InvalidArgument("vertex " + std::to_string(v) + " repeated");
    seen[v] = true;
  }
}

inline bool is_permutation_of(std::span<const Vertex> path, std::size_t n) {
  try {
    validate_permutation(path, n);
    return true;
  } catch (const InvalidArgument&) {
    return false;
  }
}

/// A news story. Ids are contiguous from 0; the headline is informational.
struct Story {
  Vertex id = 0;
  std::string headline;
};

/// Symmetric matrix of pairwise opinion priming values in [0, 1].
/// The diagonal is unused and stored as 0.
class PopMatrix {
 public:
  /// `values` is row-major n x n. Off-diagonal pairs must agree within
  /// kSymmetryTolerance; they are stored as their mean.
  PopMatrix(std::size_t n, std::vector<double> values) : n_(n), values_(std::move(values)) {
    if (n_ < 2) throw InvalidArgument("a POP matrix needs at least 2 stories");
    if (values_.size() != n_ * n_) {
      throw InvalidArgument("POP matrix of size " + std::to_string(n_) + " needs " +
                            std::to_string(n_ * n_) + " values, got " +
                            std::to_string(values_.size()));
    }
    for (std::size_t i = 0; i < n_; ++i) {
      values_[i * n_ + i] = 0.0;
      for (std::size_t j = i + 1; j < n_; ++j) {
        double a = values_[i * n_ + j];
        double b = values_[j * n_ + i];
        detail::require_unit_interval(a, i, j, "POP");
        detail::require_unit_interval(b, j, i, "POP");
        if (std::abs(a - b) > kSymmetryTolerance) {
          throw InvalidArgument("POP matrix is not symmetric at " + detail::cell_name(i, j));
        }
        values_[i * n_ + j] = values_[j * n_ + i] = (a == b) ? a : 0.5 * (a + b);
      }
    }
  }

  /// Builds from the strict upper triangle listed row by row:
  /// (0,1), (0,2), ..., (0,n-1), (1,2), ...
  static PopMatrix from_upper_triangle(std::size_t n, std::span<const double> upper) {
    if (n < 2 || upper.size() != n * (n - 1) / 2) {
      throw InvalidArgument("upper triangle of a " + std::to_string(n) + "-story matrix needs " +
                            std::to_string(n < 2 ? 0 : n * (n - 1) / 2) + " values");
    }
    std::vector<double> full(n * n, 0.0);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j, ++k) full[i * n + j] = full[j * n + i] = upper[k];
    }
    return PopMatrix(n, std::move(full));
  }

  static PopMatrix constant(std::size_t n, double value) {
    std::vector<double> full(n * n, value);
    return PopMatrix(n, std::move(full));
  }

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * n_ + j]; }
  std::span<const double> values() const noexcept { return values_; }

 private:
  std::size_t n_;
  std::vector<double> values_;
};

/// Attenuation of priming with slot distance. D(1) = 1, non-increasing, values in [0, 1].
class DecayFn {
 public:
  enum class Kind { AdjacentOnly, Tabulated };

  static DecayFn adjacent_only() { return DecayFn(Kind::AdjacentOnly, {1.0}); }

  /// `table[d - 1]` is D(d); distances past the end of the table decay to 0.
  static DecayFn tabulated(std::vector<double> table) {
    if (table.empty() || table.front() != 1.0) {
      throw InvalidArgument("decay table must start with D(1) = 1");
    }
    for (std::size_t d = 0; d < table.size(); ++d) {
      detail::require_unit_interval(table[d], d + 1, d + 1, "decay");
      if (d > 0 && table[d] > table[d - 1]) {
        throw InvalidArgument("decay table must be non-increasing, D(" + std::to_string(d + 1) +
                              ") > D(" + std::to_string(d) + ")");
      }
    }
    return DecayFn(Kind::Tabulated, std::move(table));
  }

  Kind kind() const noexcept { return kind_; }
  bool adjacent_only_shape() const noexcept {
    return kind_ == Kind::AdjacentOnly || table_.size() == 1 ||
           std::all_of(table_.begin() + 1, table_.end(), [](double v) { return v == 0.0; });
  }

  double operator()(std::size_t distance) const {
    if (distance == 0) throw InvalidArgument("decay is defined for distances >= 1");
    return distance <= table_.size() ? table_[distance - 1] : 0.0;
  }

  const std::vector<double>& table() const noexcept { return table_; }

 private:
  DecayFn(Kind kind, std::vector<double> table) : kind_(kind), table_(std::move(table)) {}

  Kind kind_;
  std::vector<double> table_;
};

/// slots()[i] is the 1-based position of story i.
class Ordering {
 public:
  explicit Ordering(std::vector<std::size_t> slots) : slots_(std::move(slots)) {
    const std::size_t n = slots_.size();
    std::vector<bool> seen(n + 1, false);
    for (std::size_t s : slots_) {
      if (s < 1 || s > n) {
        throw InvalidArgument("slot " + std::to_string(s) + " outside [1, " + std::to_string(n) +
                              "]");
      }
      if (seen[s]) throw InvalidArgument("slot " + std::to_string(s) + " assigned twice");
      seen[s] = true;
    }
  }

  static Ordering identity(std::size_t n) {
    std::vector<std::size_t> slots(n);
    for (std::size_t i = 0; i < n; ++i) slots[i] = i + 1;
    return Ordering(std::move(slots));
  }

  std::size_t size() const noexcept { return slots_.size(); }
  std::size_t slot(Vertex story) const { return slots_.at(story); }
  const std::vector<std::size_t>& slots() const noexcept { return slots_; }

  /// Stories listed in slot order.
  Path to_path() const {
    Path path(slots_.size());
    for (std::size_t i = 0; i < slots_.size(); ++i) path[slots_[i] - 1] = i;
    return path;
  }

  Ordering reversed() const {
    std::vector<std::size_t> slots(slots_.size());
    for (std::size_t i = 0; i < slots_.size(); ++i) slots[i] = slots_.size() + 1 - slots_[i];
    return Ordering(std::move(slots));
  }

  friend bool operator==(const Ordering&, const Ordering&) = default;

 private:
  std::vector<std::size_t> slots_;
};

inline Ordering ordering_from_path(std::span<const Vertex> path) {
  validate_permutation(path, path.size());
  std::vector<std::size_t> slots(path.size());
  for (std::size_t k = 0; k < path.size(); ++k) slots[path[k]] = k + 1;
  return Ordering(std::move(slots));
}

inline Path path_from_ordering(const Ordering& ord) { return ord.to_path(); }

enum class AggregationKind { ConditionalAverage, Minimum };

inline std::string_view to_string(AggregationKind agg) {
  return agg == AggregationKind::ConditionalAverage ? "avg" : "min";
}

inline AggregationKind parse_aggregation(std::string_view s) {
  if (s == "avg" || s == "average" || s == "conditional-average") {
    return AggregationKind::ConditionalAverage;
  }
  if (s == "min" || s == "minimum") return AggregationKind::Minimum;
  throw InvalidArgument("unknown aggregation '" + std::string(s) + "' (expected avg or min)");
}

/// N_ij = 1 - D(|s_j - s_i|) * C(i, j).
inline double pairwise_neutrality(const PopMatrix& pop, const Ordering& ord, const DecayFn& decay,
                                  Vertex i, Vertex j) {
  const std::size_t n = pop.size();
  if (ord.size() != n) throw InvalidArgument("ordering and POP matrix sizes differ");
  if (i >= n || j >= n) throw InvalidArgument("story index out of range");
  if (i == j) throw InvalidArgument("pairwise neutrality needs two distinct stories");
  const std::size_t si = ord.slot(i), sj = ord.slot(j);
  const std::size_t distance = si > sj ? si - sj : sj - si;
  return 1.0 - decay(distance) * pop(i, j);
}

namespace detail {

// Adjacent pairs only; every other pair has N = 1.
inline double adjacent_neutrality(const PopMatrix& pop, const Ordering& ord, AggregationKind agg) {
  const Path path = ord.to_path();
  double sum = 0.0;
  double lowest = 1.0;
  for (std::size_t k = 0; k + 1 < path.size(); ++k) {
    const double nij = 1.0 - pop(path[k], path[k + 1]);
    sum += nij;
    lowest = std::min(lowest, nij);
  }
  if (agg == AggregationKind::Minimum) return lowest;
  return sum / static_cast<double>(path.size() - 1);
}

}  // namespace detail

/// Aggregated neutrality of a whole ordering.
///
/// ConditionalAverage averages N_ij over the pairs where D > 0; Minimum takes
/// the minimum over all unordered pairs. Adjacent-only decay is evaluated in
/// O(n), anything else in O(n^2).
inline double ordering_neutrality(const PopMatrix& pop, const Ordering& ord, const DecayFn& decay,
                                  AggregationKind agg) {
  const std::size_t n = pop.size();
  if (ord.size() != n) throw InvalidArgument("ordering and POP matrix sizes differ");
  if (decay.adjacent_only_shape()) return detail::adjacent_neutrality(pop, ord, agg);

  double sum = 0.0;
  std::size_t support = 0;
  double lowest = std::numeric_limits<double>::infinity();
  for (Vertex i = 0; i < n; ++i) {
    for (Vertex j = i + 1; j < n; ++j) {
      const std::size_t si = ord.slot(i), sj = ord.slot(j);
      const double d = decay(si > sj ? si - sj : sj - si);
      const double nij = 1.0 - d * pop(i, j);
      lowest = std::min(lowest, nij);
      if (d > 0.0) {
        sum += nij;
        ++support;
      }
    }
  }
  if (agg == AggregationKind::Minimum) return lowest;
  if (support == 0) throw DegenerateInput("decay has empty support over this ordering");
  return sum / static_cast<double>(support);
}

/// Complete undirected graph on the stories with edge weights in [0, 1].
/// Built from a POP matrix the weight of (i, j) is 1 - C(i, j).
class NeutralityGraph {
 public:
  NeutralityGraph(std::size_t n, std::vector<double> weights) : n_(n), w_(std::move(weights)) {
    if (n_ < 1) throw InvalidArgument("graph needs at least one vertex");
    if (w_.size() != n_ * n_) throw InvalidArgument("weight matrix has the wrong size");
    for (std::size_t i = 0; i < n_; ++i) {
      w_[i * n_ + i] = 0.0;
      for (std::size_t j = i + 1; j < n_; ++j) {
        detail::require_unit_interval(w_[i * n_ + j], i, j, "edge weight");
        if (std::abs(w_[i * n_ + j] - w_[j * n_ + i]) > kSymmetryTolerance) {
          throw InvalidArgument("edge weights are not symmetric at " + detail::cell_name(i, j));
        }
        w_[j * n_ + i] = w_[i * n_ + j];
      }
    }
  }

  std::size_t size() const noexcept { return n_; }
  double weight(Vertex i, Vertex j) const { return w_[i * n_ + j]; }
  std::span<const double> weights() const noexcept { return w_; }

  double max_weight() const {
    double m = 0.0;
    for (double v : w_) m = std::max(m, v);
    return m;
  }

  double path_weight(std::span<const Vertex> path) const {
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < path.size(); ++k) total += weight(path[k], path[k + 1]);
    return total;
  }

  /// Minimum edge on the path; 1 (the neutral value) for a single vertex.
  double path_min_edge(std::span<const Vertex> path) const {
    double m = 1.0;
    for (std::size_t k = 0; k + 1 < path.size(); ++k) m = std::min(m, weight(path[k], path[k + 1]));
    return m;
  }

  /// Closed-walk weight. A 2-cycle traverses its edge in both directions.
  double cycle_weight(std::span<const Vertex> cycle) const {
    if (cycle.size() < 2) return 0.0;
    return path_weight(cycle) + weight(cycle.back(), cycle.front());
  }

 private:
  std::size_t n_;
  std::vector<double> w_;
};

inline NeutralityGraph build_neutrality_graph(const PopMatrix& pop) {
  const std::size_t n = pop.size();
  std::vector<double> w(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) w[i * n + j] = 1.0 - pop(i, j);
    }
  }
  return NeutralityGraph(n, std::move(w));
}

/// Neutrality of the ordering induced by `path` under adjacent-only decay.
inline double path_neutrality(const NeutralityGraph& g, std::span<const Vertex> path,
                              AggregationKind agg) {
  if (path.size() < 2) return 1.0;
  if (agg == AggregationKind::Minimum) return g.path_min_edge(path);
  return g.path_weight(path) / static_cast<double>(path.size() - 1);
}

}  // namespace newsorder
