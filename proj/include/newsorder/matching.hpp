#pragma once

// Maximum-weight matching engines: an exact blossom matcher for general
// graphs, the Hungarian method for square assignment problems, and an
// exhaustive matcher used as an oracle on small graphs.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "newsorder/errors.hpp"

namespace newsorder {

struct WeightedEdge {
  std::size_t u = 0;
  std::size_t v = 0;
  double weight = 0.0;
};

/// Simple undirected graph with non-negative finite edge weights.
/// Edges are normalized to u < v and kept sorted by (u, v).
class WeightedGraph {
 public:
  explicit WeightedGraph(std::size_t n = 0) : n_(n) {}

  WeightedGraph(std::size_t n, std::vector<WeightedEdge> edges) : n_(n), edges_(std::move(edges)) {
    for (auto& e : edges_) {
      if (e.u == e.v) throw InvalidArgument("self-loop on vertex " + std::to_string(e.u));
      if (e.u >= n_ || e.v >= n_) throw InvalidArgument("edge endpoint out of range");
      if (!std::isfinite(e.weight) || e.weight < 0.0) {
        throw InvalidArgument("edge weights must be finite and non-negative");
      }
      if (e.u > e.v) std::swap(e.u, e.v);
    }
    std::sort(edges_.begin(), edges_.end(), [](const WeightedEdge& a, const WeightedEdge& b) {
      return std::pair(a.u, a.v) < std::pair(b.u, b.v);
    });
    for (std::size_t k = 1; k < edges_.size(); ++k) {
      if (edges_[k].u == edges_[k - 1].u && edges_[k].v == edges_[k - 1].v) {
        throw InvalidArgument("duplicate edge (" + std::to_string(edges_[k].u) + "," +
                              std::to_string(edges_[k].v) + ")");
      }
    }
  }

  /// Complete graph on n vertices, weight(i, j) = w[i * n + j].
  static WeightedGraph complete(std::size_t n, const std::vector<double>& w) {
    std::vector<WeightedEdge> edges;
    edges.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) edges.push_back({i, j, w[i * n + j]});
    }
    return WeightedGraph(n, std::move(edges));
  }

  std::size_t vertex_count() const noexcept { return n_; }
  const std::vector<WeightedEdge>& edges() const noexcept { return edges_; }

  /// Weight of edge (u, v), or nullopt-like NaN when absent.
  double weight(std::size_t u, std::size_t v) const {
    if (u > v) std::swap(u, v);
    auto it = std::lower_bound(edges_.begin(), edges_.end(), std::pair(u, v),
                               [](const WeightedEdge& e, const std::pair<std::size_t, std::size_t>& key) {
                                 return std::pair(e.u, e.v) < key;
                               });
    if (it == edges_.end() || it->u != u || it->v != v) return std::numeric_limits<double>::quiet_NaN();
    return it->weight;
  }

 private:
  std::size_t n_;
  std::vector<WeightedEdge> edges_;
};

/// Vertex-disjoint set of edges, each pair stored as (smaller, larger), sorted.
struct Matching {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;

  double total_weight(const WeightedGraph& g) const {
    double total = 0.0;
    for (auto [u, v] : pairs) total += g.weight(u, v);
    return total;
  }

  /// mate[v] or npos when v is unmatched.
  std::vector<std::size_t> mates(std::size_t n) const {
    std::vector<std::size_t> mate(n, npos);
    for (auto [u, v] : pairs) {
      mate[u] = v;
      mate[v] = u;
    }
    return mate;
  }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

/// True when `m` uses only edges of `g` and no vertex twice.
inline bool is_valid_matching(const WeightedGraph& g, const Matching& m) {
  std::vector<bool> used(g.vertex_count(), false);
  for (auto [u, v] : m.pairs) {
    if (u >= g.vertex_count() || v >= g.vertex_count() || u == v) return false;
    if (used[u] || used[v]) return false;
    if (std::isnan(g.weight(u, v))) return false;
    used[u] = used[v] = true;
  }
  return true;
}

enum class MatchingMode {
  MaxWeight,             ///< any cardinality
  MaxCardinalityWeight,  ///< maximum weight among maximum-cardinality matchings
};

namespace detail {

// Primal-dual blossom algorithm for maximum-weight matching in general
// graphs (Galil's O(n^3) formulation). Vertices are 0..n-1; blossoms take ids
// n..2n-1. Edge endpoints are numbered p = 2k (edge k's first vertex) and
// p = 2k + 1 (its second vertex), so `p ^ 1` is the opposite endpoint.
class BlossomMatcher {
 public:
  BlossomMatcher(const WeightedGraph& g, bool max_cardinality)
      : nv_(g.vertex_count()), ne_(g.edges().size()), max_cardinality_(max_cardinality) {
    for (const auto& e : g.edges()) edges_.push_back({e.u, e.v, e.weight});
  }

  std::vector<long> solve() {
    if (ne_ == 0) return std::vector<long>(nv_, -1);
    init();
    for (std::size_t stage = 0; stage < nv_; ++stage) {
      if (!run_stage()) break;
      // End-of-stage cleanup: expand S-blossoms with zero dual.
      for (std::size_t b = nv_; b < 2 * nv_; ++b) {
        if (parent_[b] == -1 && base_[b] >= 0 && label_[b] == 1 && dual_[b] == 0.0) {
          expand_blossom(static_cast<long>(b), true);
        }
      }
    }
    std::vector<long> result(nv_, -1);
    for (std::size_t v = 0; v < nv_; ++v) {
      if (mate_[v] >= 0) result[v] = endpoint_[mate_[v]];
    }
    return result;
  }

 private:
  struct E {
    std::size_t u, v;
    double w;
  };

  void init() {
    double max_w = 0.0;
    for (const auto& e : edges_) max_w = std::max(max_w, e.w);
    endpoint_.resize(2 * ne_);
    for (std::size_t p = 0; p < 2 * ne_; ++p) {
      endpoint_[p] = static_cast<long>(p % 2 == 0 ? edges_[p / 2].u : edges_[p / 2].v);
    }
    neighbend_.assign(nv_, {});
    for (std::size_t k = 0; k < ne_; ++k) {
      neighbend_[edges_[k].u].push_back(static_cast<long>(2 * k + 1));
      neighbend_[edges_[k].v].push_back(static_cast<long>(2 * k));
    }
    mate_.assign(nv_, -1);
    label_.assign(2 * nv_, 0);
    labelend_.assign(2 * nv_, -1);
    inblossom_.resize(nv_);
    std::iota(inblossom_.begin(), inblossom_.end(), 0L);
    parent_.assign(2 * nv_, -1);
    childs_.assign(2 * nv_, {});
    base_.assign(2 * nv_, -1);
    for (std::size_t v = 0; v < nv_; ++v) base_[v] = static_cast<long>(v);
    endps_.assign(2 * nv_, {});
    bestedge_.assign(2 * nv_, -1);
    blossombestedges_.assign(2 * nv_, {});
    has_best_list_.assign(2 * nv_, false);
    unused_.clear();
    for (std::size_t b = nv_; b < 2 * nv_; ++b) unused_.push_back(static_cast<long>(b));
    dual_.assign(2 * nv_, 0.0);
    for (std::size_t v = 0; v < nv_; ++v) dual_[v] = max_w;
    allowedge_.assign(ne_, false);
    queue_.clear();
  }

  double slack(long k) const {
    const auto& e = edges_[static_cast<std::size_t>(k)];
    return dual_[e.u] + dual_[e.v] - 2.0 * e.w;
  }

  void leaves(long b, std::vector<long>& out) const {
    if (b < static_cast<long>(nv_)) {
      out.push_back(b);
      return;
    }
    for (long t : childs_[b]) leaves(t, out);
  }

  std::vector<long> leaves(long b) const {
    std::vector<long> out;
    leaves(b, out);
    return out;
  }

  void assign_label(long w, int t, long p) {
    const long b = inblossom_[w];
    label_[w] = label_[b] = t;
    labelend_[w] = labelend_[b] = p;
    bestedge_[w] = bestedge_[b] = -1;
    if (t == 1) {
      leaves(b, queue_);
    } else if (t == 2) {
      const long bs = base_[b];
      assign_label(endpoint_[mate_[bs]], 1, mate_[bs] ^ 1);
    }
  }

  // Trace back from v and w to find a new blossom base or detect an augmenting path (-1).
  long scan_blossom(long v, long w) {
    std::vector<long> path;
    long found = -1;
    while (v != -1 || w != -1) {
      long b = inblossom_[v];
      if (label_[b] & 4) {
        found = base_[b];
        break;
      }
      path.push_back(b);
      label_[b] = 5;
      if (labelend_[b] == -1) {
        v = -1;
      } else {
        v = endpoint_[labelend_[b]];
        b = inblossom_[v];
        v = endpoint_[labelend_[b]];
      }
      if (w != -1) std::swap(v, w);
    }
    for (long b : path) label_[b] = 1;
    return found;
  }

  void add_blossom(long base, long k) {
    long v = static_cast<long>(edges_[k].u);
    long w = static_cast<long>(edges_[k].v);
    const long bb = inblossom_[base];
    long bv = inblossom_[v];
    long bw = inblossom_[w];
    const long b = unused_.back();
    unused_.pop_back();
    base_[b] = base;
    parent_[b] = -1;
    parent_[bb] = b;
    auto& path = childs_[b];
    auto& endps = endps_[b];
    path.clear();
    endps.clear();
    while (bv != bb) {
      parent_[bv] = b;
      path.push_back(bv);
      endps.push_back(labelend_[bv]);
      v = endpoint_[labelend_[bv]];
      bv = inblossom_[v];
    }
    path.push_back(bb);
    std::reverse(path.begin(), path.end());
    std::reverse(endps.begin(), endps.end());
    endps.push_back(2 * k);
    while (bw != bb) {
      parent_[bw] = b;
      path.push_back(bw);
      endps.push_back(labelend_[bw] ^ 1);
      w = endpoint_[labelend_[bw]];
      bw = inblossom_[w];
    }
    label_[b] = 1;
    labelend_[b] = labelend_[bb];
    dual_[b] = 0.0;
    for (long leaf : leaves(b)) {
      if (label_[inblossom_[leaf]] == 2) queue_.push_back(leaf);
      inblossom_[leaf] = b;
    }
    std::vector<long> bestedgeto(2 * nv_, -1);
    for (long sub : path) {
      std::vector<long> candidates;
      if (!has_best_list_[sub]) {
        for (long leaf : leaves(sub)) {
          for (long p : neighbend_[leaf]) candidates.push_back(p / 2);
        }
      } else {
        candidates = blossombestedges_[sub];
      }
      for (long kk : candidates) {
        long i = static_cast<long>(edges_[kk].u);
        long j = static_cast<long>(edges_[kk].v);
        if (inblossom_[j] == b) std::swap(i, j);
        const long bj = inblossom_[j];
        if (bj != b && label_[bj] == 1 &&
            (bestedgeto[bj] == -1 || slack(kk) < slack(bestedgeto[bj]))) {
          bestedgeto[bj] = kk;
        }
      }
      blossombestedges_[sub].clear();
      has_best_list_[sub] = false;
      bestedge_[sub] = -1;
    }
    blossombestedges_[b].clear();
    for (long kk : bestedgeto) {
      if (kk != -1) blossombestedges_[b].push_back(kk);
    }
    has_best_list_[b] = true;
    bestedge_[b] = -1;
    for (long kk : blossombestedges_[b]) {
      if (bestedge_[b] == -1 || slack(kk) < slack(bestedge_[b])) bestedge_[b] = kk;
    }
  }

  void expand_blossom(long b, bool endstage) {
    const std::vector<long> children = childs_[b];
    for (long s : children) {
      parent_[s] = -1;
      if (s < static_cast<long>(nv_)) {
        inblossom_[s] = s;
      } else if (endstage && dual_[s] == 0.0) {
        expand_blossom(s, endstage);
      } else {
        for (long leaf : leaves(s)) inblossom_[leaf] = s;
      }
    }
    if (!endstage && label_[b] == 2) {
      const auto& ch = childs_[b];
      const auto& ep = endps_[b];
      const long len = static_cast<long>(ch.size());
      auto at = [len](const std::vector<long>& vec, long idx) {
        return vec[static_cast<std::size_t>(((idx % len) + len) % len)];
      };
      const long entrychild = inblossom_[endpoint_[labelend_[b] ^ 1]];
      long j = static_cast<long>(std::find(ch.begin(), ch.end(), entrychild) - ch.begin());
      long jstep, endptrick;
      if (j & 1) {
        j -= len;
        jstep = 1;
        endptrick = 0;
      } else {
        jstep = -1;
        endptrick = 1;
      }
      long p = labelend_[b];
      while (j != 0) {
        label_[endpoint_[p ^ 1]] = 0;
        label_[endpoint_[at(ep, j - endptrick) ^ endptrick ^ 1]] = 0;
        assign_label(endpoint_[p ^ 1], 2, p);
        allowedge_[at(ep, j - endptrick) / 2] = true;
        j += jstep;
        p = at(ep, j - endptrick) ^ endptrick;
        allowedge_[p / 2] = true;
        j += jstep;
      }
      long bv = at(ch, j);
      label_[endpoint_[p ^ 1]] = label_[bv] = 2;
      labelend_[endpoint_[p ^ 1]] = labelend_[bv] = p;
      bestedge_[bv] = -1;
      j += jstep;
      while (at(ch, j) != entrychild) {
        bv = at(ch, j);
        if (label_[bv] == 1) {
          j += jstep;
          continue;
        }
        long labelled = -1;
        for (long leaf : leaves(bv)) {
          if (label_[leaf] != 0) {
            labelled = leaf;
            break;
          }
        }
        if (labelled != -1) {
          label_[labelled] = 0;
          label_[endpoint_[mate_[base_[bv]]]] = 0;
          assign_label(labelled, 2, labelend_[labelled]);
        }
        j += jstep;
      }
    }
    label_[b] = -1;
    labelend_[b] = -1;
    childs_[b].clear();
    endps_[b].clear();
    base_[b] = -1;
    blossombestedges_[b].clear();
    has_best_list_[b] = false;
    bestedge_[b] = -1;
    unused_.push_back(b);
  }

  // Swap matched/unmatched edges along an alternating path through blossom b
  // so that vertex v becomes its base.
  void augment_blossom(long b, long v) {
    long t = v;
    while (parent_[t] != b) t = parent_[t];
    if (t >= static_cast<long>(nv_)) augment_blossom(t, v);
    auto& ch = childs_[b];
    auto& ep = endps_[b];
    const long len = static_cast<long>(ch.size());
    auto at = [len](const std::vector<long>& vec, long idx) {
      return vec[static_cast<std::size_t>(((idx % len) + len) % len)];
    };
    const long i = static_cast<long>(std::find(ch.begin(), ch.end(), t) - ch.begin());
    long j = i;
    long jstep, endptrick;
    if (i & 1) {
      j -= len;
      jstep = 1;
      endptrick = 0;
    } else {
      jstep = -1;
      endptrick = 1;
    }
    while (j != 0) {
      j += jstep;
      t = at(ch, j);
      const long p = at(ep, j - endptrick) ^ endptrick;
      if (t >= static_cast<long>(nv_)) augment_blossom(t, endpoint_[p]);
      j += jstep;
      t = at(ch, j);
      if (t >= static_cast<long>(nv_)) augment_blossom(t, endpoint_[p ^ 1]);
      mate_[endpoint_[p]] = p ^ 1;
      mate_[endpoint_[p ^ 1]] = p;
    }
    std::rotate(ch.begin(), ch.begin() + i, ch.end());
    std::rotate(ep.begin(), ep.begin() + i, ep.end());
    base_[b] = base_[ch[0]];
  }

  void augment_matching(long k) {
    const long v = static_cast<long>(edges_[k].u);
    const long w = static_cast<long>(edges_[k].v);
    const std::pair<long, long> starts[2] = {{v, 2 * k + 1}, {w, 2 * k}};
    for (auto [s, p] : starts) {
      while (true) {
        const long bs = inblossom_[s];
        if (bs >= static_cast<long>(nv_)) augment_blossom(bs, s);
        mate_[s] = p;
        if (labelend_[bs] == -1) break;
        const long t = endpoint_[labelend_[bs]];
        const long bt = inblossom_[t];
        s = endpoint_[labelend_[bt]];
        const long j = endpoint_[labelend_[bt] ^ 1];
        if (bt >= static_cast<long>(nv_)) augment_blossom(bt, j);
        mate_[j] = labelend_[bt];
        p = labelend_[bt] ^ 1;
      }
    }
  }

  // One stage: grow alternating trees until an augmentation happens or the
  // dual update proves none is possible. Returns whether it augmented.
  bool run_stage() {
    std::fill(label_.begin(), label_.end(), 0);
    std::fill(bestedge_.begin(), bestedge_.end(), -1);
    for (std::size_t b = nv_; b < 2 * nv_; ++b) {
      blossombestedges_[b].clear();
      has_best_list_[b] = false;
    }
    std::fill(allowedge_.begin(), allowedge_.end(), false);
    queue_.clear();
    for (std::size_t v = 0; v < nv_; ++v) {
      if (mate_[v] == -1 && label_[inblossom_[v]] == 0) assign_label(static_cast<long>(v), 1, -1);
    }

    while (true) {
      while (!queue_.empty()) {
        const long v = queue_.back();
        queue_.pop_back();
        for (long p : neighbend_[v]) {
          const long k = p / 2;
          const long w = endpoint_[p];
          if (inblossom_[v] == inblossom_[w]) continue;
          double kslack = 0.0;
          if (!allowedge_[k]) {
            kslack = slack(k);
            if (kslack <= 0.0) allowedge_[k] = true;
          }
          if (allowedge_[k]) {
            if (label_[inblossom_[w]] == 0) {
              assign_label(w, 2, p ^ 1);
            } else if (label_[inblossom_[w]] == 1) {
              const long base = scan_blossom(v, w);
              if (base >= 0) {
                add_blossom(base, k);
              } else {
                augment_matching(k);
                return true;
              }
            } else if (label_[w] == 0) {
              label_[w] = 2;
              labelend_[w] = p ^ 1;
            }
          } else if (label_[inblossom_[w]] == 1) {
            const long b = inblossom_[v];
            if (bestedge_[b] == -1 || kslack < slack(bestedge_[b])) bestedge_[b] = k;
          } else if (label_[w] == 0) {
            if (bestedge_[w] == -1 || kslack < slack(bestedge_[w])) bestedge_[w] = k;
          }
        }
      }

      int deltatype = -1;
      double delta = 0.0;
      long deltaedge = -1, deltablossom = -1;
      if (!max_cardinality_) {
        deltatype = 1;
        delta = *std::min_element(dual_.begin(), dual_.begin() + static_cast<long>(nv_));
      }
      for (std::size_t v = 0; v < nv_; ++v) {
        if (label_[inblossom_[v]] == 0 && bestedge_[v] != -1) {
          const double d = slack(bestedge_[v]);
          if (deltatype == -1 || d < delta) {
            delta = d;
            deltatype = 2;
            deltaedge = bestedge_[v];
          }
        }
      }
      for (std::size_t b = 0; b < 2 * nv_; ++b) {
        if (parent_[b] == -1 && label_[b] == 1 && bestedge_[b] != -1) {
          const double d = slack(bestedge_[b]) / 2.0;
          if (deltatype == -1 || d < delta) {
            delta = d;
            deltatype = 3;
            deltaedge = bestedge_[b];
          }
        }
      }
      for (std::size_t b = nv_; b < 2 * nv_; ++b) {
        if (base_[b] >= 0 && parent_[b] == -1 && label_[b] == 2 &&
            (deltatype == -1 || dual_[b] < delta)) {
          delta = dual_[b];
          deltatype = 4;
          deltablossom = static_cast<long>(b);
        }
      }
      if (deltatype == -1) {
        // Max-cardinality mode with no further progress possible.
        deltatype = 1;
        delta = std::max(0.0, *std::min_element(dual_.begin(), dual_.begin() + static_cast<long>(nv_)));
      }

      for (std::size_t v = 0; v < nv_; ++v) {
        const int lab = label_[inblossom_[v]];
        if (lab == 1) {
          dual_[v] -= delta;
        } else if (lab == 2) {
          dual_[v] += delta;
        }
      }
      for (std::size_t b = nv_; b < 2 * nv_; ++b) {
        if (base_[b] >= 0 && parent_[b] == -1) {
          if (label_[b] == 1) {
            dual_[b] += delta;
          } else if (label_[b] == 2) {
            dual_[b] -= delta;
          }
        }
      }

      if (deltatype == 1) return false;
      if (deltatype == 2) {
        allowedge_[deltaedge] = true;
        long i = static_cast<long>(edges_[deltaedge].u);
        if (label_[inblossom_[i]] == 0) i = static_cast<long>(edges_[deltaedge].v);
        queue_.push_back(i);
      } else if (deltatype == 3) {
        allowedge_[deltaedge] = true;
        queue_.push_back(static_cast<long>(edges_[deltaedge].u));
      } else {
        expand_blossom(deltablossom, false);
      }
    }
  }

  std::size_t nv_, ne_;
  bool max_cardinality_;
  std::vector<E> edges_;
  std::vector<long> endpoint_;
  std::vector<std::vector<long>> neighbend_;
  std::vector<long> mate_;
  std::vector<int> label_;
  std::vector<long> labelend_;
  std::vector<long> inblossom_;
  std::vector<long> parent_;
  std::vector<std::vector<long>> childs_;
  std::vector<long> base_;
  std::vector<std::vector<long>> endps_;
  std::vector<long> bestedge_;
  std::vector<std::vector<long>> blossombestedges_;
  std::vector<bool> has_best_list_;
  std::vector<long> unused_;
  std::vector<double> dual_;
  std::vector<bool> allowedge_;
  std::vector<long> queue_;
};

}  // namespace detail

/// Exact maximum-weight matching (blossom algorithm, O(n^3)).
///
/// With MatchingMode::MaxCardinalityWeight the result has maximum cardinality
/// and, among those, maximum weight. Ties are resolved deterministically by
/// the (u, v) edge order.
inline Matching max_weight_matching(const WeightedGraph& g,
                                    MatchingMode mode = MatchingMode::MaxWeight) {
  detail::BlossomMatcher matcher(g, mode == MatchingMode::MaxCardinalityWeight);
  const std::vector<long> mate = matcher.solve();
  Matching m;
  for (std::size_t v = 0; v < mate.size(); ++v) {
    if (mate[v] > static_cast<long>(v)) m.pairs.emplace_back(v, static_cast<std::size_t>(mate[v]));
  }
  return m;
}

/// Square weight matrix for the assignment problem. `forbidden`, when
/// non-empty, marks pairs that may not be assigned.
struct BipartiteGraph {
  std::size_t n = 0;
  std::vector<double> weights;  // row-major n x n, left i -> right j
  std::vector<bool> forbidden;

  double weight(std::size_t i, std::size_t j) const { return weights[i * n + j]; }
  bool allowed(std::size_t i, std::size_t j) const {
    return forbidden.empty() || !forbidden[i * n + j];
  }
};

/// Maximum-weight perfect assignment via the Hungarian method (O(n^3)).
/// Returns assignment[left] = right. Throws when forbidden pairs leave no
/// perfect assignment.
inline std::vector<std::size_t> max_weight_perfect_bipartite_matching(const BipartiteGraph& g) {
  const std::size_t n = g.n;
  if (g.weights.size() != n * n) throw InvalidArgument("bipartite weight matrix must be n x n");
  if (!g.forbidden.empty() && g.forbidden.size() != n * n) {
    throw InvalidArgument("forbidden mask must be n x n");
  }
  if (n == 0) return {};
  double max_abs = 0.0;
  for (double w : g.weights) {
    if (!std::isfinite(w)) throw InvalidArgument("bipartite weights must be finite");
    max_abs = std::max(max_abs, std::abs(w));
  }
  // Forbidden pairs cost more than any assignment made of allowed pairs.
  const double blocked = (static_cast<double>(n) + 1.0) * (2.0 * max_abs + 1.0);
  auto cost = [&](std::size_t i, std::size_t j) {
    return g.allowed(i, j) ? -g.weight(i, j) : blocked;
  };

  // Potentials-based shortest augmenting path formulation, 1-indexed.
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> assignment(n);
  for (std::size_t j = 1; j <= n; ++j) assignment[p[j] - 1] = j - 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (!g.allowed(i, assignment[i])) throw InvalidArgument("no perfect assignment avoids the forbidden pairs");
  }
  return assignment;
}

inline double assignment_weight(const BipartiteGraph& g, const std::vector<std::size_t>& assignment) {
  double total = 0.0;
  for (std::size_t i = 0; i < assignment.size(); ++i) total += g.weight(i, assignment[i]);
  return total;
}

/// Largest vertex count accepted by enumerate_matchings_oracle.
inline constexpr std::size_t kMatchingOracleLimit = 12;

/// Exhaustive maximum-weight matching. Test oracle for small graphs.
inline Matching enumerate_matchings_oracle(const WeightedGraph& g) {
  const std::size_t n = g.vertex_count();
  if (n > kMatchingOracleLimit) {
    throw ResourceLimit("matching oracle refuses graphs with more than " +
                        std::to_string(kMatchingOracleLimit) + " vertices");
  }
  std::vector<std::vector<double>> w(n, std::vector<double>(n, -1.0));
  for (const auto& e : g.edges()) w[e.u][e.v] = w[e.v][e.u] = e.weight;

  Matching best, current;
  double best_weight = -1.0;
  std::vector<bool> used(n, false);
  // Decide each vertex in turn: leave it unmatched or pair it with a later free vertex.
  auto recurse = [&](auto&& self, std::size_t v, double acc) -> void {
    while (v < n && used[v]) ++v;
    if (v >= n) {
      if (acc > best_weight) {
        best_weight = acc;
        best = current;
      }
      return;
    }
    used[v] = true;
    self(self, v + 1, acc);
    for (std::size_t u = v + 1; u < n; ++u) {
      if (used[u] || w[v][u] < 0.0) continue;
      used[u] = true;
      current.pairs.emplace_back(v, u);
      self(self, v + 1, acc + w[v][u]);
      current.pairs.pop_back();
      used[u] = false;
    }
    used[v] = false;
  };
  recurse(recurse, 0, 0.0);
  std::sort(best.pairs.begin(), best.pairs.end());
  return best;
}

}  // namespace newsorder
