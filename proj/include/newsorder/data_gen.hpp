#pragma once

// Instance generation and file ingestion.
//
// POP matrix CSV: first line `n`, then n lines of n comma-separated values
// with a zero diagonal. A strict upper triangle (row i holding n - 1 - i
// values) is accepted too and mirrored.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <boost/math/distributions/beta.hpp>

#include "newsorder/detect.hpp"
#include "newsorder/errors.hpp"
#include "newsorder/neutrality.hpp"

namespace newsorder {

/// Parameters of the random instance generators. The Beta defaults and the
/// "high" threshold are configuration, not fitted values.
struct GeneratorConfig {
  std::size_t n = 10;
  double alpha = 0.5;
  double beta = 0.5;
  double high_threshold = 0.5;
  bool triangle_constrained = false;
  std::uint64_t seed = 0;

  void validate() const {
    if (n < 2) throw InvalidArgument("generator needs n >= 2");
    if (!(alpha > 0.0) || !(beta > 0.0) || !std::isfinite(alpha) || !std::isfinite(beta)) {
      throw InvalidArgument("Beta parameters must be positive and finite");
    }
    if (!(high_threshold > 0.0 && high_threshold < 1.0)) {
      throw InvalidArgument("high_threshold must lie in (0, 1)");
    }
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw InvalidArgument("expected a boolean, got '" + v + "'");
}

inline double parse_double(std::string_view text, std::size_t line) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw ParseError("cannot parse '" + t + "' as a number", line);
  }
  return v;
}

inline std::size_t parse_count(std::string_view text, std::size_t line) {
  const std::string t = trim(text);
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw ParseError("cannot parse '" + t + "' as a non-negative integer", line);
  }
  return v;
}

}  // namespace detail

/// Plain `key = value` config (`#` starts a comment). Recognised keys:
/// n, alpha, beta, high_threshold, triangle_constrained, seed.
inline GeneratorConfig parse_generator_config(std::istream& in, GeneratorConfig cfg = {}) {
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string text = detail::trim(std::string_view(raw).substr(0, hash));
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ParseError("expected key = value", line);
    const std::string key = detail::trim(std::string_view(text).substr(0, eq));
    const std::string value = detail::trim(std::string_view(text).substr(eq + 1));
    if (key == "n") {
      cfg.n = detail::parse_count(value, line);
    } else if (key == "alpha") {
      cfg.alpha = detail::parse_double(value, line);
    } else if (key == "beta") {
      cfg.beta = detail::parse_double(value, line);
    } else if (key == "high_threshold") {
      cfg.high_threshold = detail::parse_double(value, line);
    } else if (key == "triangle_constrained") {
      try {
        cfg.triangle_constrained = detail::parse_bool(value);
      } catch (const InvalidArgument& e) {
        throw ParseError(e.what(), line);
      }
    } else if (key == "seed") {
      cfg.seed = detail::parse_count(value, line);
    } else {
      throw ParseError("unknown key '" + key + "'", line);
    }
  }
  cfg.validate();
  return cfg;
}

/// Beta(alpha, beta) sampler built from two Gamma draws, with inverse-CDF
/// draws restricted to one side of a threshold.
class BetaSampler {
 public:
  BetaSampler(double alpha, double beta) : x_(alpha, 1.0), y_(beta, 1.0), dist_(alpha, beta) {}

  double operator()(Rng& rng) {
    while (true) {
      const double x = x_(rng), y = y_(rng);
      if (x + y > 0.0) return x / (x + y);
    }
  }

  /// Draw conditioned on value >= threshold.
  double at_least(double threshold, Rng& rng) {
    const double f = boost::math::cdf(dist_, threshold);
    if (f >= 1.0) return threshold;
    std::uniform_real_distribution<double> u(f, 1.0);
    return std::clamp(boost::math::quantile(dist_, u(rng)), threshold, 1.0);
  }

  /// Draw conditioned on value < threshold.
  double below(double threshold, Rng& rng) {
    const double f = boost::math::cdf(dist_, threshold);
    const double cap = std::nextafter(threshold, 0.0);
    if (f <= 0.0) return cap;
    std::uniform_real_distribution<double> u(0.0, f);
    return std::clamp(boost::math::quantile(dist_, u(rng)), 0.0, cap);
  }

 private:
  std::gamma_distribution<double> x_, y_;
  boost::math::beta_distribution<double> dist_;
};

/// Independent Beta draws for every unordered pair, mirrored.
inline PopMatrix gen_semi_synthetic(const GeneratorConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  BetaSampler sample(cfg.alpha, cfg.beta);
  std::vector<double> upper;
  upper.reserve(cfg.n * (cfg.n - 1) / 2);
  for (std::size_t i = 0; i < cfg.n; ++i) {
    for (std::size_t j = i + 1; j < cfg.n; ++j) upper.push_back(sample(rng));
  }
  return PopMatrix::from_upper_triangle(cfg.n, upper);
}

/// Triples whose POP values have exactly two entries >= threshold.
inline std::size_t count_two_high_triples(const PopMatrix& pop, double threshold) {
  const std::size_t n = pop.size();
  std::size_t bad = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const int hij = pop(i, j) >= threshold;
      for (std::size_t k = j + 1; k < n; ++k) {
        if (hij + (pop(i, k) >= threshold) + (pop(j, k) >= threshold) == 2) ++bad;
      }
    }
  }
  return bad;
}

inline bool satisfies_triangle_constraint(const PopMatrix& pop, double threshold) {
  return count_two_high_triples(pop, threshold) == 0;
}

namespace detail {

// Clique sizes whose within-clique pair count approximates `target_pairs`,
// filled greedily largest first.
inline std::vector<std::size_t> clique_sizes(std::size_t n, std::size_t target_pairs) {
  std::vector<std::size_t> sizes;
  std::size_t left = n;
  while (left > 0) {
    std::size_t s = 1;
    while (s < left && (s + 1) * s / 2 <= target_pairs) ++s;
    sizes.push_back(s);
    target_pairs -= s * (s - 1) / 2;
    left -= s;
  }
  return sizes;
}

}  // namespace detail

/// Enforces "no triple with exactly two high entries" on a drawn matrix.
///
/// The constraint holds exactly when the high pairs form vertex-disjoint
/// cliques. The repair keeps the drawn share of high pairs: it picks clique
/// sizes matching that share, grows each clique greedily from the vertex with
/// the most high pairs among unassigned vertices (adding the vertex with the
/// most high pairs into the clique), then redraws from the Beta distribution,
/// conditioned on the correct side of the threshold, every entry that
/// disagrees with the clique structure. Entries that already agree keep their
/// drawn value; a matrix that already satisfies the constraint is unchanged.
inline PopMatrix repair_triangle_constraint(const PopMatrix& pop, const GeneratorConfig& cfg, Rng& rng) {
  const std::size_t n = pop.size();
  const double thr = cfg.high_threshold;
  if (satisfies_triangle_constraint(pop, thr)) return pop;

  std::vector<std::vector<bool>> high(n, std::vector<bool>(n, false));
  std::size_t high_pairs = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (pop(i, j) >= thr) {
        high[i][j] = high[j][i] = true;
        ++high_pairs;
      }
    }
  }

  std::vector<std::size_t> cluster(n, n);
  std::size_t label = 0;
  for (std::size_t size : detail::clique_sizes(n, high_pairs)) {
    auto free_high_degree = [&](std::size_t v) {
      std::size_t d = 0;
      for (std::size_t u = 0; u < n; ++u) d += (cluster[u] == n && high[v][u]);
      return d;
    };
    std::size_t seed = n;
    std::size_t seed_degree = 0;
    for (std::size_t v = 0; v < n; ++v) {
      if (cluster[v] != n) continue;
      const std::size_t d = free_high_degree(v);
      if (seed == n || d > seed_degree) {
        seed = v;
        seed_degree = d;
      }
    }
    std::vector<std::size_t> members{seed};
    cluster[seed] = label;
    while (members.size() < size) {
      std::size_t pick = n, pick_links = 0;
      for (std::size_t v = 0; v < n; ++v) {
        if (cluster[v] != n) continue;
        std::size_t links = 0;
        for (std::size_t m : members) links += high[v][m];
        if (pick == n || links > pick_links) {
          pick = v;
          pick_links = links;
        }
      }
      cluster[pick] = label;
      members.push_back(pick);
    }
    ++label;
  }

  BetaSampler sample(cfg.alpha, cfg.beta);
  std::vector<double> values(pop.values().begin(), pop.values().end());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool same = cluster[i] == cluster[j];
      if (same == high[i][j]) continue;
      const double v = same ? sample.at_least(thr, rng) : sample.below(thr, rng);
      values[i * n + j] = values[j * n + i] = v;
    }
  }
  PopMatrix repaired(n, std::move(values));
  if (!satisfies_triangle_constraint(repaired, thr)) {
    throw std::runtime_error("triangle-constraint repair did not converge");
  }
  return repaired;
}

/// Beta draws followed by the triangle-constraint repair.
inline PopMatrix gen_synthetic_triangle_constrained(const GeneratorConfig& cfg) {
  cfg.validate();
  const PopMatrix drawn = gen_semi_synthetic(cfg);
  // Separate stream for the repair so the raw draws match gen_semi_synthetic.
  Rng rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  return repair_triangle_constraint(drawn, cfg, rng);
}

inline PopMatrix generate_pop_matrix(const GeneratorConfig& cfg) {
  return cfg.triangle_constrained ? gen_synthetic_triangle_constrained(cfg) : gen_semi_synthetic(cfg);
}

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace detail

inline PopMatrix read_pop_matrix(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++lineno;
      if (!detail::trim(line).empty()) return true;
    }
    return false;
  };
  if (!next_line()) throw ParseError("empty POP matrix file", 1);
  const std::size_t n = detail::parse_count(line, lineno);
  if (n < 2) throw ParseError("POP matrix needs n >= 2", lineno);

  std::vector<double> full(n * n, 0.0);
  std::vector<bool> given(n * n, false);
  bool upper_only = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (!next_line()) {
      if (upper_only && i == n - 1) break;  // last triangle row is empty
      throw ParseError("expected " + std::to_string(n) + " matrix rows, found " + std::to_string(i),
                       lineno + 1);
    }
    const auto cells = detail::split_csv(detail::trim(line));
    if (i == 0) upper_only = cells.size() == n - 1 && n > 1;
    const std::size_t expected = upper_only ? n - 1 - i : n;
    if (cells.size() != expected) {
      throw ParseError("row " + std::to_string(i) + " has " + std::to_string(cells.size()) +
                           " values, expected " + std::to_string(expected),
                       lineno);
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const std::size_t j = upper_only ? i + 1 + c : c;
      const double v = detail::parse_double(cells[c], lineno);
      if (i == j) {
        if (v != 0.0) throw ParseError("diagonal entry (" + std::to_string(i) + "," + std::to_string(i) + ") must be 0", lineno);
        continue;
      }
      if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
        throw ParseError("value " + detail::trim(cells[c]) + " at (" + std::to_string(i) + "," +
                             std::to_string(j) + ") is outside [0, 1]",
                         lineno);
      }
      full[i * n + j] = v;
      given[i * n + j] = true;
      if (upper_only) {
        full[j * n + i] = v;
        given[j * n + i] = true;
      } else if (given[j * n + i] && std::abs(full[j * n + i] - v) > kSymmetryTolerance) {
        throw ParseError("matrix is not symmetric at (" + std::to_string(i) + "," + std::to_string(j) + ")",
                         lineno);
      }
    }
  }
  return PopMatrix(n, std::move(full));
}

inline void write_pop_matrix(const PopMatrix& m, std::ostream& out) {
  const std::size_t n = m.size();
  out << n << '\n';
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j) out << ',';
      out << (i == j ? 0.0 : m(i, j));
    }
    out << '\n';
  }
}

inline PopMatrix load_pop_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  return read_pop_matrix(in);
}

inline void save_pop_matrix(const PopMatrix& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_pop_matrix(m, out);
}

/// One headline per line; line k names story k.
inline std::vector<std::string> load_headlines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    out.push_back(line);
  }
  while (!out.empty() && detail::trim(out.back()).empty()) out.pop_back();
  return out;
}

/// Story indices in slot order, one per line.
inline Ordering read_ordering(std::istream& in, std::size_t n) {
  Path path;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    path.push_back(detail::parse_count(t, lineno));
  }
  try {
    validate_permutation(path, n);
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("ordering is not a permutation: ") + e.what());
  }
  return ordering_from_path(path);
}

inline Ordering load_ordering(const std::filesystem::path& path, std::size_t n) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  return read_ordering(in, n);
}

}  // namespace newsorder
