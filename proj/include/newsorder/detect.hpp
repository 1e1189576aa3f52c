#pragma once

// Cherry-picking detection: compare an observed ordering's neutrality with a
// sample of uniformly random orderings and bound the chance that a random
// ordering lands at least as far from the sample mean.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <json.hpp>

#include "newsorder/errors.hpp"
#include "newsorder/neutrality.hpp"

namespace newsorder {

using Rng = std::mt19937_64;

/// Default sample count for detection.
inline constexpr std::size_t kDefaultSampleCount = 300;

/// Uniformly random permutation of [0, n) as a path, O(n).
inline Path random_path(std::size_t n, Rng& rng) {
  Path path(n);
  for (std::size_t i = 0; i < n; ++i) path[i] = i;
  for (std::size_t i = n; i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(path[i - 1], path[pick(rng)]);
  }
  return path;
}

/// Fisher-Yates shuffle of the identity ordering.
inline Ordering fisher_yates_shuffle(std::size_t n, Rng& rng) {
  if (n < 1) throw InvalidArgument("cannot shuffle an empty ordering");
  return ordering_from_path(random_path(n, rng));
}

namespace detail {

inline constexpr std::size_t kSampleBlock = 256;

// Independent stream per block of samples, so results do not depend on the
// number of workers.
inline Rng block_rng(std::uint64_t seed, std::size_t block) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32)};
  return Rng(seq);
}

}  // namespace detail

/// Neutralities of `r` independent uniformly random orderings.
inline std::vector<double> sample_neutralities(const PopMatrix& pop, const DecayFn& decay,
                                               AggregationKind agg, std::size_t r,
                                               std::uint64_t seed, unsigned workers = 1) {
  if (r < 2) throw InvalidArgument("need at least 2 samples (the standard deviation is undefined)");
  std::vector<double> out(r);
  const std::size_t blocks = (r + detail::kSampleBlock - 1) / detail::kSampleBlock;
  auto run_block = [&](std::size_t b) {
    Rng rng = detail::block_rng(seed, b);
    const std::size_t end = std::min(r, (b + 1) * detail::kSampleBlock);
    for (std::size_t i = b * detail::kSampleBlock; i < end; ++i) {
      out[i] = ordering_neutrality(pop, fisher_yates_shuffle(pop.size(), rng), decay, agg);
    }
  };
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(blocks)));
  if (workers == 1) {
    for (std::size_t b = 0; b < blocks; ++b) run_block(b);
    return out;
  }
  std::vector<std::jthread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t b = w; b < blocks; b += workers) run_block(b);
    });
  }
  pool.clear();
  return out;
}

enum class Direction { BelowMean, AboveMean, AtMean };

inline std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::BelowMean: return "below_mean";
    case Direction::AboveMean: return "above_mean";
    default: return "at_mean";
  }
}

struct DetectionReport {
  double observed_neutrality = 0.0;
  double sample_mean = 0.0;
  double sample_stddev = 0.0;       // unbiased
  std::optional<double> lambda;     // empty when the sample has zero spread
  double probability_bound = 1.0;   // in [0, 1]
  std::size_t r = 0;
  Direction direction = Direction::AtMean;
};

/// Observed values within this distance of the sample mean count as at the mean.
inline constexpr double kAtMeanTolerance = 1e-12;

/// Two-sided sample-moment tail bound
///   Pr(|X - mean| >= lambda * sigma * sqrt((r + 1) / r)) <= 1 / lambda^2 + 1 / r,
/// with lambda chosen so the left-hand threshold equals |observed - mean|.
///
/// A sample with zero spread yields bound 1 when the observation equals the
/// mean, and the lambda -> infinity limit 1 / r otherwise.
inline DetectionReport kaban_bound(double observed, std::span<const double> samples) {
  const std::size_t r = samples.size();
  if (r < 2) throw InvalidArgument("need at least 2 samples");
  DetectionReport rep;
  rep.observed_neutrality = observed;
  rep.r = r;
  double sum = 0.0;
  for (double s : samples) sum += s;
  rep.sample_mean = sum / static_cast<double>(r);
  double ss = 0.0;
  for (double s : samples) ss += (s - rep.sample_mean) * (s - rep.sample_mean);
  rep.sample_stddev = std::sqrt(ss / static_cast<double>(r - 1));
  if (rep.sample_stddev < 1e-12) rep.sample_stddev = 0.0;

  const double diff = observed - rep.sample_mean;
  const bool at_mean = std::abs(diff) <= kAtMeanTolerance;
  rep.direction = at_mean ? Direction::AtMean : (diff < 0 ? Direction::BelowMean : Direction::AboveMean);
  const double inv_r = 1.0 / static_cast<double>(r);

  if (at_mean) {
    rep.lambda = 0.0;
    rep.probability_bound = 1.0;
  } else if (rep.sample_stddev == 0.0) {
    rep.lambda.reset();
    rep.probability_bound = inv_r;
  } else {
    const double scale = rep.sample_stddev * std::sqrt((static_cast<double>(r) + 1.0) * inv_r);
    const double lambda = std::abs(diff) / scale;
    rep.lambda = lambda;
    rep.probability_bound = std::min(1.0, 1.0 / (lambda * lambda) + inv_r);
  }
  return rep;
}

/// Full detection: sample, evaluate the observed ordering, bound.
/// O(r n) for adjacent-only decay, O(r n^2) otherwise.
inline DetectionReport detect(const PopMatrix& pop, const DecayFn& decay, AggregationKind agg,
                              const Ordering& observed, std::size_t r, std::uint64_t seed,
                              unsigned workers = 1) {
  if (observed.size() != pop.size()) throw InvalidArgument("ordering and POP matrix sizes differ");
  const auto samples = sample_neutralities(pop, decay, agg, r, seed, workers);
  return kaban_bound(ordering_neutrality(pop, observed, decay, agg), samples);
}

inline void to_json(nlohmann::json& j, const DetectionReport& rep) {
  j = nlohmann::json{{"observed_neutrality", rep.observed_neutrality},
                     {"sample_mean", rep.sample_mean},
                     {"sample_stddev", rep.sample_stddev},
                     {"lambda", rep.lambda ? nlohmann::json(*rep.lambda) : nlohmann::json(nullptr)},
                     {"probability_bound", rep.probability_bound},
                     {"r", rep.r},
                     {"direction", std::string(to_string(rep.direction))}};
}

inline std::string summarize(const DetectionReport& rep) {
  std::ostringstream os;
  os.precision(6);
  os << "observed neutrality " << rep.observed_neutrality << " vs. sample mean " << rep.sample_mean
     << " (sd " << rep.sample_stddev << ", r = " << rep.r << ")\n";
  switch (rep.direction) {
    case Direction::AtMean:
      os << "the observed ordering sits at the sample mean\n";
      break;
    case Direction::BelowMean:
      os << "the observed ordering is less neutral than a typical random ordering\n";
      break;
    case Direction::AboveMean:
      os << "the observed ordering is more neutral than a typical random ordering\n";
      break;
  }
  if (rep.lambda) {
    os << "lambda = " << *rep.lambda << "\n";
  } else {
    os << "lambda undefined (random orderings show no spread)\n";
  }
  os << "P(random ordering deviates this much) <= " << rep.probability_bound << "\n";
  return os.str();
}

}  // namespace newsorder
