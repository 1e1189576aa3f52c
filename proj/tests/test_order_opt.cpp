#include <catch_amalgamated.hpp>

#include <random>

#include "newsorder/order_opt.hpp"
#include "oracles.hpp"

using namespace newsorder;
using Catch::Approx;

namespace {

NeutralityGraph relabel(const NeutralityGraph& g, const Path& perm) {
  const std::size_t n = g.size();
  std::vector<double> w(n * n, 0.0);
  for (Vertex i = 0; i < n; ++i) {
    for (Vertex j = 0; j < n; ++j) w[perm[i] * n + perm[j]] = g.weight(i, j);
  }
  return NeutralityGraph(n, std::move(w));
}

}  // namespace

TEST_CASE("figure instance: approx_mat reaches 4.1", "[order_opt]") {
  const auto g = oracle::figure_instance();
  const auto r = approx_mat(g);
  CHECK(is_permutation_of(r.path, 6));
  CHECK(r.total_weight == Approx(4.1).margin(1e-9));
  CHECK(r.neutrality == Approx(0.82).margin(1e-9));
}

TEST_CASE("figure instance: approx_cc reaches 4.1", "[order_opt]") {
  const auto g = oracle::figure_instance();
  const auto r = approx_cc(g);
  CHECK(is_permutation_of(r.path, 6));
  CHECK(r.total_weight == Approx(4.1).margin(1e-9));
  CHECK(r.neutrality == Approx(0.82).margin(1e-9));
}

TEST_CASE("figure instance under every relabelling", "[order_opt]") {
  const auto g = oracle::figure_instance();
  Path perm{0, 1, 2, 3, 4, 5};
  std::size_t mat_hits = 0, cc_hits = 0, total = 0;
  do {
    const auto h = relabel(g, perm);
    mat_hits += std::abs(approx_mat(h).total_weight - 4.1) < 1e-9;
    cc_hits += std::abs(approx_cc(h).total_weight - 4.1) < 1e-9;
    ++total;
  } while (std::next_permutation(perm.begin(), perm.end()));
  CHECK(mat_hits == total);
  CHECK(cc_hits == total);
}

TEST_CASE("figure instance brute-force optima", "[order_opt]") {
  const auto g = oracle::figure_instance();
  const auto best = oracle::best_paths(g);
  const auto total = brute_force_path(g, PathObjective::TotalWeight);
  const auto lo = brute_force_path(g, PathObjective::MinEdge);
  CHECK(total.evaluations == 360);
  CHECK(total.total_weight == Approx(best.total));
  CHECK(lo.min_edge_weight == Approx(best.min_edge));
  CHECK(total.total_weight >= 4.1 - 1e-9);
}

TEST_CASE("example 2.2 brute force", "[order_opt]") {
  const auto g = build_neutrality_graph(oracle::example_2_2());
  const auto r = brute_force_path(g, PathObjective::TotalWeight);
  // Weights 1 - C. t4 t1 t2 t3 collects .8 + .9 + .3 = 2.0, the best of the 12 paths.
  CHECK(r.total_weight == Approx(oracle::best_paths(g).total));
  CHECK(r.total_weight == Approx(2.0));
  CHECK(r.neutrality == Approx(2.0 / 3.0));
}

TEST_CASE("n = 2 and n = 3 edge cases", "[order_opt]") {
  const NeutralityGraph two(2, {0.0, 0.4, 0.4, 0.0});
  CHECK(approx_mat(two).total_weight == Approx(0.4));
  CHECK(approx_cc(two).total_weight == Approx(0.4));
  CHECK(brute_force_path(two, PathObjective::TotalWeight).total_weight == Approx(0.4));
  const NeutralityGraph tri(3, {0, .2, .5, .2, 0, .9, .5, .9, 0});
  CHECK(approx_3cc(tri).total_weight == Approx(1.4));
  CHECK(brute_force_path(tri, PathObjective::TotalWeight).evaluations == 3);
  CHECK_THROWS_AS(approx_mat(NeutralityGraph(1, {0.0})), InvalidArgument);
  CHECK_THROWS_AS(approx_3cc(two), InvalidArgument);
  CHECK_THROWS_AS(path_max_scatter(two), InvalidArgument);
}

TEST_CASE("approximation ratios on random graphs", "[order_opt][oracle]") {
  for (std::uint64_t seed = 0; seed < 80; ++seed) {
    const std::size_t n = 5 + seed % 5;
    const auto g = oracle::random_graph(n, seed, seed % 2 == 1);
    const double opt = oracle::best_paths(g).total;
    const auto mat = approx_mat(g);
    const auto cc = approx_cc(g);
    CHECK(mat.total_weight >= 0.5 * opt - 1e-9);
    CHECK(cc.total_weight >= 0.5 * opt - 1e-9);
    CHECK(mat.total_weight <= opt + 1e-9);
    if (n <= 8) CHECK(approx_3cc(g).total_weight >= 2.0 / 3.0 * opt - 1e-9);
  }
}

TEST_CASE("approx_cc keeps at least half of each cover", "[order_opt]") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto g = oracle::random_graph(12 + seed % 9, seed);
    std::vector<IterationTrace> trace;
    approx_cc(g, &trace);
    REQUIRE(!trace.empty());
    for (const auto& it : trace) {
      CHECK(it.nodes_after < it.nodes_before);
      CHECK(it.retained_weight >= 0.5 * it.structure_weight - 1e-9);
    }
    std::vector<IterationTrace> mt;
    approx_mat(g, &mt);
    for (const auto& it : mt) CHECK(it.nodes_after == (it.nodes_before + 1) / 2);
  }
}

TEST_CASE("approx_3cc retains two thirds of the cover", "[order_opt]") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto g = oracle::random_graph(6 + seed % 6, seed);
    const auto cover = max_weight_3cycle_cover(g);
    double kept = 0.0;
    for (const auto& c : cover.cycles) kept += g.path_weight(remove_min_edge(c, g));
    CHECK(kept >= 2.0 / 3.0 * cover.weight(g) - 1e-9);
    CHECK(approx_3cc(g).total_weight >= kept - 1e-9);
  }
}

TEST_CASE("join step arithmetic", "[order_opt]") {
  const auto g = oracle::figure_instance();
  const Path p{0, 1}, q{3, 5};
  const Path joined = join_paths({p, q});
  CHECK(joined == Path{0, 1, 3, 5});
  CHECK(g.path_weight(joined) == Approx(g.path_weight(p) + g.path_weight(q) + g.weight(1, 3)));
}

TEST_CASE("2-opt removes a crossing on four vertices", "[order_opt][two_opt]") {
  // Heavy edges 0-1 and 2-3. The three distinct tours weigh
  // 0-1-2-3: 22, 0-2-1-3: 4, 0-1-3-2: 22.
  std::vector<double> w(16, 1.0);
  w[0 * 4 + 1] = w[1 * 4 + 0] = 10.0;
  w[2 * 4 + 3] = w[3 * 4 + 2] = 10.0;
  const auto wf = [&](Vertex a, Vertex b) { return w[a * 4 + b]; };
  const Path tours[] = {{0, 1, 2, 3}, {0, 2, 1, 3}, {0, 1, 3, 2}};
  CHECK(tour_weight(tours[0], wf) == 22.0);
  CHECK(tour_weight(tours[1], wf) == 4.0);
  CHECK(tour_weight(tours[2], wf) == 22.0);

  TwoOptStats st;
  const Path out = two_opt(tours[0], wf, HeuristicConfig{}, &st);
  CHECK(st.exchanges == 1);
  CHECK(st.converged);
  CHECK(tour_weight(out, wf) == 4.0);

  TwoOptStats fixed;
  CHECK(two_opt(out, wf, HeuristicConfig{}, &fixed) == out);
  CHECK(fixed.exchanges == 0);
}

TEST_CASE("2-opt weight never increases and the sweep cap holds", "[order_opt][two_opt]") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto g = oracle::random_graph(30, seed);
    Rng rng(seed);
    HeuristicConfig cfg;
    TwoOptStats st;
    two_opt(g, random_path(30, rng), cfg, &st);
    CHECK(st.converged);
    for (std::size_t k = 1; k < st.weight_history.size(); ++k) {
      CHECK(st.weight_history[k] <= st.weight_history[k - 1] + 1e-12);
    }
    cfg.max_two_opt_iters = 2;
    TwoOptStats capped;
    two_opt(g, random_path(30, rng), cfg, &capped);
    CHECK(capped.sweeps <= 2);
  }
}

TEST_CASE("feasibility probe extremes", "[order_opt][scatter]") {
  const auto g = oracle::random_graph(8, 4);
  const auto ws = distinct_edge_weights(g);
  HeuristicConfig cfg;
  CHECK(is_feasible(g, ws.front(), cfg).feasible);
  const auto above = is_feasible(g, ws.back() + 0.1, cfg);
  CHECK_FALSE(above.feasible);
  CHECK(above.penalty > 0.0);
  CHECK(is_permutation_of(above.cycle, 8));
}

TEST_CASE("feasibility probe against exhaustive search", "[order_opt][scatter]") {
  for (auto mode : {ScatterProbe::Cycle, ScatterProbe::Path}) {
    std::size_t disagreements = 0, probes = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const std::size_t n = 5 + seed % 4;
      const auto g = oracle::random_graph(n, 300 + seed);
      const auto ws = distinct_edge_weights(g);
      const std::size_t edges = mode == ScatterProbe::Cycle ? n : n - 1;
      for (std::size_t k = 0; k < ws.size(); k += 3) {
        // Exhaustive: some Hamiltonian cycle (or path) has every edge >= delta.
        Path p(n);
        std::iota(p.begin(), p.end(), 0);
        bool exists = false;
        do {
          bool ok = true;
          for (std::size_t i = 0; i < edges && ok; ++i) ok = g.weight(p[i], p[(i + 1) % n]) >= ws[k];
          exists = exists || ok;
        } while (!exists && std::next_permutation(p.begin(), p.end()));
        HeuristicConfig cfg;
        cfg.rng_seed = seed * 100 + k;
        cfg.probe = mode;
        const auto probe = is_feasible(g, ws[k], cfg);
        if (probe.feasible) {
          CHECK(exists);  // never a false positive
          for (std::size_t i = 0; i < edges; ++i) CHECK(g.weight(probe.cycle[i], probe.cycle[(i + 1) % n]) >= ws[k]);
        }
        disagreements += probe.feasible != exists;
        ++probes;
      }
    }
    WARN((mode == ScatterProbe::Cycle ? "cycle" : "path") << " probe disagreement rate "
                                                           << double(disagreements) / double(probes));
  }
}

TEST_CASE("path probes match the optimum more often than cycle probes", "[order_opt][scatter]") {
  std::size_t path_hits = 0, cycle_hits = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto g = oracle::random_graph(5 + seed % 4, 900 + seed);
    const double best = oracle::best_paths(g).min_edge;
    HeuristicConfig cfg;
    cfg.rng_seed = seed;
    path_hits += std::abs(path_max_scatter(g, cfg).min_edge_weight - best) <= 1e-12;
    cfg.probe = ScatterProbe::Cycle;
    cycle_hits += std::abs(path_max_scatter(g, cfg).min_edge_weight - best) <= 1e-12;
  }
  CHECK(path_hits >= cycle_hits);
}

TEST_CASE("scatter never beats the exact bottleneck", "[order_opt][scatter]") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const std::size_t n = 5 + seed % 5;
    const auto g = oracle::random_graph(n, 500 + seed);
    HeuristicConfig cfg;
    cfg.rng_seed = seed;
    const auto r = path_max_scatter(g, cfg);
    CHECK(is_permutation_of(r.path, n));
    CHECK(r.min_edge_weight <= oracle::best_paths(g).min_edge + 1e-12);
    CHECK(r.neutrality == r.min_edge_weight);
  }
}

TEST_CASE("scatter on a uniform graph", "[order_opt][scatter]") {
  const auto g = build_neutrality_graph(PopMatrix::constant(7, 0.25));
  CHECK(path_max_scatter(g).min_edge_weight == Approx(0.75));
}

TEST_CASE("brute force refuses large inputs", "[order_opt]") {
  CHECK_THROWS_AS(brute_force_path(oracle::random_graph(11, 1), PathObjective::TotalWeight), ResourceLimit);
}

TEST_CASE("sampling baseline", "[order_opt][sampling]") {
  const auto g = oracle::random_graph(20, 11);
  const auto one = sampling_baseline(g, AggregationKind::ConditionalAverage, SamplingBudget::count(1), 3);
  Rng rng(3);
  const Path first = random_path(20, rng);
  CHECK(one.path == first);
  CHECK(one.evaluations == 1);

  const auto a = sampling_baseline(g, AggregationKind::Minimum, SamplingBudget::count(1000), 9);
  const auto b = sampling_baseline(g, AggregationKind::Minimum, SamplingBudget::count(1000), 9);
  CHECK(a.path == b.path);
  Rng again(9);
  std::vector<double> vals;
  for (int i = 0; i < 1000; ++i) vals.push_back(path_neutrality(g, random_path(20, again), AggregationKind::Minimum));
  std::nth_element(vals.begin(), vals.begin() + 500, vals.end());
  CHECK(a.neutrality >= vals[500]);

  const auto small = oracle::random_graph(4, 2);
  const auto many = sampling_baseline(small, AggregationKind::ConditionalAverage, SamplingBudget::count(2000), 1);
  CHECK(many.total_weight == Approx(oracle::best_paths(small).total));

  const auto timed = sampling_baseline(g, AggregationKind::ConditionalAverage,
                                       SamplingBudget::duration(std::chrono::milliseconds(5)), 1);
  CHECK(timed.evaluations >= 1);
  CHECK_THROWS_AS(sampling_baseline(g, AggregationKind::Minimum, SamplingBudget::count(0), 1), InvalidArgument);
}

TEST_CASE("result record serialises", "[order_opt]") {
  const auto r = approx_cc(oracle::figure_instance());
  const nlohmann::json j = r;
  CHECK(j.at("algorithm") == "cc");
  CHECK(j.at("path").size() == 6);
  CHECK(j.at("aggregation") == "avg");
}
