#pragma once

// Command-line front end: optimize, detect, generate, oracle, bench.
//
// Exit codes: 0 ok, 2 usage or input error, 3 resource refusal, 1 internal.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "newsorder/cycle_cover.hpp"
#include "newsorder/data_gen.hpp"
#include "newsorder/detect.hpp"
#include "newsorder/errors.hpp"
#include "newsorder/neutrality.hpp"
#include "newsorder/order_opt.hpp"

namespace newsorder::cli {

enum ExitCode : int { kOk = 0, kInternal = 1, kUsage = 2, kResource = 3 };

/// Bad flag combinations detected after parsing.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline const std::vector<std::string>& algorithm_names() {
  static const std::vector<std::string> names{"mat", "cc", "3cc", "scatter", "brute", "sample"};
  return names;
}

/// scatter only optimises the minimum; mat, cc and 3cc only the average.
inline bool compatible(const std::string& alg, AggregationKind agg) {
  if (alg == "scatter") return agg == AggregationKind::Minimum;
  if (alg == "mat" || alg == "cc" || alg == "3cc") return agg == AggregationKind::ConditionalAverage;
  return alg == "brute" || alg == "sample";
}

inline AggregationKind default_aggregation(const std::string& alg) {
  return alg == "scatter" ? AggregationKind::Minimum : AggregationKind::ConditionalAverage;
}

/// "1000" is a sample count; "250ms" or "2s" a time allowance.
inline SamplingBudget parse_budget(const std::string& text) {
  auto number = [&](std::string_view digits) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
    if (digits.empty() || ec != std::errc() || ptr != digits.data() + digits.size() || !(v > 0.0)) {
      throw UsageError("bad --budget '" + text + "' (use a sample count, or a time such as 250ms or 2s)");
    }
    return v;
  };
  const std::string_view t(text);
  if (t.size() > 2 && t.substr(t.size() - 2) == "ms") {
    return SamplingBudget::duration(std::chrono::nanoseconds(
        static_cast<std::int64_t>(number(t.substr(0, t.size() - 2)) * 1e6)));
  }
  if (t.size() > 1 && t.back() == 's') {
    return SamplingBudget::duration(std::chrono::nanoseconds(
        static_cast<std::int64_t>(number(t.substr(0, t.size() - 1)) * 1e9)));
  }
  const double v = number(t);
  if (v != std::floor(v)) throw UsageError("sample count must be an integer: '" + text + "'");
  return SamplingBudget::count(static_cast<std::size_t>(v));
}

struct RunOptions {
  std::string algorithm;
  AggregationKind aggregation = AggregationKind::ConditionalAverage;
  std::uint64_t seed = 0;
  std::optional<std::size_t> max_iters;
  std::size_t restarts = 3;
  SamplingBudget budget = SamplingBudget::count(1000);
  std::size_t brute_limit = kBruteForceLimit;
  std::size_t three_cc_limit = kThreeCycleCoverLimit;
};

/// Dispatches to one algorithm. Throws UsageError on an incompatible pairing.
inline OptimizationResult run_algorithm(const NeutralityGraph& g, const RunOptions& opt) {
  if (!compatible(opt.algorithm, opt.aggregation)) {
    throw UsageError("algorithm '" + opt.algorithm + "' does not optimise aggregation '" +
                     std::string(to_string(opt.aggregation)) + "'");
  }
  HeuristicConfig hc;
  hc.max_two_opt_iters = opt.max_iters;
  hc.rng_seed = opt.seed;
  hc.restarts = opt.restarts;
  const auto& a = opt.algorithm;
  if (a == "mat") return approx_mat(g);
  if (a == "cc") return approx_cc(g);
  if (a == "3cc") return approx_3cc(g, opt.three_cc_limit);
  if (a == "scatter") return path_max_scatter(g, hc);
  if (a == "brute") {
    return brute_force_path(g,
                            opt.aggregation == AggregationKind::Minimum ? PathObjective::MinEdge
                                                                        : PathObjective::TotalWeight,
                            opt.brute_limit);
  }
  if (a == "sample") return sampling_baseline(g, opt.aggregation, opt.budget, opt.seed);
  throw UsageError("unknown algorithm '" + a + "'");
}

inline std::string format_double(double v, int precision = 6) {
  std::ostringstream os;
  os << std::setprecision(precision) << v;
  return os.str();
}

inline void print_result(std::ostream& out, const OptimizationResult& r,
                         const std::vector<std::string>& headlines) {
  validate_permutation(r.path, r.path.size());
  out << "algorithm: " << r.algorithm << " (" << to_string(r.aggregation) << ")\n";
  out << "ordering:\n";
  for (std::size_t k = 0; k < r.path.size(); ++k) {
    out << "  " << std::setw(3) << k + 1 << ". story " << r.path[k];
    if (r.path[k] < headlines.size()) out << "  " << headlines[r.path[k]];
    out << '\n';
  }
  out << "neutrality: " << format_double(r.neutrality) << '\n';
  out << "total weight: " << format_double(r.total_weight) << '\n';
  out << "min edge weight: " << format_double(r.min_edge_weight) << '\n';
  out << "elapsed: " << format_double(std::chrono::duration<double, std::milli>(r.elapsed).count(), 4)
      << " ms\n";
  if (r.best_feasible_path) {
    out << "best feasible probe path:";
    for (Vertex v : *r.best_feasible_path) out << ' ' << v;
    out << '\n';
  }
}

// ---------------------------------------------------------------- bench

/// One (algorithm, instance, trial) measurement.
struct BenchRecord {
  std::string algorithm;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::size_t trial = 0;
  AggregationKind aggregation = AggregationKind::ConditionalAverage;
  std::optional<std::size_t> max_iters;
  double neutrality = 0.0;
  double elapsed_ms = 0.0;
};

inline constexpr const char* kBenchCsvVersion = "newsorder-bench v1";

struct BenchSuite {
  std::vector<std::string> algorithms{"mat", "cc"};
  std::vector<std::size_t> sizes{6, 7, 8, 9, 15, 20, 30, 40, 50, 70, 100, 120, 150, 180};
  std::vector<std::uint64_t> seeds{0, 1, 2, 3};
  std::size_t trials = 3;
  AggregationKind aggregation = AggregationKind::ConditionalAverage;
  /// Largest n run under Minimum aggregation.
  std::size_t min_agg_cap = 70;
  bool triangle_constrained = false;
  double alpha = 0.5;
  double beta = 0.5;
  std::optional<std::size_t> max_iters;
  /// The sampling baseline gets the time the matched algorithm took on the
  /// same instance and trial; without one it falls back to this budget.
  std::string sample_match;
  SamplingBudget fallback_budget = SamplingBudget::count(1000);
};

/// Runs every cell; cells refused by a size gate are reported to `log` and skipped.
inline std::vector<BenchRecord> run_bench(const BenchSuite& suite, std::ostream& log) {
  std::vector<BenchRecord> records;
  const std::string match = !suite.sample_match.empty()
                                ? suite.sample_match
                                : (suite.aggregation == AggregationKind::Minimum ? "scatter" : "cc");
  for (std::size_t n : suite.sizes) {
    if (suite.aggregation == AggregationKind::Minimum && n > suite.min_agg_cap) continue;
    for (std::uint64_t seed : suite.seeds) {
      GeneratorConfig gc;
      gc.n = n;
      gc.seed = seed;
      gc.alpha = suite.alpha;
      gc.beta = suite.beta;
      gc.triangle_constrained = suite.triangle_constrained;
      const auto g = build_neutrality_graph(generate_pop_matrix(gc));
      for (std::size_t trial = 0; trial < suite.trials; ++trial) {
        std::map<std::string, std::chrono::nanoseconds> took;
        // Sampling runs last so its matched time is known.
        std::vector<std::string> order = suite.algorithms;
        std::stable_partition(order.begin(), order.end(), [](const std::string& a) { return a != "sample"; });
        for (const auto& alg : order) {
          RunOptions opt;
          opt.algorithm = alg;
          opt.aggregation = suite.aggregation;
          opt.seed = seed * 1000003ULL + trial;
          opt.max_iters = suite.max_iters;
          opt.budget = suite.fallback_budget;
          if (alg == "sample" && took.count(match)) opt.budget = SamplingBudget::duration(took[match]);
          try {
            const auto r = run_algorithm(g, opt);
            took[alg] = r.elapsed;
            records.push_back({alg, n, seed, trial, suite.aggregation, suite.max_iters, r.neutrality,
                               std::chrono::duration<double, std::milli>(r.elapsed).count()});
          } catch (const ResourceLimit& e) {
            if (trial == 0) log << "skipped " << alg << " at n = " << n << " seed " << seed << ": " << e.what() << '\n';
          } catch (const InvalidArgument& e) {
            if (trial == 0) log << "skipped " << alg << " at n = " << n << " seed " << seed << ": " << e.what() << '\n';
          }
        }
      }
    }
  }
  std::stable_sort(records.begin(), records.end(), [](const BenchRecord& a, const BenchRecord& b) {
    return std::tie(a.algorithm, a.n, a.seed, a.max_iters, a.trial) <
           std::tie(b.algorithm, b.n, b.seed, b.max_iters, b.trial);
  });
  return records;
}

/// 2-opt sweep-cap study: scatter at one size with max_two_opt_iters = 1..t_max.
inline std::vector<BenchRecord> run_early_stop_sweep(std::size_t n, const std::vector<std::uint64_t>& seeds,
                                                     std::size_t t_max, std::size_t trials,
                                                     bool triangle_constrained, std::ostream& log) {
  std::vector<BenchRecord> all;
  for (std::size_t t = 1; t <= t_max; ++t) {
    BenchSuite s;
    s.algorithms = {"scatter"};
    s.sizes = {n};
    s.seeds = seeds;
    s.trials = trials;
    s.aggregation = AggregationKind::Minimum;
    s.min_agg_cap = n;
    s.triangle_constrained = triangle_constrained;
    s.max_iters = t;
    auto part = run_bench(s, log);
    all.insert(all.end(), part.begin(), part.end());
  }
  return all;
}

inline void write_bench_csv(std::ostream& out, const std::vector<BenchRecord>& records) {
  out << "# " << kBenchCsvVersion << '\n';
  out << "algorithm,n,seed,trial,aggregation,max_iters,neutrality,elapsed_ms\n";
  out << std::setprecision(10);
  for (const auto& r : records) {
    out << r.algorithm << ',' << r.n << ',' << r.seed << ',' << r.trial << ',' << to_string(r.aggregation)
        << ',' << (r.max_iters ? std::to_string(*r.max_iters) : "") << ',' << r.neutrality << ','
        << r.elapsed_ms << '\n';
  }
}

struct BenchSummaryRow {
  std::string algorithm;
  std::size_t n = 0;
  std::optional<std::size_t> max_iters;
  double mean_neutrality = 0.0;
  /// Minimum over trials, averaged over instances.
  double min_elapsed_ms = 0.0;
  std::size_t instances = 0;
};

/// Per (algorithm, n, max_iters): mean neutrality over instances (each
/// instance's best trial) and the mean over instances of the fastest trial.
inline std::vector<BenchSummaryRow> summarize_bench(const std::vector<BenchRecord>& records) {
  using Key = std::tuple<std::string, std::size_t, std::optional<std::size_t>>;
  std::map<Key, std::map<std::uint64_t, std::pair<double, double>>> cells;
  for (const auto& r : records) {
    auto& inst = cells[{r.algorithm, r.n, r.max_iters}];
    auto it = inst.find(r.seed);
    if (it == inst.end()) {
      inst[r.seed] = {r.neutrality, r.elapsed_ms};
    } else {
      it->second.first = std::max(it->second.first, r.neutrality);
      it->second.second = std::min(it->second.second, r.elapsed_ms);
    }
  }
  std::vector<BenchSummaryRow> rows;
  for (const auto& [key, inst] : cells) {
    BenchSummaryRow row{std::get<0>(key), std::get<1>(key), std::get<2>(key), 0.0, 0.0, inst.size()};
    for (const auto& [seed, v] : inst) {
      row.mean_neutrality += v.first;
      row.min_elapsed_ms += v.second;
    }
    row.mean_neutrality /= double(inst.size());
    row.min_elapsed_ms /= double(inst.size());
    rows.push_back(row);
  }
  return rows;
}

inline void write_summary_csv(std::ostream& out, const std::vector<BenchSummaryRow>& rows) {
  out << "# " << kBenchCsvVersion << " summary\n";
  out << "algorithm,n,max_iters,instances,mean_neutrality,min_elapsed_ms\n";
  out << std::setprecision(10);
  for (const auto& r : rows) {
    out << r.algorithm << ',' << r.n << ',' << (r.max_iters ? std::to_string(*r.max_iters) : "") << ','
        << r.instances << ',' << r.mean_neutrality << ',' << r.min_elapsed_ms << '\n';
  }
}

// ---------------------------------------------------------------- entry point

namespace detail {

inline void emit_json_line(std::ostream& out, const nlohmann::json& j, const std::string& out_path) {
  out << j.dump() << '\n';
  if (!out_path.empty()) {
    std::ofstream f(out_path, std::ios::app);
    if (!f) throw std::runtime_error("cannot write " + out_path);
    f << j.dump() << '\n';
  }
}

inline DecayFn parse_decay(const std::vector<double>& table) {
  return table.empty() ? DecayFn::adjacent_only() : DecayFn::tabulated(table);
}

}  // namespace detail

/// Parses `args` (without the program name) and runs the chosen command.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"News ordering neutrality: evaluate, detect cherry-picking, optimise"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("newsorder 1.0 (") + kBenchCsvVersion + ")");

  std::string matrix, ordering_file, headlines_file, out_path, agg_text, alg, budget_text, config_file;
  std::uint64_t seed = 0;
  std::size_t r = kDefaultSampleCount, restarts = 3, brute_limit = kBruteForceLimit;
  std::optional<std::size_t> max_iters;
  unsigned workers = 1;
  std::vector<double> decay_table;

  auto* optimize = app.add_subcommand("optimize", "Find a high-neutrality ordering");
  optimize->add_option("--matrix", matrix, "POP matrix CSV")->required();
  optimize->add_option("--alg", alg, "mat | cc | 3cc | scatter | brute | sample")
      ->required()
      ->check(CLI::IsMember(algorithm_names()));
  optimize->add_option("--agg", agg_text, "avg | min (default: the algorithm's objective)")
      ->check(CLI::IsMember({"avg", "min"}));
  optimize->add_option("--seed", seed, "seed for randomised algorithms");
  optimize->add_option("--max-iters", max_iters, "cap on 2-opt sweeps (scatter)");
  optimize->add_option("--restarts", restarts, "random 2-opt starts per feasibility probe (scatter)");
  optimize->add_option("--budget", budget_text, "sample: a count (1000) or a time (250ms, 2s)");
  optimize->add_option("--brute-limit", brute_limit, "largest n accepted by brute");
  optimize->add_option("--headlines", headlines_file, "one headline per line, in story order");
  optimize->add_option("--out", out_path, "append the JSON record to this file");

  auto* oracle = app.add_subcommand("oracle", "Exact optimum by exhaustive search (small n)");
  oracle->add_option("--matrix", matrix, "POP matrix CSV")->required();
  oracle->add_option("--agg", agg_text, "avg | min")->check(CLI::IsMember({"avg", "min"}));
  oracle->add_option("--brute-limit", brute_limit, "largest n accepted");
  oracle->add_option("--headlines", headlines_file, "one headline per line, in story order");
  oracle->add_option("--out", out_path, "append the JSON record to this file");

  auto* detect_cmd = app.add_subcommand("detect", "Bound how unusual an observed ordering is");
  detect_cmd->add_option("--matrix", matrix, "POP matrix CSV")->required();
  detect_cmd->add_option("--ordering", ordering_file, "story indices in slot order, one per line")->required();
  detect_cmd->add_option("--agg", agg_text, "avg | min")->check(CLI::IsMember({"avg", "min"}));
  detect_cmd->add_option("--r", r, "number of random orderings")->capture_default_str();
  detect_cmd->add_option("--seed", seed, "sampling seed");
  detect_cmd->add_option("--workers", workers, "sampling threads (results do not depend on it)");
  detect_cmd->add_option("--decay", decay_table, "D(1), D(2), ... (default: adjacent only)")->delimiter(',');
  detect_cmd->add_option("--out", out_path, "append the JSON report to this file");

  GeneratorConfig gen;
  bool triangle = false;
  auto* generate = app.add_subcommand("generate", "Write a random POP matrix");
  generate->add_option("--config", config_file, "key = value generator config");
  generate->add_option("--n", gen.n, "number of stories");
  generate->add_option("--alpha", gen.alpha, "Beta alpha");
  generate->add_option("--beta", gen.beta, "Beta beta");
  generate->add_option("--threshold", gen.high_threshold, "POP values at or above this are high");
  generate->add_flag("--triangle", triangle, "no triple with exactly two high pairs");
  generate->add_option("--seed", gen.seed, "generator seed");
  generate->add_option("--out", out_path, "CSV destination (default: stdout)");

  BenchSuite suite;
  std::string gen_kind = "semi";
  bool early_stop = false;
  std::size_t sweep_n = 60, sweep_t = 6;
  std::string summary_path;
  auto* bench = app.add_subcommand("bench", "Run a benchmark suite and write CSV records");
  bench->add_option("--alg", suite.algorithms, "algorithms (comma separated)")
      ->delimiter(',')
      ->check(CLI::IsMember(algorithm_names()));
  bench->add_option("--n", suite.sizes, "instance sizes (comma separated)")->delimiter(',');
  bench->add_option("--seeds", suite.seeds, "instance seeds (comma separated)")->delimiter(',');
  bench->add_option("--trials", suite.trials, "timed repetitions per instance");
  bench->add_option("--agg", agg_text, "avg | min")->check(CLI::IsMember({"avg", "min"}));
  bench->add_option("--generator", gen_kind, "semi | triangle")->check(CLI::IsMember({"semi", "triangle"}));
  bench->add_option("--alpha", suite.alpha, "Beta alpha");
  bench->add_option("--beta", suite.beta, "Beta beta");
  bench->add_option("--max-iters", suite.max_iters, "cap on 2-opt sweeps (scatter)");
  bench->add_option("--min-cap", suite.min_agg_cap, "largest n under min aggregation");
  bench->add_option("--budget", budget_text, "sampling budget when no matched algorithm ran");
  bench->add_option("--match", suite.sample_match, "algorithm whose time the sampling baseline gets");
  bench->add_flag("--early-stop", early_stop, "sweep the 2-opt cap t = 1..T for scatter instead");
  bench->add_option("--sweep-n", sweep_n, "instance size for --early-stop");
  bench->add_option("--sweep-t", sweep_t, "largest cap T for --early-stop");
  bench->add_option("--out", out_path, "record CSV destination (default: stdout)");
  bench->add_option("--summary", summary_path, "per-cell summary CSV destination");

  try {
    std::vector<std::string> reversed_args(args.rbegin(), args.rend());
    app.parse(reversed_args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (optimize->parsed() || oracle->parsed()) {
      const bool is_oracle = oracle->parsed();
      const auto g = build_neutrality_graph(load_pop_matrix(matrix));
      const std::string algorithm = is_oracle ? "brute" : alg;
      RunOptions opt;
      opt.algorithm = algorithm;
      opt.aggregation = agg_text.empty() ? default_aggregation(algorithm) : parse_aggregation(agg_text);
      opt.seed = seed;
      opt.max_iters = max_iters;
      opt.restarts = restarts;
      opt.brute_limit = brute_limit;
      if (!budget_text.empty()) {
        if (algorithm != "sample") throw UsageError("--budget applies to the sample algorithm only");
        opt.budget = parse_budget(budget_text);
      }
      if (max_iters && algorithm != "scatter") throw UsageError("--max-iters applies to scatter only");
      if (max_iters && *max_iters == 0) throw UsageError("--max-iters must be positive");
      std::vector<std::string> headlines;
      if (!headlines_file.empty()) headlines = load_headlines(headlines_file);
      const auto res = run_algorithm(g, opt);
      print_result(out, res, headlines);
      detail::emit_json_line(out, nlohmann::json(res), out_path);
      return kOk;
    }

    if (detect_cmd->parsed()) {
      const auto pop = load_pop_matrix(matrix);
      const auto ord = load_ordering(ordering_file, pop.size());
      const auto agg = agg_text.empty() ? AggregationKind::ConditionalAverage : parse_aggregation(agg_text);
      const auto rep = detect(pop, detail::parse_decay(decay_table), agg, ord, r, seed, workers);
      out << summarize(rep);
      detail::emit_json_line(out, nlohmann::json(rep), out_path);
      return kOk;
    }

    if (generate->parsed()) {
      if (!config_file.empty()) {
        std::ifstream in(config_file);
        if (!in) throw ParseError("cannot open " + config_file);
        GeneratorConfig base = parse_generator_config(in);
        // Flags given on the command line override the file.
        if (generate->count("--n")) base.n = gen.n;
        if (generate->count("--alpha")) base.alpha = gen.alpha;
        if (generate->count("--beta")) base.beta = gen.beta;
        if (generate->count("--threshold")) base.high_threshold = gen.high_threshold;
        if (generate->count("--seed")) base.seed = gen.seed;
        if (triangle) base.triangle_constrained = true;
        gen = base;
      } else {
        gen.triangle_constrained = triangle;
      }
      const auto m = generate_pop_matrix(gen);
      if (out_path.empty()) {
        write_pop_matrix(m, out);
      } else {
        save_pop_matrix(m, out_path);
        out << "wrote " << gen.n << "-story matrix to " << out_path << '\n';
      }
      return kOk;
    }

    if (bench->parsed()) {
      suite.aggregation = agg_text.empty() ? AggregationKind::ConditionalAverage : parse_aggregation(agg_text);
      suite.triangle_constrained = gen_kind == "triangle";
      if (!budget_text.empty()) suite.fallback_budget = parse_budget(budget_text);
      if (suite.trials == 0) throw UsageError("--trials must be positive");
      for (const auto& a : suite.algorithms) {
        if (!compatible(a, suite.aggregation)) {
          throw UsageError("algorithm '" + a + "' does not optimise aggregation '" +
                           std::string(to_string(suite.aggregation)) + "'");
        }
      }
      const auto records = early_stop
                               ? run_early_stop_sweep(sweep_n, suite.seeds, sweep_t, suite.trials,
                                                      suite.triangle_constrained, err)
                               : run_bench(suite, err);
      if (out_path.empty()) {
        write_bench_csv(out, records);
      } else {
        std::ofstream f(out_path);
        if (!f) throw std::runtime_error("cannot write " + out_path);
        write_bench_csv(f, records);
      }
      const auto rows = summarize_bench(records);
      if (!summary_path.empty()) {
        std::ofstream f(summary_path);
        if (!f) throw std::runtime_error("cannot write " + summary_path);
        write_summary_csv(f, rows);
      } else if (!out_path.empty()) {
        write_summary_csv(out, rows);
      }
      return kOk;
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const ParseError& e) {
    err << "input error: " << e.what() << '\n';
    return kUsage;
  } catch (const InvalidArgument& e) {
    err << "invalid input: " << e.what() << '\n';
    return kUsage;
  } catch (const DegenerateInput& e) {
    err << "degenerate input: " << e.what() << '\n';
    return kUsage;
  } catch (const ResourceLimit& e) {
    err << "refused: " << e.what() << '\n';
    return kResource;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kInternal;
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace newsorder::cli
