#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "newsorder/cli.hpp"
#include "oracles.hpp"

using namespace newsorder;
using Catch::Approx;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;

  nlohmann::json last_json() const {
    std::istringstream in(out);
    std::string line, last;
    while (std::getline(in, line)) {
      if (!line.empty() && line.front() == '{') last = line;
    }
    return nlohmann::json::parse(last);
  }
};

Run invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch() {
  const auto dir = fs::temp_directory_path() / "newsorder_cli_test";
  fs::create_directories(dir);
  return dir;
}

std::string write_graph(const NeutralityGraph& g, const std::string& name) {
  const std::size_t n = g.size();
  std::vector<double> c(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) c[i * n + j] = i == j ? 0.0 : 1.0 - g.weight(i, j);
  }
  const auto path = scratch() / name;
  save_pop_matrix(PopMatrix(n, c), path);
  return path.string();
}

std::string write_text(const std::string& name, const std::string& text) {
  const auto path = scratch() / name;
  std::ofstream(path) << text;
  return path.string();
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#' || line.rfind("algorithm,", 0) == 0) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("optimize: figure instance with cc", "[cli]") {
  const auto m = write_graph(oracle::figure_instance(), "fig.csv");
  const auto r = invoke({"optimize", "--matrix", m, "--alg", "cc"});
  REQUIRE(r.code == 0);
  const auto j = r.last_json();
  CHECK(j.at("neutrality").get<double>() == Approx(0.82).margin(1e-9));
  CHECK(j.at("total_weight").get<double>() == Approx(4.1).margin(1e-9));
  CHECK(r.out.find("neutrality: 0.82") != std::string::npos);
}

TEST_CASE("optimize: headlines are printed next to story ids", "[cli]") {
  const auto m = write_graph(oracle::figure_instance(), "fig_h.csv");
  const auto h = write_text("heads.txt", "alpha\nbravo\ncharlie\ndelta\necho\nfoxtrot\n");
  const auto r = invoke({"optimize", "--matrix", m, "--alg", "mat", "--headlines", h});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("foxtrot") != std::string::npos);
}

TEST_CASE("optimize: example 2.2 brute force", "[cli]") {
  const auto m = write_graph(build_neutrality_graph(oracle::example_2_2()), "ex22.csv");
  const auto r = invoke({"optimize", "--matrix", m, "--alg", "brute", "--agg", "avg"});
  REQUIRE(r.code == 0);
  CHECK(r.last_json().at("neutrality").get<double>() ==
        Approx(oracle::best_paths(build_neutrality_graph(oracle::example_2_2())).total / 3.0));
  const auto o = invoke({"oracle", "--matrix", m, "--agg", "min"});
  REQUIRE(o.code == 0);
  CHECK(o.last_json().at("neutrality").get<double>() ==
        Approx(oracle::best_paths(build_neutrality_graph(oracle::example_2_2())).min_edge));
}

TEST_CASE("optimize: two stories", "[cli]") {
  const auto m = write_text("two.csv", "2\n0,0.3\n0.3,0\n");
  for (std::string alg : {"mat", "cc", "brute", "sample"}) {
    const auto r = invoke({"optimize", "--matrix", m, "--alg", alg});
    REQUIRE(r.code == 0);
    CHECK(r.last_json().at("total_weight").get<double>() == Approx(0.7));
  }
}

TEST_CASE("optimize: incompatible or malformed flags exit 2", "[cli]") {
  const auto m = write_graph(oracle::figure_instance(), "fig2.csv");
  CHECK(invoke({"optimize", "--matrix", m, "--alg", "scatter", "--agg", "avg"}).code == 2);
  CHECK(invoke({"optimize", "--matrix", m, "--alg", "mat", "--agg", "min"}).code == 2);
  CHECK(invoke({"optimize", "--matrix", m, "--alg", "3cc", "--agg", "min"}).code == 2);
  CHECK(invoke({"optimize", "--matrix", m, "--alg", "nope"}).code == 2);
  CHECK(invoke({"optimize", "--alg", "cc"}).code == 2);
  CHECK(invoke({"optimize", "--matrix", m, "--alg", "sample", "--budget", "abc"}).code == 2);
  CHECK(invoke({"optimize", "--matrix", m, "--alg", "cc", "--max-iters", "3"}).code == 2);
  CHECK(invoke({"optimize", "--matrix", (scratch() / "missing.csv").string(), "--alg", "cc"}).code == 2);
  CHECK(invoke({}).code == 2);
  CHECK(invoke({"--help"}).code == 0);
}

TEST_CASE("optimize: oversize requests exit 3", "[cli]") {
  const auto big = write_graph(oracle::random_graph(11, 1), "n11.csv");
  const auto r = invoke({"optimize", "--matrix", big, "--alg", "brute"});
  CHECK(r.code == 3);
  CHECK(r.err.find("brute force is limited") != std::string::npos);
  const auto huge = write_graph(oracle::random_graph(31, 1), "n31.csv");
  CHECK(invoke({"optimize", "--matrix", huge, "--alg", "3cc"}).code == 3);
}

TEST_CASE("optimize: scatter and sampling are seeded", "[cli]") {
  const auto m = write_graph(oracle::random_graph(12, 3), "n12.csv");
  const auto a = invoke({"optimize", "--matrix", m, "--alg", "scatter", "--seed", "4", "--max-iters", "3"});
  const auto b = invoke({"optimize", "--matrix", m, "--alg", "scatter", "--seed", "4", "--max-iters", "3"});
  REQUIRE(a.code == 0);
  CHECK(a.last_json().at("path") == b.last_json().at("path"));
  const auto s = invoke({"optimize", "--matrix", m, "--alg", "sample", "--agg", "min", "--budget", "500", "--seed", "2"});
  REQUIRE(s.code == 0);
  CHECK(s.last_json().at("aggregation") == "min");
}

TEST_CASE("detect: flat matrix and reproducibility", "[cli]") {
  const auto zero = write_text("zero.csv", "4\n0,0,0,0\n0,0,0,0\n0,0,0,0\n0,0,0,0\n");
  const auto ord = write_text("ord4.txt", "2\n0\n3\n1\n");
  const auto r = invoke({"detect", "--matrix", zero, "--ordering", ord});
  REQUIRE(r.code == 0);
  const auto j = r.last_json();
  CHECK(j.at("probability_bound").get<double>() == 1.0);
  CHECK(j.at("direction") == "at_mean");
  CHECK(j.at("r") == 300);

  const auto m = write_graph(oracle::random_graph(10, 8), "n10.csv");
  const auto ord10 = write_text("ord10.txt", "0\n1\n2\n3\n4\n5\n6\n7\n8\n9\n");
  const auto a = invoke({"detect", "--matrix", m, "--ordering", ord10, "--r", "500", "--seed", "7"});
  const auto b = invoke({"detect", "--matrix", m, "--ordering", ord10, "--r", "500", "--seed", "7", "--workers", "3"});
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  const auto tab = invoke({"detect", "--matrix", m, "--ordering", ord10, "--decay", "1,0.5", "--agg", "min"});
  CHECK(tab.code == 0);
}

TEST_CASE("detect: bad ordering files exit 2", "[cli]") {
  const auto zero = write_text("zero2.csv", "3\n0,0,0\n0,0,0\n0,0,0\n");
  CHECK(invoke({"detect", "--matrix", zero, "--ordering", write_text("dup.txt", "0\n0\n1\n")}).code == 2);
  CHECK(invoke({"detect", "--matrix", zero, "--ordering", write_text("short.txt", "0\n1\n")}).code == 2);
  CHECK(invoke({"detect", "--matrix", zero, "--ordering", write_text("ok3.txt", "0\n1\n2\n"), "--r", "1"}).code == 2);
}

TEST_CASE("generate: flags and config file", "[cli]") {
  const auto out = (scratch() / "gen.csv").string();
  REQUIRE(invoke({"generate", "--n", "25", "--seed", "3", "--triangle", "--out", out}).code == 0);
  const auto m = load_pop_matrix(out);
  CHECK(m.size() == 25);
  CHECK(satisfies_triangle_constraint(m, 0.5));

  const auto cfg = write_text("gen.cfg", "n = 9\nalpha = 2\nbeta = 2\nseed = 4\n");
  const auto a = invoke({"generate", "--config", cfg});
  const auto b = invoke({"generate", "--config", cfg});
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out.rfind("9\n", 0) == 0);
  CHECK(invoke({"generate", "--config", write_text("bad.cfg", "n = 9\nmu = 1\n")}).code == 2);
  CHECK(invoke({"generate", "--alpha", "-1"}).code == 2);
}

TEST_CASE("bench: one cell yields trials x instances records", "[cli][bench]") {
  const auto r = invoke({"bench", "--alg", "cc", "--n", "12", "--seeds", "1,2,3", "--trials", "2"});
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("# newsorder-bench v1", 0) == 0);
  const auto rows = csv_rows(r.out);
  CHECK(rows.size() == 6);
  for (const auto& row : rows) CHECK(row[0] == "cc");
}

TEST_CASE("bench: oversize cells are skipped and the suite continues", "[cli][bench]") {
  const auto r = invoke({"bench", "--alg", "brute,cc", "--n", "8,12", "--seeds", "0", "--trials", "1"});
  REQUIRE(r.code == 0);
  CHECK(csv_rows(r.out).size() == 3);
  CHECK(r.err.find("skipped brute at n = 12") != std::string::npos);
  CHECK(invoke({"bench", "--alg", "scatter", "--agg", "avg"}).code == 2);
}

TEST_CASE("bench: sampling baseline gets the matched time", "[cli][bench]") {
  const auto r = invoke({"bench", "--alg", "sample,cc", "--n", "30", "--seeds", "0,1", "--trials", "1"});
  REQUIRE(r.code == 0);
  const auto rows = csv_rows(r.out);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0][0] == "cc");  // records sorted by algorithm
  CHECK(rows[2][0] == "sample");
}

TEST_CASE("bench: cc is faster than mat at n = 100", "[cli][bench]") {
  const auto summary = (scratch() / "summary.csv").string();
  const auto out = (scratch() / "records.csv").string();
  const auto r = invoke({"bench", "--alg", "cc,mat", "--n", "50,100", "--seeds", "0", "--trials", "3",
                      "--out", out, "--summary", summary});
  REQUIRE(r.code == 0);
  std::ifstream in(summary);
  std::stringstream ss;
  ss << in.rdbuf();
  double cc = -1, mat = -1;
  for (const auto& row : csv_rows(ss.str())) {
    if (row[1] != "100") continue;
    (row[0] == "cc" ? cc : mat) = std::stod(row[5]);
  }
  REQUIRE(cc > 0);
  REQUIRE(mat > 0);
  CHECK(cc < mat);
}

TEST_CASE("bench: early-stopping sweep improves then levels off", "[cli][bench]") {
  const auto summary = (scratch() / "sweep.csv").string();
  const auto r = invoke({"bench", "--early-stop", "--sweep-n", "60", "--seeds", "0,1,2,3,4,5,6,7", "--trials", "1",
                      "--out", (scratch() / "sweep_records.csv").string(), "--summary", summary});
  REQUIRE(r.code == 0);
  std::ifstream in(summary);
  std::stringstream ss;
  ss << in.rdbuf();
  std::vector<double> by_t(7, -1.0);
  for (const auto& row : csv_rows(ss.str())) by_t[std::stoul(row[2])] = std::stod(row[4]);
  for (std::size_t t = 1; t <= 6; ++t) REQUIRE(by_t[t] >= 0.0);
  WARN("sweep means t=1..6: " << by_t[1] << ' ' << by_t[2] << ' ' << by_t[3] << ' ' << by_t[4] << ' '
                              << by_t[5] << ' ' << by_t[6]);
  CHECK(by_t[6] >= by_t[1]);
  CHECK(std::abs(by_t[6] - by_t[4]) <= std::abs(by_t[4] - by_t[1]) + 1e-9);
}
