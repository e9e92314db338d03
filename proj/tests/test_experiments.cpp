#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "lsilab/covers.hpp"
#include "lsilab/estimator.hpp"
#include "lsilab/experiments.hpp"
#include "lsilab/grid_measure.hpp"

using namespace lsilab;

namespace {

struct CsvFile {
  std::vector<std::string> metadata;  // lines starting with '#'
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

CsvFile read_csv(const std::string& path) {
  std::ifstream in(path);
  REQUIRE_MESSAGE(static_cast<bool>(in), "missing file ", path);
  CsvFile out;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] == '#') {
      out.metadata.push_back(line);
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t pos = 0;
    for (;;) {
      const std::size_t comma = line.find(',', pos);
      if (comma == std::string::npos) {
        cells.push_back(line.substr(pos));
        break;
      }
      cells.push_back(line.substr(pos, comma - pos));
      pos = comma + 1;
    }
    if (!header_seen) {
      out.columns = cells;
      header_seen = true;
    } else {
      out.rows.push_back(cells);
    }
  }
  return out;
}

double cell(const CsvFile& f, std::size_t row, const std::string& col) {
  for (std::size_t j = 0; j < f.columns.size(); ++j)
    if (f.columns[j] == col) return std::strtod(f.rows[row][j].c_str(), nullptr);
  FAIL("no column ", col);
  return 0.0;
}

// Everything except the trailing wall-time cell of each data row.
std::vector<std::string> deterministic_lines(const std::string& path) {
  std::ifstream in(path);
  REQUIRE_MESSAGE(static_cast<bool>(in), "missing file ", path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '#') {
      const std::size_t comma = line.rfind(',');
      if (comma != std::string::npos) line = line.substr(0, comma);
    }
    out.push_back(line);
  }
  return out;
}

}  // namespace

TEST_CASE("default_spec: per-kind defaults and unknown kinds") {
  auto clt = default_spec("clt-monotone");
  CHECK(clt.base.family == "mixture");
  REQUIRE(clt.base.components.size() == 2);
  CHECK(clt.base.components[0].variance == 0.2);
  CHECK(clt.n_range == std::vector<int>{1, 2, 3, 4, 5, 6});

  CHECK(default_spec("verify-subadd").trials == 1000);
  CHECK(default_spec("shearer-fuzz").n_range == std::vector<int>{3});
  CHECK(default_spec("herbst").t_values.size() == 16);
  CHECK(default_spec("regularize").base.family == "rademacher");
  CHECK(default_spec("estimate").base.family == "gaussian");

  CHECK_THROWS_AS(default_spec("no-such-kind"), InvalidSpec);
}

TEST_CASE("spec_from_json: overrides, whitelisting, kind agreement") {
  const std::string text = R"({
    "kind": "estimate",
    "base_measure": {"family": "gaussian", "mean": 1.5, "variance": 2.0},
    "grid": {"lo": -11, "hi": 14, "m": 513},
    "estimator": {"seed": 7, "max_iterations": 99},
    "seed": 2024,
    "output_dir": "somewhere"
  })";
  auto spec = spec_from_json(text, "estimate");
  CHECK(spec.base.mean == 1.5);
  CHECK(spec.base.variance == 2.0);
  CHECK(spec.grid.m == 513);
  CHECK(spec.estimator.seed == 7);
  CHECK(spec.estimator.max_iterations == 99);
  CHECK(spec.seed == 2024);
  CHECK(spec.output_dir == "somewhere");

  CHECK_THROWS_AS(spec_from_json("{\"bogus\": 1}", "estimate"), InvalidSpec);
  CHECK_THROWS_AS(spec_from_json("{\"kind\": \"herbst\"}", "estimate"), InvalidSpec);
  CHECK_THROWS_AS(spec_from_json("not json at all", "estimate"), InvalidSpec);
  CHECK_THROWS_AS(spec_from_json("[1,2]", "estimate"), InvalidSpec);
  CHECK_THROWS_AS(spec_from_json("{\"grid\": {\"width\": 2}}", "estimate"), InvalidSpec);
  CHECK_THROWS_AS(
      spec_from_json("{\"base_measure\": {\"family\": \"gaussian\", \"sd\": 1}}", "estimate"),
      InvalidSpec);
}

TEST_CASE("validate_spec: structural invariants") {
  auto spec = default_spec("clt-monotone");
  spec.n_range.clear();
  CHECK_THROWS_AS(validate_spec(spec), InvalidSpec);

  spec = default_spec("estimate");
  spec.grid.m = 2;
  CHECK_THROWS_AS(validate_spec(spec), InvalidSpec);

  spec = default_spec("estimate");
  spec.base.family = "laplace";
  CHECK_THROWS_AS(validate_spec(spec), InvalidSpec);

  spec = default_spec("verify-subadd");
  spec.n_range = {1};
  CHECK_THROWS_AS(validate_spec(spec), InvalidSpec);

  spec = default_spec("shearer-fuzz");
  spec.n_range = {5};
  CHECK_THROWS_AS(validate_spec(spec), InvalidSpec);

  spec = default_spec("regularize");
  spec.delta = 0.0;
  CHECK_THROWS_AS(validate_spec(spec), InvalidSpec);

  spec = default_spec("herbst");
  spec.t_values = {0.5, -0.25};
  CHECK_THROWS_AS(validate_spec(spec), InvalidSpec);

  spec = default_spec("optimal-cover");
  CHECK(spec.values_file.empty());
  CHECK_THROWS_AS(validate_spec(spec), InvalidSpec);

  spec = default_spec("estimate");
  spec.kind = "weird";
  CHECK_THROWS_AS(validate_spec(spec), InvalidSpec);
}

TEST_CASE("canonical_spec_json and spec_hash: identity excludes output_dir") {
  auto a = default_spec("herbst");
  auto b = a;
  b.output_dir = "elsewhere/deep";
  CHECK(canonical_spec_json(a) == canonical_spec_json(b));
  CHECK(spec_hash(a) == spec_hash(b));
  CHECK(spec_hash(a).size() == 16);

  b.seed = 43;
  CHECK(spec_hash(a) != spec_hash(b));

  // canonical form is single-line JSON with the kind up front
  const std::string canon = canonical_spec_json(a);
  CHECK(canon.find('\n') == std::string::npos);
  CHECK(canon.rfind("{\"kind\":\"herbst\"", 0) == 0);
}

TEST_CASE("build_base_measure: families") {
  auto spec = default_spec("estimate");
  auto g = build_base_measure(spec);
  auto gm = moments(g);
  CHECK(std::abs(gm.mean) < 1e-9);
  CHECK(gm.variance == doctest::Approx(1.0).epsilon(1e-4));

  spec.base.family = "uniform";
  spec.base.lo = 2.0;
  spec.base.hi = 4.0;
  auto u = build_base_measure(spec);
  CHECK(moments(u).mean == doctest::Approx(3.0).epsilon(1e-12));

  spec.base.family = "rademacher";
  spec.lattice = 8;
  auto r = build_base_measure(spec);
  CHECK(r.spacing() == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(moments(r).variance == doctest::Approx(1.0).epsilon(1e-12));

  // unnormalized mixture weights are fine
  spec.base.family = "mixture";
  spec.base.components = {{2.0, -1.0, 0.5}, {2.0, 1.0, 0.5}};
  spec.grid = {-6.0, 6.0, 301};
  auto mix = build_base_measure(spec);
  auto mm = moments(mix);
  CHECK(std::abs(mm.mean) < 1e-9);
  CHECK(mm.variance == doctest::Approx(1.5).epsilon(1e-3));  // 0.5 + mean spread 1

  spec.base.family = "file";
  spec.base.path = "exp-base.csv";
  write_measure_csv_file(spec.base.path, rademacher(0.25));
  auto file_mu = build_base_measure(spec);
  CHECK(file_mu.spacing() == 0.25);
  CHECK(moments(file_mu).variance == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("run_herbst: deterministic rows that recompute") {
  auto spec = default_spec("herbst");
  spec.output_dir = "exp-out/herbst";
  auto rep = run_herbst(spec);
  CHECK(rep.violations == 0);
  REQUIRE(rep.rows.size() == 16);

  auto csv = read_csv(rep.csv_path);
  REQUIRE(csv.rows.size() == 16);
  CHECK(csv.columns == std::vector<std::string>{"t", "tail_prob", "gauss_bound", "ratio",
                                                "wall_time"});
  REQUIRE(csv.metadata.size() >= 3);
  CHECK(csv.metadata[0].rfind("# metadata: tool=lsilab", 0) == 0);
  CHECK(csv.metadata[1].find("kind=herbst") != std::string::npos);
  CHECK(csv.metadata[1].find("seed=42") != std::string::npos);
  CHECK(csv.metadata[1].find("spec_hash=" + spec_hash(spec)) != std::string::npos);
  CHECK(csv.metadata[2].rfind("# metadata: spec=", 0) == 0);

  for (std::size_t i = 0; i < csv.rows.size(); ++i) {
    const double t = cell(csv, i, "t");
    const double bound = cell(csv, i, "gauss_bound");
    const double ratio = cell(csv, i, "ratio");
    const double tail = cell(csv, i, "tail_prob");
    CHECK(t == doctest::Approx(0.25 * static_cast<double>(i + 1)).epsilon(1e-15));
    CHECK(bound == doctest::Approx(std::exp(-t * t / 2.0)).epsilon(1e-14));
    CHECK(tail == doctest::Approx(ratio * bound).epsilon(1e-14));
    CHECK(ratio <= 1.0);
  }
}

TEST_CASE("run_estimate: single-row summary of the base measure") {
  auto spec = default_spec("estimate");
  spec.grid.m = 257;
  spec.output_dir = "exp-out/estimate";
  auto rep = run_estimate(spec);
  REQUIRE(rep.rows.size() == 1);
  auto csv = read_csv(rep.csv_path);
  REQUIRE(csv.rows.size() == 1);
  CHECK(std::abs(cell(csv, 0, "mean")) < 1e-9);
  CHECK(cell(csv, 0, "variance") == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(cell(csv, 0, "poincare") == doctest::Approx(1.0).epsilon(2e-2));
  CHECK(cell(csv, 0, "cls_estimate") == doctest::Approx(1.0).epsilon(3e-2));
  CHECK(csv.rows[0][5] == "1");  // converged
}

TEST_CASE("run_verify_subadd: slack column recomputes and stays feasible") {
  auto spec = default_spec("verify-subadd");
  spec.trials = 100;
  spec.output_dir = "exp-out/subadd";
  auto rep = run_verify_subadd(spec);
  CHECK(rep.violations == 0);
  REQUIRE(rep.rows.size() == 100);

  auto csv = read_csv(rep.csv_path);
  for (std::size_t i = 0; i < csv.rows.size(); ++i) {
    const double lhs = cell(csv, i, "lhs_cls");
    const double rhs = cell(csv, i, "rhs_bound");
    const double slack = cell(csv, i, "slack");
    CHECK(slack == doctest::Approx(rhs - lhs).epsilon(1e-12));
    CHECK(slack >= -1e-12 * std::max(1.0, std::abs(rhs)));
    const double n = cell(csv, i, "n");
    CHECK(n >= 2);
    CHECK(n <= 4);
  }
}

TEST_CASE("run_clt_monotone: Gaussian base is flat at one") {
  auto spec = default_spec("clt-monotone");
  spec.base.family = "gaussian";
  spec.base.components.clear();
  spec.grid = {-8.0, 8.0, 513};
  spec.n_range = {1, 2};
  spec.output_dir = "exp-out/clt-flat";
  auto rep = run_clt_monotone(spec);
  CHECK(rep.violations == 0);
  auto csv = read_csv(rep.csv_path);
  REQUIRE(csv.rows.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(cell(csv, i, "cls_estimate") == doctest::Approx(1.0).epsilon(3e-2));
    CHECK(cell(csv, i, "poincare") == doctest::Approx(1.0).epsilon(2e-2));
    const double chain = cell(csv, i, "chain_margin");
    const double cp = cell(csv, i, "poincare");
    const double w2 = cell(csv, i, "w2_to_gaussian");
    CHECK(chain == doctest::Approx(cp - 1.0 - w2 * w2).epsilon(1e-12));
    const double rate = cell(csv, i, "rate_term");
    const double est = cell(csv, i, "cls_estimate");
    CHECK(rate == doctest::Approx((est - 1.0) * cell(csv, i, "n")).epsilon(1e-10));
  }
}

TEST_CASE("run_clt_monotone: support gap aborts with a partial file") {
  auto spec = default_spec("clt-monotone");
  spec.base.family = "rademacher";
  spec.base.components.clear();
  spec.lattice = 4;
  spec.n_range = {1};
  spec.output_dir = "exp-out/clt-aborted";
  CHECK_THROWS_AS(run_clt_monotone(spec), DisconnectedSupport);

  std::ifstream in("exp-out/clt-aborted/monotone.csv");
  REQUIRE(static_cast<bool>(in));
  std::string line;
  bool marker = false;
  while (std::getline(in, line))
    if (line.rfind("# aborted: ", 0) == 0) marker = true;
  CHECK(marker);
}

TEST_CASE("run_shearer_fuzz: zero violations and byte-stable reruns") {
  auto spec = default_spec("shearer-fuzz");
  spec.trials = 50;
  spec.output_dir = "exp-out/fuzz-a";
  auto rep = run_shearer_fuzz(spec);
  CHECK(rep.violations == 0);
  REQUIRE(rep.rows.size() == 50);
  CHECK(rep.extra_files.empty());

  auto csv = read_csv(rep.csv_path);
  for (std::size_t i = 0; i < csv.rows.size(); ++i) CHECK(cell(csv, i, "margin") >= -1e-9);

  spec.output_dir = "exp-out/fuzz-b";
  auto rep2 = run_shearer_fuzz(spec);
  CHECK(deterministic_lines(rep.csv_path) == deterministic_lines(rep2.csv_path));
}

TEST_CASE("run_regularize: smoothing brings the constant down to the reference") {
  auto spec = default_spec("regularize");
  spec.lattice = 16;
  spec.n_range = {1, 2};
  spec.output_dir = "exp-out/reg";
  auto rep = run_regularize(spec);
  CHECK(rep.violations == 0);
  auto csv = read_csv(rep.csv_path);
  REQUIRE(csv.rows.size() == 2);
  for (std::size_t i = 0; i < csv.rows.size(); ++i) {
    const double cls_n = cell(csv, i, "cls_n");
    const double cls_ref = cell(csv, i, "cls_ref");
    CHECK(cell(csv, i, "ratio") == doctest::Approx(cls_n / cls_ref).epsilon(1e-12));
    CHECK(cls_n <= 1.02 * cls_ref);
    CHECK(cls_ref <= cell(csv, i, "chen"));
    CHECK(cell(csv, i, "chen") == doctest::Approx(30.0 * std::exp(4.0)).epsilon(1e-12));
  }
  REQUIRE(rep.extra_files.size() == 1);
  std::ifstream gp(rep.extra_files[0]);
  CHECK(static_cast<bool>(gp));
}

TEST_CASE("run_optimal_cover: reads values and reports the optimum") {
  SubsetValues v;
  v.n = 2;
  v.values[0b01] = 1.0;
  v.values[0b10] = 1.0;
  v.values[0b11] = 10.0;
  write_subset_values_file("exp-cover-values.csv", v);

  auto spec = default_spec("optimal-cover");
  spec.values_file = "exp-cover-values.csv";
  spec.output_dir = "exp-out/cover";
  auto rep = run_optimal_cover(spec);
  CHECK(rep.violations == 0);
  auto csv = read_csv(rep.csv_path);
  REQUIRE(csv.rows.size() == 2);  // two singletons in the optimal cover
  for (std::size_t i = 0; i < csv.rows.size(); ++i) {
    CHECK(cell(csv, i, "coefficient") == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(cell(csv, i, "optimal_value") == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(cell(csv, i, "full_value") == doctest::Approx(10.0).epsilon(1e-15));
  }
}

TEST_CASE("run_experiment dispatch rejects unknown kinds") {
  auto spec = default_spec("herbst");
  spec.kind = "mystery";
  CHECK_THROWS_AS(run_experiment(spec), InvalidSpec);

  // kind mismatch against a specific driver
  auto est = default_spec("estimate");
  CHECK_THROWS_AS(run_herbst(est), InvalidSpec);
}

TEST_CASE("format_cell: round-trip-exact cells") {
  CHECK(format_cell(1.0) == "1");
  CHECK(format_cell(0.1) == "0.10000000000000001");
  CHECK(format_cell(-0.0) == "-0");

  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    const double v = std::ldexp(static_cast<double>(rng()) - 9.2e18, -static_cast<int>(rng() % 64));
    const std::string s = format_cell(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }
}
