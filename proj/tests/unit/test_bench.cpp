#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "cgp/bench.hpp"
#include "cgp/csv.hpp"
#include "cgp/error.hpp"
#include "oracles.hpp"

using namespace cgp;

namespace {

double min_dist(const Points& x) {
  double best = INFINITY;
  for (Index i = 0; i < x.rows(); ++i) {
    for (Index j = i + 1; j < x.rows(); ++j) best = std::min(best, (x.row(i) - x.row(j)).norm());
  }
  return best;
}

void check_latin(const Points& x) {
  const Index n = x.rows();
  for (Index l = 0; l < x.cols(); ++l) {
    std::vector<int> strata;
    for (Index i = 0; i < n; ++i) {
      REQUIRE(x(i, l) >= 0.0);
      REQUIRE(x(i, l) < 1.0);
      strata.push_back(static_cast<int>(std::floor(x(i, l) * n)));
    }
    std::sort(strata.begin(), strata.end());
    std::vector<int> expect(n);
    std::iota(expect.begin(), expect.end(), 0);
    CHECK(strata == expect);
  }
}

}  // namespace

TEST_CASE("two-point Latin hypercube occupies both halves") {
  const Points x = maximin_lhd(2, 1, 3);
  CHECK(std::min(x(0, 0), x(1, 0)) < 0.5);
  CHECK(std::max(x(0, 0), x(1, 0)) >= 0.5);
}

TEST_CASE("maximin designs are Latin hypercubes and reproducible") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Index n = 5 + static_cast<Index>(seed) * 4, d = 1 + static_cast<Index>(seed % 4);
    const Points x = maximin_lhd(n, d, seed);
    check_latin(x);
    CHECK(x == maximin_lhd(n, d, seed));
  }
}

TEST_CASE("swap phase never lowers the minimum distance") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const Points start = random_lhd(10, 2, rng);
    const Points improved = improve_maximin(start, 1000, rng);
    check_latin(improved);
    CHECK(min_dist(improved) >= min_dist(start));
  }
}

TEST_CASE("test functions at known points") {
  const double x5 = 5.0, x15 = 15.0;
  CHECK(gramacy1d().eval(&x5) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(gramacy1d().eval(&x15) == doctest::Approx(0.5).epsilon(1e-12));
  const double x09 = 0.9, x0 = 0.0;
  CHECK(xiong().eval(&x09) == 0.0);
  CHECK(montagna().eval(&x0) == doctest::Approx(2.0));
  const double w[2] = {1.0, 1.0};
  CHECK(wavy().eval(w) == doctest::Approx(std::sin(1.0)));
  CHECK(borehole().dim() == 8);
  CHECK(test_function_names().size() == 5);
  for (const auto& name : test_function_names()) CHECK(test_function(name).name == name);
}

TEST_CASE("borehole flow rises with upper head and falls with lower head") {
  Rng rng(81);
  const TestFunction f = borehole();
  for (int t = 0; t < 100; ++t) {
    VectorXd x(8);
    for (Index l = 0; l < 8; ++l) x[l] = oracle::uniform(rng, f.lower[l], f.upper[l]);
    VectorXd hu = x, hl = x;
    hu[3] = oracle::uniform(rng, x[3], f.upper[3]);
    hl[5] = oracle::uniform(rng, x[5], f.upper[5]);
    if (hu[3] > x[3]) CHECK(f(hu) > f(x));
    if (hl[5] > x[5]) CHECK(f(hl) < f(x));
  }
}

TEST_CASE("unknown test function is rejected") {
  try {
    (void)test_function("rosenbrock");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInvalidArgument);
  }
}

TEST_CASE("test inputs form a grid when possible") {
  const Points g = make_test_inputs(wavy(), 1296, 0);
  CHECK(g.rows() == 1296);
  CHECK(g.col(0).minCoeff() == 0.3);
  CHECK(g.col(0).maxCoeff() == 1.0);
  const Points u = make_test_inputs(borehole(), 50, 0);
  CHECK(u.rows() == 50);
  CHECK(u == make_test_inputs(borehole(), 50, 0));
}

TEST_CASE("constant function is reproduced by both methods") {
  const TestFunction f = constant_function(2, 3.5);
  BenchConfig cfg;
  cfg.sem.max_iter = 5;
  cfg.k = 2;
  const std::vector<Method> methods{Method::kClustered, Method::kStationary};
  const auto runs = run_benchmark(f, 20, 25, methods, cfg, 1);
  REQUIRE(runs.size() == 2);
  for (const auto& r : runs) CHECK(r.report.rmse <= 1e-6);
}

TEST_CASE("report RMSE is recomputable from the predictions file") {
  BenchConfig cfg;
  cfg.k = 3;
  cfg.sem.max_iter = 10;
  const std::vector<Method> methods{Method::kClustered, Method::kStationary};
  const auto runs = run_benchmark(wavy(), 30, 100, methods, cfg, 2);
  for (const auto& r : runs) {
    std::stringstream ss;
    write_predictions_csv(ss, r.predictions);
    const CsvTable t = parse_csv(ss);
    REQUIRE(t.header.size() == 7);
    VectorXd truth(static_cast<Index>(t.rows.size())), pred(truth.size());
    for (Index i = 0; i < truth.size(); ++i) {
      truth[i] = t.rows[i][2];
      pred[i] = t.rows[i][3];
    }
    CHECK(rmse(truth, pred) == r.report.rmse);
    for (const auto& row : t.rows) {
      CHECK(row[5] <= row[3]);
      CHECK(row[3] <= row[6]);
    }
  }
  std::stringstream rep;
  std::vector<BenchReport> reports{runs[0].report, runs[1].report};
  write_report_csv(rep, reports);
  CHECK(rep.str().starts_with("method,n,seed,fit_sec,pred_sec,rmse\nclustered_gp,30,2,"));
}

TEST_CASE("benchmark K defaults") {
  BenchConfig cfg;
  CHECK(benchmark_k(borehole(), 1000, cfg) == 5);
  CHECK(benchmark_k(borehole(), 100, cfg) == 2);
  CHECK(benchmark_k(wavy(), 40, cfg) == 3);
  cfg.k = 7;
  CHECK(benchmark_k(wavy(), 40, cfg) == 7);
  CHECK(parse_method("clustered") == Method::kClustered);
  CHECK(parse_method("stationary_gp") == Method::kStationary);
}
