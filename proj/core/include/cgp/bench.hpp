#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cgp/dataset.hpp"
#include "cgp/random.hpp"
#include "cgp/sem.hpp"

namespace cgp {

struct TestFunction {
  std::string name;
  VectorXd lower;
  VectorXd upper;
  std::function<double(const double*)> eval;
  /// Clusters used by the benchmark when no K is given.
  int default_k = 2;

  Index dim() const { return lower.size(); }
  double operator()(const VectorXd& x) const { return eval(x.data()); }
};

/// Piecewise: sin(0.2 pi x) + 0.2 cos(0.8 pi x) for x < 10, 0.1 x - 1 after; x in [0, 20].
TestFunction gramacy1d();
/// sin(30 (x - 0.9)^4) cos(2 (x - 0.9)) + (x - 0.9) / 2 on [0, 1].
TestFunction xiong();
/// sin(x) + 2 exp(-30 x^2) on [-2, 2].
TestFunction montagna();
/// sin(1 / (x1 x2)) on [0.3, 1]^2.
TestFunction wavy();
/// Water flow through a borehole. Inputs in order (r_w, r, T_u, H_u, T_l,
/// H_l, L, K_w).
TestFunction borehole();
TestFunction constant_function(Index dim, double value);

const std::vector<std::string>& test_function_names();
/// Throws kInvalidArgument for unknown names.
TestFunction test_function(std::string_view name);

/// Random Latin hypercube in [0,1]^d: one point per stratum of every axis,
/// uniformly placed within its stratum.
Points random_lhd(Index n, Index d, Rng& rng);
/// Swaps coordinates between pairs of rows within a column, accepting swaps
/// that increase the minimum interpoint distance (or keep it while reducing
/// the number of pairs that attain it).
Points improve_maximin(Points design, int attempts, Rng& rng);

struct MaximinOptions {
  int restarts = 4;
  int swap_attempts = 1000;
};
Points maximin_lhd(Index n, Index d, std::uint64_t seed, const MaximinOptions& options = {});

/// n points, one per equal-width stratum of [0,1], jittered within the
/// middle 70% of the stratum.
Points jittered_grid(Index n, std::uint64_t seed);
Points uniform_design(Index n, Index d, std::uint64_t seed);
/// Full tensor grid with `per_axis` equally spaced points (endpoints
/// included) per dimension.
Points grid_design(Index per_axis, Index d);
/// Maps a unit-cube design onto the function's box.
Points to_domain(const Points& unit, const TestFunction& fn);
VectorXd evaluate(const TestFunction& fn, const Points& x);

/// Training design: jittered grid for d = 1, maximin LHD for d = 2, uniform
/// random for d > 2.
Dataset make_training_set(const TestFunction& fn, Index n, std::uint64_t seed);
/// Equally spaced grid when d <= 2 and n_test is a perfect d-th power,
/// uniform random otherwise.
Points make_test_inputs(const TestFunction& fn, Index n_test, std::uint64_t seed);

/// (1/n sum (truth - pred)^2)^(1/2), summed in index order.
double rmse(const VectorXd& truth, const VectorXd& pred);

enum class Method { kStationary, kClustered };
std::string_view method_name(Method m);
/// Accepts "stationary", "stationary_gp", "clustered", "clustered_gp".
Method parse_method(std::string_view name);

struct BenchConfig {
  SemConfig sem;
  /// Clusters for the clustered method; default: n / 200 (>= 2) for the
  /// borehole function, the function's default_k otherwise.
  std::optional<int> k;
};

int benchmark_k(const TestFunction& fn, Index n, const BenchConfig& config);

struct BenchReport {
  std::string method;
  Index n = 0;
  std::uint64_t seed = 0;
  double fit_sec = 0.0;
  double pred_sec = 0.0;
  double rmse = 0.0;
  int k = 1;
};

struct PredictionRow {
  VectorXd x;
  double y_true = 0.0;
  double y_pred = 0.0;
  double y_var = 0.0;
  double lo95 = 0.0;
  double hi95 = 0.0;
};

struct MethodRun {
  BenchReport report;
  std::vector<PredictionRow> predictions;
};

std::vector<MethodRun> run_benchmark(const TestFunction& fn, Index n, Index n_test,
                                     std::span<const Method> methods,
                                     const BenchConfig& config, std::uint64_t seed);

/// header: method,n,seed,fit_sec,pred_sec,rmse
void write_report_csv(std::ostream& out, std::span<const BenchReport> reports);
/// header: x1..xd,y_true,y_pred,y_var,lo95,hi95
void write_predictions_csv(std::ostream& out, std::span<const PredictionRow> rows);

}  // namespace cgp
