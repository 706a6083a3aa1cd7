#include "cgp/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>

#include "cgp/csv.hpp"
#include "cgp/error.hpp"
#include "cgp/predict.hpp"

namespace cgp {
namespace {

constexpr double kPi = std::numbers::pi;

TestFunction make(std::string name, std::vector<double> lo, std::vector<double> hi,
                  std::function<double(const double*)> f, int k) {
  TestFunction t;
  t.name = std::move(name);
  t.lower = Eigen::Map<VectorXd>(lo.data(), static_cast<Index>(lo.size()));
  t.upper = Eigen::Map<VectorXd>(hi.data(), static_cast<Index>(hi.size()));
  t.eval = std::move(f);
  t.default_k = k;
  return t;
}

/// Minimum pairwise squared distance and how many pairs attain it.
std::pair<double, int> min_dist_profile(const Points& x) {
  double best = std::numeric_limits<double>::infinity();
  int count = 0;
  for (Index i = 0; i < x.rows(); ++i) {
    for (Index j = i + 1; j < x.rows(); ++j) {
      const double d = (x.row(i) - x.row(j)).squaredNorm();
      if (d < best) {
        best = d;
        count = 1;
      } else if (d == best) {
        ++count;
      }
    }
  }
  return {best, count};
}

bool better(const std::pair<double, int>& a, const std::pair<double, int>& b) {
  return a.first > b.first || (a.first == b.first && a.second < b.second);
}

std::uint64_t stream(std::uint64_t seed, std::uint64_t salt) {
  // splitmix64 finalizer
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

TestFunction gramacy1d() {
  return make("gramacy1d", {0.0}, {20.0}, [](const double* x) {
    const double v = x[0];
    return v < 10.0 ? std::sin(0.2 * kPi * v) + 0.2 * std::cos(0.8 * kPi * v) : 0.1 * v - 1.0;
  }, 2);
}

TestFunction xiong() {
  return make("xiong", {0.0}, {1.0}, [](const double* x) {
    const double t = x[0] - 0.9;
    return std::sin(30.0 * t * t * t * t) * std::cos(2.0 * t) + t / 2.0;
  }, 2);
}

TestFunction montagna() {
  return make("montagna", {-2.0}, {2.0}, [](const double* x) {
    return std::sin(x[0]) + 2.0 * std::exp(-30.0 * x[0] * x[0]);
  }, 3);
}

TestFunction wavy() {
  return make("wavy", {0.3, 0.3}, {1.0, 1.0},
              [](const double* x) { return std::sin(1.0 / (x[0] * x[1])); }, 3);
}

TestFunction borehole() {
  return make("borehole", {0.05, 100.0, 63070.0, 990.0, 63.1, 700.0, 1120.0, 9855.0},
              {0.15, 50000.0, 115600.0, 1110.0, 116.0, 820.0, 1680.0, 12045.0},
              [](const double* x) {
                const double rw = x[0], r = x[1], tu = x[2], hu = x[3], tl = x[4], hl = x[5],
                             len = x[6], kw = x[7];
                const double log_ratio = std::log(r / rw);
                return 2.0 * kPi * tu * (hu - hl) /
                       (log_ratio * (1.0 + 2.0 * len * tu / (log_ratio * rw * rw * kw) + tu / tl));
              },
              5);
}

TestFunction constant_function(Index dim, double value) {
  TestFunction t;
  t.name = "constant";
  t.lower = VectorXd::Zero(dim);
  t.upper = VectorXd::Ones(dim);
  t.eval = [value](const double*) { return value; };
  t.default_k = 2;
  return t;
}

const std::vector<std::string>& test_function_names() {
  static const std::vector<std::string> names{"gramacy1d", "xiong", "montagna", "wavy",
                                              "borehole"};
  return names;
}

TestFunction test_function(std::string_view name) {
  if (name == "gramacy1d") return gramacy1d();
  if (name == "xiong") return xiong();
  if (name == "montagna") return montagna();
  if (name == "wavy") return wavy();
  if (name == "borehole") return borehole();
  fail(ErrorCode::kInvalidArgument, "unknown test function '" + std::string(name) +
                                        "' (expected gramacy1d, xiong, montagna, wavy, borehole)");
}

Points random_lhd(Index n, Index d, Rng& rng) {
  Points x(n, d);
  std::vector<int> perm(n);
  for (Index l = 0; l < d; ++l) {
    std::iota(perm.begin(), perm.end(), 0);
    shuffle(perm.begin(), perm.end(), rng);
    for (Index i = 0; i < n; ++i) {
      x(i, l) = (perm[i] + uniform01(rng)) / static_cast<double>(n);
    }
  }
  return x;
}

Points improve_maximin(Points design, int attempts, Rng& rng) {
  const Index n = design.rows(), d = design.cols();
  if (n < 2 || d < 1) return design;
  auto current = min_dist_profile(design);
  for (int a = 0; a < attempts; ++a) {
    const auto col = static_cast<Index>(uniform_index(rng, d));
    const auto i = static_cast<Index>(uniform_index(rng, n));
    auto j = static_cast<Index>(uniform_index(rng, n - 1));
    if (j >= i) ++j;
    std::swap(design(i, col), design(j, col));
    const auto trial = min_dist_profile(design);
    if (better(trial, current)) {
      current = trial;
    } else {
      std::swap(design(i, col), design(j, col));
    }
  }
  return design;
}

Points maximin_lhd(Index n, Index d, std::uint64_t seed, const MaximinOptions& options) {
  if (n < 2) fail(ErrorCode::kInvalidArgument, "maximin_lhd needs n >= 2");
  Rng rng(seed);
  Points best;
  std::pair<double, int> best_profile{-1.0, 0};
  for (int r = 0; r < std::max(options.restarts, 1); ++r) {
    Points cand = improve_maximin(random_lhd(n, d, rng), options.swap_attempts, rng);
    const auto prof = min_dist_profile(cand);
    if (best.size() == 0 || better(prof, best_profile)) {
      best = std::move(cand);
      best_profile = prof;
    }
  }
  return best;
}

Points jittered_grid(Index n, std::uint64_t seed) {
  Rng rng(seed);
  Points x(n, 1);
  for (Index i = 0; i < n; ++i) {
    x(i, 0) = (static_cast<double>(i) + 0.15 + 0.7 * uniform01(rng)) / static_cast<double>(n);
  }
  return x;
}

Points uniform_design(Index n, Index d, std::uint64_t seed) {
  Rng rng(seed);
  Points x(n, d);
  for (Index i = 0; i < n; ++i) {
    for (Index l = 0; l < d; ++l) x(i, l) = uniform01(rng);
  }
  return x;
}

Points grid_design(Index per_axis, Index d) {
  Index total = 1;
  for (Index l = 0; l < d; ++l) total *= per_axis;
  Points x(total, d);
  for (Index i = 0; i < total; ++i) {
    Index rem = i;
    for (Index l = d - 1; l >= 0; --l) {
      const Index c = rem % per_axis;
      rem /= per_axis;
      x(i, l) = per_axis > 1 ? static_cast<double>(c) / static_cast<double>(per_axis - 1) : 0.5;
    }
  }
  return x;
}

Points to_domain(const Points& unit, const TestFunction& fn) {
  if (unit.cols() != fn.dim()) fail(ErrorCode::kDimensionMismatch, "design dimension");
  Points x(unit.rows(), unit.cols());
  for (Index i = 0; i < x.rows(); ++i) {
    for (Index l = 0; l < x.cols(); ++l) {
      x(i, l) = fn.lower[l] + unit(i, l) * (fn.upper[l] - fn.lower[l]);
    }
  }
  return x;
}

VectorXd evaluate(const TestFunction& fn, const Points& x) {
  VectorXd y(x.rows());
  for (Index i = 0; i < x.rows(); ++i) y[i] = fn.eval(x.row(i).data());
  return y;
}

Dataset make_training_set(const TestFunction& fn, Index n, std::uint64_t seed) {
  const Index d = fn.dim();
  const std::uint64_t s = stream(seed, 1);
  Points unit = d == 1 ? jittered_grid(n, s) : d == 2 ? maximin_lhd(n, d, s) : uniform_design(n, d, s);
  Dataset data;
  data.x = to_domain(unit, fn);
  data.y = evaluate(fn, data.x);
  return data;
}

Points make_test_inputs(const TestFunction& fn, Index n_test, std::uint64_t seed) {
  if (n_test < 1) fail(ErrorCode::kInvalidArgument, "n_test must be >= 1");
  const Index d = fn.dim();
  if (d <= 2) {
    const auto per_axis =
        static_cast<Index>(std::llround(std::pow(static_cast<double>(n_test), 1.0 / d)));
    Index total = 1;
    for (Index l = 0; l < d; ++l) total *= per_axis;
    if (total == n_test) return to_domain(grid_design(per_axis, d), fn);
  }
  return to_domain(uniform_design(n_test, d, stream(seed, 2)), fn);
}

double rmse(const VectorXd& truth, const VectorXd& pred) {
  if (truth.size() != pred.size() || truth.size() == 0) {
    fail(ErrorCode::kDimensionMismatch, "rmse needs equal, nonempty vectors");
  }
  double sse = 0.0;
  for (Index i = 0; i < truth.size(); ++i) {
    const double e = truth[i] - pred[i];
    sse += e * e;
  }
  return std::sqrt(sse / static_cast<double>(truth.size()));
}

std::string_view method_name(Method m) {
  return m == Method::kStationary ? "stationary_gp" : "clustered_gp";
}

Method parse_method(std::string_view name) {
  if (name == "stationary" || name == "stationary_gp") return Method::kStationary;
  if (name == "clustered" || name == "clustered_gp") return Method::kClustered;
  fail(ErrorCode::kInvalidArgument, "unknown method '" + std::string(name) +
                                        "' (expected stationary or clustered)");
}

int benchmark_k(const TestFunction& fn, Index n, const BenchConfig& config) {
  if (config.k) return *config.k;
  if (fn.name == "borehole") return std::max<int>(2, static_cast<int>(n / 200));
  return fn.default_k;
}

std::vector<MethodRun> run_benchmark(const TestFunction& fn, Index n, Index n_test,
                                     std::span<const Method> methods,
                                     const BenchConfig& config, std::uint64_t seed) {
  if (n < 2) fail(ErrorCode::kInvalidArgument, "n must be >= 2");
  if (n_test < 1) fail(ErrorCode::kInvalidArgument, "n_test must be >= 1");
  const Dataset train = make_training_set(fn, n, seed);
  const Points test_x = make_test_inputs(fn, n_test, seed);
  const VectorXd truth = evaluate(fn, test_x);
  SemConfig sem = config.sem;
  sem.seed = seed;

  using Clock = std::chrono::steady_clock;
  auto seconds = [](Clock::time_point a, Clock::time_point b) {
    return std::chrono::duration<double>(b - a).count();
  };

  std::vector<MethodRun> runs;
  for (Method m : methods) {
    MethodRun run;
    run.report.method = std::string(method_name(m));
    run.report.n = n;
    run.report.seed = seed;

    std::function<PredictiveMixture(const VectorXd&)> predict_at;
    std::optional<StationaryFit> stationary;
    std::optional<ClusteredFit> clustered;
    const auto t0 = Clock::now();
    if (m == Method::kStationary) {
      stationary = fit_stationary_gp(train, sem);
      run.report.k = 1;
      predict_at = [&](const VectorXd& x) {
        const VectorXd xs = stationary->scaling.apply(x.data());
        const GpPrediction p = stationary->gp.predict(xs.data());
        return PredictiveMixture{{MixtureComponent{p.mean, p.variance, 1.0}}};
      };
    } else {
      run.report.k = benchmark_k(fn, n, config);
      clustered = fit_clustered_gp(train, run.report.k, sem);
      predict_at = [&](const VectorXd& x) { return predictive_mixture(clustered->model, x); };
    }
    const auto t1 = Clock::now();

    VectorXd pred(test_x.rows());
    run.predictions.resize(test_x.rows());
    for (Index i = 0; i < test_x.rows(); ++i) {
      const VectorXd x = test_x.row(i).transpose();
      const PredictiveMixture mix = predict_at(x);
      const MeanVariance mv = mixture_mean_var(mix);
      PredictionRow& row = run.predictions[i];
      row.x = x;
      row.y_true = truth[i];
      row.y_pred = mv.mean;
      row.y_var = mv.variance;
      row.lo95 = mixture_quantile(mix, 0.025);
      row.hi95 = mixture_quantile(mix, 0.975);
      pred[i] = mv.mean;
    }
    const auto t2 = Clock::now();
    run.report.fit_sec = seconds(t0, t1);
    run.report.pred_sec = seconds(t1, t2);
    run.report.rmse = rmse(truth, pred);
    runs.push_back(std::move(run));
  }
  return runs;
}

void write_report_csv(std::ostream& out, std::span<const BenchReport> reports) {
  out << "method,n,seed,fit_sec,pred_sec,rmse\n";
  for (const auto& r : reports) {
    out << r.method << ',' << r.n << ',' << r.seed << ',' << format_double(r.fit_sec) << ','
        << format_double(r.pred_sec) << ',' << format_double(r.rmse) << '\n';
  }
}

void write_predictions_csv(std::ostream& out, std::span<const PredictionRow> rows) {
  const Index d = rows.empty() ? 0 : rows.front().x.size();
  for (Index l = 0; l < d; ++l) out << 'x' << (l + 1) << ',';
  out << "y_true,y_pred,y_var,lo95,hi95\n";
  for (const auto& r : rows) {
    for (Index l = 0; l < d; ++l) out << format_double(r.x[l]) << ',';
    out << format_double(r.y_true) << ',' << format_double(r.y_pred) << ','
        << format_double(r.y_var) << ',' << format_double(r.lo95) << ','
        << format_double(r.hi95) << '\n';
  }
}

}  // namespace cgp
