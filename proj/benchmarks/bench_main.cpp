#include <benchmark/benchmark.h>

#include <memory>
#include <numeric>

#include "cgp/gp.hpp"
#include "cgp/linalg.hpp"
#include "cgp/random.hpp"
#include "cgp/sem.hpp"

using namespace cgp;

namespace {

Points random_points(Index n, Index d, std::uint64_t seed) {
  Rng rng(seed);
  return Points::NullaryExpr(n, d, [&] { return uniform01(rng); });
}

CorrelationSpec spec_for(Index d) {
  CorrelationSpec s;
  s.gamma = VectorXd::Constant(d, 3.0);
  return s;
}

std::vector<int> first_rows(Index n) {
  std::vector<int> rows(n);
  std::iota(rows.begin(), rows.end(), 0);
  return rows;
}

void BM_Augment(benchmark::State& state) {
  const Index n = state.range(0);
  const Points x = random_points(n + 1, 2, 1);
  const CorrelationSpec s = spec_for(2);
  const std::vector<int> rows = first_rows(n);
  const SpdFactorization f = factorize(corr_matrix(x, rows, s));
  const VectorXd cross = corr_vector(x, rows, x.row(n).data(), s);
  for (auto _ : state) benchmark::DoNotOptimize(f.augmented(cross, 1.0 + s.nugget));
}

void BM_Diminish(benchmark::State& state) {
  const Index n = state.range(0);
  const Points x = random_points(n, 2, 2);
  const SpdFactorization f = factorize(corr_matrix(x, spec_for(2)));
  for (auto _ : state) benchmark::DoNotOptimize(f.diminished(n / 2));
}

void BM_Refactorize(benchmark::State& state) {
  const Index n = state.range(0);
  const Points x = random_points(n, 2, 3);
  const MatrixXd r = corr_matrix(x, spec_for(2));
  for (auto _ : state) benchmark::DoNotOptimize(factorize(r));
}

void BM_AssignmentProbs(benchmark::State& state) {
  const Index n = state.range(0);
  const int k = 4;
  auto data = std::make_shared<const Dataset>(
      Dataset{random_points(n, 2, 4), VectorXd::LinSpaced(n, 0.0, 1.0)});
  std::vector<int> labels(n);
  for (Index i = 0; i < n; ++i) labels[i] = static_cast<int>(i % k);
  ClusterState s = make_state(data, labels, k);
  for (auto& c : s.clusters) {
    c.params.corr = spec_for(2);
    c.fact = SpdFactorization::build(corr_matrix(data->x, c.members, c.params.corr));
  }
  s.gating = GatingModel(k, 2);
  Index i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(assignment_probs(s, i));
    i = (i + 1) % n;
  }
}

void BM_FitGp(benchmark::State& state) {
  const Index n = state.range(0);
  const Points x = random_points(n, 2, 5);
  VectorXd y(n);
  for (Index i = 0; i < n; ++i) y[i] = std::sin(6.0 * x(i, 0)) + x(i, 1);
  for (auto _ : state) benchmark::DoNotOptimize(fit_gp(x, y, GpFitOptions{}));
}

}  // namespace

BENCHMARK(BM_Augment)->RangeMultiplier(2)->Range(32, 512);
BENCHMARK(BM_Diminish)->RangeMultiplier(2)->Range(32, 512);
BENCHMARK(BM_Refactorize)->RangeMultiplier(2)->Range(32, 512);
BENCHMARK(BM_AssignmentProbs)->RangeMultiplier(2)->Range(64, 1024);
BENCHMARK(BM_FitGp)->Arg(25)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
