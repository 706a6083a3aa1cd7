#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "cgp/error.hpp"
#include "cgp/predict.hpp"
#include "oracles.hpp"

using namespace cgp;

namespace {

PredictiveMixture random_mixture(Rng& rng, int k) {
  PredictiveMixture m;
  double total = 0.0;
  for (int j = 0; j < k; ++j) {
    const double w = oracle::uniform(rng, 0.05, 1.0);
    m.components.push_back({oracle::uniform(rng, -3, 3), oracle::uniform(rng, 0.05, 2.0), w});
    total += w;
  }
  for (auto& c : m.components) c.weight /= total;
  return m;
}

double draw(const PredictiveMixture& m, Rng& rng) {
  double u = uniform01(rng), acc = 0.0;
  for (const auto& c : m.components) {
    acc += c.weight;
    if (u < acc) return c.mean + std::sqrt(c.variance) * oracle::normal(rng);
  }
  const auto& c = m.components.back();
  return c.mean + std::sqrt(c.variance) * oracle::normal(rng);
}

/// Random small clustered model on [0,1]^d with identity scaling.
ClusteredGpModel random_model(Rng& rng, Index n, Index d, int k, double nugget = 1e-6,
                              GatingModel gating = {}) {
  Dataset data{oracle::uniform_points(rng, n, d),
               VectorXd::NullaryExpr(n, [&] { return oracle::normal(rng); })};
  std::vector<int> z(n);
  for (Index i = 0; i < n; ++i) z[i] = static_cast<int>(i % k);
  std::vector<GpParams> ps;
  for (int j = 0; j < k; ++j) {
    GpParams p;
    p.mu = oracle::normal(rng);
    p.sigma2 = oracle::uniform(rng, 0.2, 2.0);
    p.corr.gamma = VectorXd::NullaryExpr(d, [&] { return oracle::uniform(rng, 0.5, 3.0); });
    p.corr.nugget = nugget;
    ps.push_back(p);
  }
  if (gating.num_classes() != k) {
    gating = GatingModel(VectorXd::NullaryExpr(k - 1, [&] { return oracle::normal(rng); }),
                         MatrixXd::NullaryExpr(k - 1, d, [&] { return oracle::normal(rng); }));
  }
  return ClusteredGpModel::assemble(std::move(data), InputScaling::identity(d), z, ps,
                                    std::move(gating), FitInfo{});
}

}  // namespace

TEST_CASE("a single cluster yields one component equal to the GP prediction") {
  Rng rng(71);
  const ClusteredGpModel m = random_model(rng, 8, 2, 1);
  for (int t = 0; t < 10; ++t) {
    const VectorXd x = oracle::uniform_points(rng, 1, 2).row(0).transpose();
    const PredictiveMixture mix = predictive_mixture(m, x);
    REQUIRE(mix.components.size() == 1);
    const GpPrediction p = gp_predict(m.clusters()[0], x);
    CHECK(mix.components[0].weight == 1.0);
    CHECK(mix.components[0].mean == p.mean);
    CHECK(mix.components[0].variance == p.variance);
  }
}

TEST_CASE("one-hot gating without nugget interpolates a training point") {
  Rng rng(72);
  VectorXd b0(1);
  b0 << 900.0;
  const ClusteredGpModel m =
      random_model(rng, 8, 2, 2, 0.0, GatingModel(b0, MatrixXd::Zero(1, 2)));
  for (int i : m.members(0)) {
    const VectorXd x = m.data().x.row(i).transpose();
    const MeanVariance mv = mixture_mean_var(predictive_mixture(m, x));
    CHECK(std::abs(mv.mean - m.data().y[i]) <= 1e-8);
    CHECK(std::abs(mv.variance) <= 1e-8);
  }
}

TEST_CASE("components match per-cluster conditional normals") {
  Rng rng(73);
  for (int t = 0; t < 20; ++t) {
    const int k = 2 + static_cast<int>(uniform_index(rng, 2));
    const ClusteredGpModel m = random_model(rng, 12, 2, k);
    const VectorXd x = oracle::uniform_points(rng, 1, 2).row(0).transpose();
    const PredictiveMixture mix = predictive_mixture(m, x);
    const auto g = oracle::softmax(m.gating(), x.data());
    for (int j = 0; j < k; ++j) {
      const FittedGp& gp = m.clusters()[j];
      const oracle::Conditional c =
          oracle::conditional(gp.inputs(), gp.responses(), gp.params(), x.data(), 1.0);
      CHECK(std::abs(mix.components[j].mean - c.mean) <= 1e-9);
      CHECK(std::abs(mix.components[j].variance - std::max(c.variance, 0.0)) <= 1e-9);
      CHECK(std::abs(mix.components[j].weight - static_cast<double>(g[j])) <= 1e-12);
    }
  }
}

TEST_CASE("mixture moments in closed form") {
  PredictiveMixture same{{{1.5, 0.7, 0.25}, {1.5, 0.7, 0.75}}};
  MeanVariance mv = mixture_mean_var(same);
  CHECK(mv.mean == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(mv.variance == doctest::Approx(0.7).epsilon(1e-15));

  PredictiveMixture two{{{0.0, 1.0, 0.5}, {2.0, 1.0, 0.5}}};
  mv = mixture_mean_var(two);
  CHECK(mv.mean == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(mv.variance == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("mixture moments agree with Monte Carlo") {
  Rng rng(74);
  for (int t = 0; t < 5; ++t) {
    const PredictiveMixture m = random_mixture(rng, 5);
    const MeanVariance mv = mixture_mean_var(m);
    const int draws = 1'000'000;
    double s1 = 0.0, s2 = 0.0, s4 = 0.0;
    std::vector<double> v(draws);
    for (auto& x : v) {
      x = draw(m, rng);
      s1 += x;
    }
    const double mean = s1 / draws;
    for (double x : v) {
      const double d = x - mean;
      s2 += d * d;
      s4 += d * d * d * d;
    }
    const double var = s2 / (draws - 1);
    const double se_mean = std::sqrt(var / draws);
    const double se_var = std::sqrt((s4 / draws - var * var) / draws);
    CHECK(std::abs(mean - mv.mean) <= 4 * se_mean);
    CHECK(std::abs(var - mv.variance) <= 4 * se_var);
  }
}

TEST_CASE("normal quantiles of a single component") {
  const PredictiveMixture m{{{2.0, 9.0, 1.0}}};
  CHECK(mixture_quantile(m, 0.975) == doctest::Approx(2.0 + 3.0 * 1.959963984540054).epsilon(1e-10));
  CHECK(mixture_quantile(m, 0.5) == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(mixture_quantile(m, 0.025) == doctest::Approx(2.0 - 3.0 * 1.959963984540054).epsilon(1e-10));
}

TEST_CASE("median of a symmetric mixture is the midpoint") {
  const PredictiveMixture m{{{-1.0, 0.5, 0.5}, {3.0, 0.5, 0.5}}};
  CHECK(mixture_quantile(m, 0.5) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("quantiles agree with Monte Carlo order statistics") {
  Rng rng(75);
  for (int t = 0; t < 3; ++t) {
    const PredictiveMixture m = random_mixture(rng, 4);
    const int draws = 1'000'000;
    std::vector<double> v(draws);
    for (auto& x : v) x = draw(m, rng);
    std::sort(v.begin(), v.end());
    for (double q : {0.05, 0.5, 0.9}) {
      const double qhat = v[static_cast<std::size_t>(q * draws)];
      const double se = std::sqrt(q * (1 - q) / draws) / mixture_pdf(m, qhat);
      CHECK(std::abs(mixture_quantile(m, q) - qhat) <= 4 * se);
    }
  }
}

TEST_CASE("quantile round trip and monotonicity") {
  Rng rng(76);
  for (int t = 0; t < 20; ++t) {
    const PredictiveMixture m = random_mixture(rng, 1 + static_cast<int>(uniform_index(rng, 5)));
    double prev = -INFINITY;
    for (double q = 0.001; q < 1.0; q += 0.0437) {
      const double y = mixture_quantile(m, q);
      CHECK(std::abs(mixture_cdf(m, y) - q) <= 1e-9);
      CHECK(y >= prev);
      prev = y;
    }
  }
}

TEST_CASE("quantile level outside (0, 1) is rejected") {
  const PredictiveMixture m{{{0.0, 1.0, 1.0}}};
  for (double q : {0.0, 1.0, -0.1, 1.5}) {
    try {
      (void)mixture_quantile(m, q);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kQOutOfRange);
    }
  }
}

TEST_CASE("mixture variance bounds") {
  Rng rng(77);
  for (int t = 0; t < 200; ++t) {
    PredictiveMixture m = random_mixture(rng, 1 + static_cast<int>(uniform_index(rng, 6)));
    if (t % 3 == 0) {
      for (auto& c : m.components) c.mean = 1e8 + 1e-3 * c.mean;
    }
    const MeanVariance mv = mixture_mean_var(m);
    double within = 0.0;
    for (const auto& c : m.components) within += c.weight * c.variance;
    CHECK(mv.variance >= 0.0);
    CHECK(mv.variance >= within - 1e-12 * std::max(1.0, std::abs(mv.mean) * std::abs(mv.mean)));
  }
}

TEST_CASE("a zero-variance component is a point mass") {
  const PredictiveMixture m{{{1.0, 0.0, 0.3}, {0.0, 1.0, 0.7}}};
  CHECK(mixture_cdf(m, 1.0 - 1e-12) == doctest::Approx(0.7 * normal_cdf(1.0)).epsilon(1e-9));
  CHECK(mixture_cdf(m, 1.0) == doctest::Approx(0.3 + 0.7 * normal_cdf(1.0)).epsilon(1e-9));
  const double q = 0.5 * (mixture_cdf(m, 1.0 - 1e-12) + mixture_cdf(m, 1.0));
  CHECK(mixture_quantile(m, q) == doctest::Approx(1.0).epsilon(1e-9));
}
