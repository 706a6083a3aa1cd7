#include <doctest.h>

#include <cmath>

#include "cgp/error.hpp"
#include "cgp/gating.hpp"
#include "oracles.hpp"

using namespace cgp;

namespace {

GatingModel random_model(Rng& rng, int k, Index d, double scale = 2.0) {
  VectorXd b0 = VectorXd::NullaryExpr(k - 1, [&] { return scale * oracle::normal(rng); });
  MatrixXd b = MatrixXd::NullaryExpr(k - 1, d, [&] { return scale * oracle::normal(rng); });
  return GatingModel(b0, b);
}

int argmax(const VectorXd& v) {
  Index i;
  v.maxCoeff(&i);
  return static_cast<int>(i);
}

}  // namespace

TEST_CASE("zero coefficients give uniform probabilities") {
  const GatingModel m(3, 2);
  const VectorXd p = gating_probs(m, VectorXd::Zero(2));
  for (Index k = 0; k < 3; ++k) CHECK(p[k] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("two classes at a zero score split evenly") {
  VectorXd b0(1);
  b0 << 0.0;
  MatrixXd b(1, 1);
  b << 1.0;
  const VectorXd p = gating_probs(GatingModel(b0, b), VectorXd::Zero(1));
  CHECK(p[0] == 0.5);
  CHECK(p[1] == 0.5);
}

TEST_CASE("probabilities match an extended precision softmax") {
  Rng rng(31);
  for (int t = 0; t < 200; ++t) {
    const int k = 2 + static_cast<int>(uniform_index(rng, 4));
    const Index d = 1 + static_cast<Index>(uniform_index(rng, 3));
    const GatingModel m = random_model(rng, k, d);
    const Points x = oracle::uniform_points(rng, 1, d);
    const VectorXd p = m.probabilities(x.row(0).data());
    const auto ref = oracle::softmax(m, x.row(0).data());
    for (int j = 0; j < k; ++j) CHECK(std::abs(p[j] - static_cast<double>(ref[j])) <= 1e-12);
    CHECK(std::abs(p.sum() - 1.0) <= 1e-12);
    CHECK((p.array() > 0.0).all());
    CHECK((p.array() < 1.0).all());
  }
}

TEST_CASE("softmax ignores a common shift of the scores") {
  Rng rng(32);
  for (int t = 0; t < 50; ++t) {
    const VectorXd s = VectorXd::NullaryExpr(4, [&] { return 10.0 * oracle::normal(rng); });
    const double c = 100.0 * oracle::normal(rng);
    CHECK((softmax(s) - softmax((s.array() + c).matrix())).cwiseAbs().maxCoeff() <= 1e-12);
  }
  VectorXd big(2);
  big << 1000.0, 0.0;
  CHECK(softmax(big)[0] == 1.0);
  CHECK(std::isfinite(log_softmax(big)[1]));
}

TEST_CASE("separable labels are reproduced") {
  Points x(20, 1);
  std::vector<int> z(20);
  for (int i = 0; i < 20; ++i) {
    x(i, 0) = i / 19.0;
    z[i] = i < 7 ? 0 : (i < 14 ? 1 : 2);
  }
  GatingFitOptions opts;
  opts.ridge = 0.01;
  const GatingModel m = fit_gating(x, z, 3, opts);
  for (int i = 0; i < 20; ++i) CHECK(argmax(m.probabilities(x.row(i).data())) == z[i]);
}

TEST_CASE("labels independent of x give the class frequencies at the centroid") {
  Rng rng(33);
  const Points x = oracle::uniform_points(rng, 500, 2);
  std::vector<int> z(500);
  std::vector<double> freq(3, 0.0);
  for (auto& v : z) {
    const double u = uniform01(rng);
    v = u < 0.2 ? 0 : (u < 0.5 ? 1 : 2);
    freq[v] += 1.0 / 500.0;
  }
  GatingFitOptions opts;
  opts.ridge = 1e-4 * 500;
  const GatingModel m = fit_gating(x, z, 3, opts);
  const VectorXd centroid = x.colwise().mean().transpose();
  const VectorXd p = m.probabilities(centroid);
  for (int k = 0; k < 3; ++k) CHECK(std::abs(p[k] - freq[k]) <= 0.05);
}

TEST_CASE("two classes reduce to binary logistic regression") {
  Rng rng(34);
  for (int t = 0; t < 10; ++t) {
    const Index d = 1 + static_cast<Index>(uniform_index(rng, 3));
    const Points x = oracle::uniform_points(rng, 80, d);
    const VectorXd w = VectorXd::NullaryExpr(d, [&] { return 3.0 * oracle::normal(rng); });
    std::vector<int> z(80);
    for (Index i = 0; i < 80; ++i) {
      const double p0 = 1.0 / (1.0 + std::exp(-(x.row(i).dot(w) - w.sum() / 2)));
      z[i] = uniform01(rng) < p0 ? 0 : 1;
    }
    const double ridge = 0.1;
    GatingFitOptions opts;
    opts.ridge = ridge;
    opts.max_iter = 5000;
    opts.grad_tol = 1e-10;
    const GatingModel m = fit_gating(x, z, 2, opts);
    const oracle::Logistic ref = oracle::binary_logistic(x, z, ridge);
    CHECK(std::abs(m.intercepts()[0] - ref.intercept) <= 1e-4);
    for (Index l = 0; l < d; ++l) CHECK(std::abs(m.slopes()(0, l) - ref.slopes[l]) <= 1e-4);
  }
}

TEST_CASE("penalized log-likelihood never decreases during the fit") {
  Rng rng(35);
  for (int t = 0; t < 10; ++t) {
    const Points x = oracle::uniform_points(rng, 60, 2);
    std::vector<int> z(60);
    for (Index i = 0; i < 60; ++i) {
      z[i] = x(i, 0) + 0.3 * oracle::normal(rng) < 0.5 ? 0 : (x(i, 1) < 0.5 ? 1 : 2);
    }
    for (int k = 0; k < 3; ++k) {
      if (std::find(z.begin(), z.end(), k) == z.end()) z[k] = k;
    }
    GatingFitOptions opts;
    opts.ridge = 1e-4 * 60;
    GatingFitReport rep;
    (void)fit_gating(x, z, 3, opts, &rep);
    REQUIRE(rep.objective.size() >= 2);
    for (std::size_t i = 1; i < rep.objective.size(); ++i) {
      CHECK(rep.objective[i] >= rep.objective[i - 1]);
    }
  }
}

TEST_CASE("fitted probabilities do not depend on the input units") {
  Rng rng(36);
  const Points x = oracle::uniform_points(rng, 50, 2);
  std::vector<int> z(50);
  for (Index i = 0; i < 50; ++i) z[i] = x(i, 0) + 0.2 * oracle::normal(rng) > 0.5 ? 1 : 0;
  Points x2 = x;
  x2.col(0) = x.col(0).array() * 1000.0 + 7.0;
  x2.col(1) = x.col(1).array() * 0.01 - 3.0;
  GatingFitOptions opts;
  opts.ridge = 0.005;
  opts.max_iter = 5000;
  opts.grad_tol = 1e-12;
  const GatingModel a = fit_gating(x, z, 2, opts);
  const GatingModel b = fit_gating(x2, z, 2, opts);
  for (Index i = 0; i < 50; ++i) {
    CHECK(std::abs(a.probabilities(x.row(i).data())[0] - b.probabilities(x2.row(i).data())[0]) <=
          1e-9);
  }
}

TEST_CASE("warm start reaches the same optimum") {
  Rng rng(37);
  const Points x = oracle::uniform_points(rng, 40, 1);
  std::vector<int> z(40);
  for (Index i = 0; i < 40; ++i) z[i] = x(i, 0) + 0.2 * oracle::normal(rng) > 0.5 ? 1 : 0;
  GatingFitOptions opts;
  opts.ridge = 0.004;
  opts.grad_tol = 1e-10;
  opts.max_iter = 5000;
  const GatingModel cold = fit_gating(x, z, 2, opts);
  VectorXd b0(1);
  b0 << 3.0;
  MatrixXd b(1, 1);
  b << -1.0;
  const GatingModel start(b0, b);
  opts.warm_start = &start;
  const GatingModel warm = fit_gating(x, z, 2, opts);
  CHECK(warm.intercepts()[0] == doctest::Approx(cold.intercepts()[0]).epsilon(1e-6));
  CHECK(warm.slopes()(0, 0) == doctest::Approx(cold.slopes()(0, 0)).epsilon(1e-6));
}

TEST_CASE("an empty class is rejected") {
  Points x(4, 1);
  x << 0, 1, 2, 3;
  const std::vector<int> z{0, 0, 2, 2};
  try {
    (void)fit_gating(x, z, 3);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kEmptyClass);
  }
}
