#include <doctest.h>

#include <cmath>

#include "cgp/bench.hpp"
#include "cgp/error.hpp"
#include "cgp/gp.hpp"
#include "oracles.hpp"

using namespace cgp;

namespace {

GpParams random_params(Rng& rng, Index d, double nugget = 1e-6) {
  GpParams p;
  p.mu = oracle::uniform(rng, -1.0, 1.0);
  p.sigma2 = oracle::uniform(rng, 0.3, 3.0);
  p.corr.gamma = VectorXd::NullaryExpr(d, [&] { return oracle::uniform(rng, 0.5, 4.0); });
  p.corr.nugget = nugget;
  return p;
}

VectorXd random_y(Rng& rng, Index n) {
  return VectorXd::NullaryExpr(n, [&] { return oracle::normal(rng); });
}

}  // namespace

TEST_CASE("constant response gives that constant as the mean") {
  Points x(2, 1);
  x << 0.2, 0.9;
  const FittedGp gp = fit_gp(x, VectorXd::Constant(2, 3.25), GpFitOptions{});
  CHECK(gp.params().mu == doctest::Approx(3.25).epsilon(1e-12));
}

TEST_CASE("fit_gp rejects fewer than two points") {
  Points x(1, 1);
  x << 0.5;
  try {
    (void)fit_gp(x, VectorXd::Ones(1), GpFitOptions{});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kTooFewPoints);
  }
}

TEST_CASE("piecewise function fitted by one GP reverts to a global mean near 0.208" * doctest::test_suite("reproduction")) {
  // Eleven unequally spaced points over [0, 20].
  int close = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Dataset data = make_training_set(gramacy1d(), 11, seed);
    const Points xs = (data.x.array() / 20.0).matrix();
    const FittedGp gp = fit_gp(xs, data.y, GpFitOptions{});
    MESSAGE("seed " << seed << " mu " << gp.params().mu);
    if (std::abs(gp.params().mu - 0.208) <= 0.05) ++close;
  }
  CHECK(close >= 7);
}

TEST_CASE("profile closed forms agree with explicit linear algebra") {
  Rng rng(21);
  for (int t = 0; t < 20; ++t) {
    const Points x = oracle::uniform_points(rng, 9, 2);
    const VectorXd y = random_y(rng, 9);
    const GpParams p = random_params(rng, 2);
    const ProfileEstimate est = profile_likelihood(x, y, p.corr);

    std::vector<int> rows(9);
    for (int i = 0; i < 9; ++i) rows[i] = i;
    const MatrixXd r = oracle::corr_matrix(x, rows, p.corr.gamma, 2.0, p.corr.nugget);
    const MatrixXd q = oracle::inverse(r);
    const VectorXd one = VectorXd::Ones(9);
    const double mu = one.dot(q * y) / one.dot(q * one);
    const VectorXd res = y - mu * one;
    const double s2 = res.dot(q * res) / 9.0;
    CHECK(est.mu == doctest::Approx(mu).epsilon(1e-9));
    CHECK(est.sigma2 == doctest::Approx(s2).epsilon(1e-9));
    CHECK(est.log_likelihood ==
          doctest::Approx(-0.5 * (9.0 * std::log(s2) + oracle::log_det(r))).epsilon(1e-9));
  }
}

TEST_CASE("fitted gamma dominates random probes of the profile likelihood") {
  Rng rng(22);
  for (int t = 0; t < 5; ++t) {
    const Points x = oracle::uniform_points(rng, 8, 2);
    const VectorXd gamma_true = VectorXd::Constant(2, oracle::uniform(rng, 1.0, 4.0));
    const VectorXd y = oracle::gp_draw(rng, x, gamma_true);
    const FittedGp gp = fit_gp(x, y, GpFitOptions{});
    const GammaBounds b = GammaBounds::from_ranges(x);
    const double fitted = profile_likelihood(x, y, gp.params().corr).log_likelihood;
    for (int probe = 0; probe < 50; ++probe) {
      CorrelationSpec s = gp.params().corr;
      for (Index l = 0; l < 2; ++l) {
        s.gamma[l] = std::exp(oracle::uniform(rng, std::log(b.lower[l]), std::log(b.upper[l])));
      }
      CHECK(fitted >= profile_likelihood(x, y, s).log_likelihood - 1e-9);
    }
  }
}

TEST_CASE("gp_predict matches the naive conditional normal") {
  Rng rng(23);
  for (int t = 0; t < 50; ++t) {
    const Points x = oracle::uniform_points(rng, 6, 2);
    const VectorXd y = random_y(rng, 6);
    const GpParams p = random_params(rng, 2);
    const FittedGp gp = FittedGp::from_params(x, y, p);
    const Points xnew = oracle::uniform_points(rng, 1, 2);
    const GpPrediction pr = gp_predict(gp, xnew.row(0).transpose());
    const oracle::Conditional c = oracle::conditional(x, y, p, xnew.row(0).data(), 1.0);
    CHECK(pr.mean == doctest::Approx(c.mean).epsilon(1e-9));
    CHECK(std::abs(pr.variance - std::max(0.0, c.variance)) <= 1e-9);
  }
}

TEST_CASE("gp_predict interpolates without a nugget") {
  Rng rng(24);
  const Points x = oracle::uniform_points(rng, 6, 2);
  const VectorXd y = random_y(rng, 6);
  GpParams p = random_params(rng, 2, 0.0);
  const FittedGp gp = FittedGp::from_params(x, y, p);
  for (Index i = 0; i < 6; ++i) {
    const GpPrediction pr = gp.predict(x.row(i).data());
    CHECK(std::abs(pr.mean - y[i]) <= 1e-8 * std::max(1.0, y.cwiseAbs().maxCoeff()));
    CHECK(std::abs(pr.variance) <= 1e-8);
  }
}

TEST_CASE("gp_predict reverts to the global mean far from the data") {
  Rng rng(25);
  const Points x = oracle::uniform_points(rng, 6, 2);
  const GpParams p = random_params(rng, 2);
  const FittedGp gp = FittedGp::from_params(x, random_y(rng, 6), p);
  const double far[2] = {1e3, -1e3};
  const GpPrediction pr = gp.predict(far);
  CHECK(pr.mean == doctest::Approx(p.mu).epsilon(1e-12));
  CHECK(pr.variance == doctest::Approx(p.sigma2).epsilon(1e-12));
}

TEST_CASE("predictive variance stays in [0, sigma2 (1 + nugget)]") {
  Rng rng(26);
  for (int t = 0; t < 20; ++t) {
    const Points x = oracle::uniform_points(rng, 10, 2);
    const GpParams p = random_params(rng, 2, t % 2 ? 0.0 : 1e-6);
    const FittedGp gp = FittedGp::from_params(x, random_y(rng, 10), p);
    for (int k = 0; k < 50; ++k) {
      const Points xn = oracle::uniform_points(rng, 1, 2);
      const double v = gp.predict(xn.row(0).data()).variance;
      CHECK(v >= 0.0);
      CHECK(v <= p.sigma2 * (1.0 + p.corr.nugget));
    }
    for (Index i = 0; i < 10; ++i) CHECK(gp.predict(x.row(i).data()).variance >= 0.0);
  }
}

TEST_CASE("loocv means of a symmetric pair mirror each other") {
  Points x(2, 1);
  x << 0.25, 0.75;
  GpParams p;
  p.mu = 0.0;
  p.corr.gamma = VectorXd::Constant(1, 1.5);
  VectorXd y(2);
  y << 1.0, -1.0;
  const VectorXd loo = loocv_means(FittedGp::from_params(x, y, p));
  CHECK(loo[0] == doctest::Approx(-loo[1]).epsilon(1e-14));
  y << 0.5, 0.5;
  const VectorXd loo2 = loocv_means(FittedGp::from_params(x, y, p));
  CHECK(loo2[0] == doctest::Approx(loo2[1]).epsilon(1e-14));
}

TEST_CASE("loocv means match explicit hold-out predictions") {
  Rng rng(27);
  for (int t = 0; t < 30; ++t) {
    const Points x = oracle::uniform_points(rng, 7, 2);
    const VectorXd y = random_y(rng, 7);
    const GpParams p = random_params(rng, 2);
    const VectorXd loo = loocv_means(FittedGp::from_params(x, y, p));
    for (Index i = 0; i < 7; ++i) {
      Points xr(6, 2);
      VectorXd yr(6);
      for (Index j = 0, r = 0; j < 7; ++j) {
        if (j == i) continue;
        xr.row(r) = x.row(j);
        yr[r++] = y[j];
      }
      const oracle::Conditional c = oracle::conditional(xr, yr, p, x.row(i).data(), 1.0);
      CHECK(std::abs(loo[i] - c.mean) <= 1e-8);
    }
  }
}

TEST_CASE("loocv mean of a point does not depend on its own response") {
  Rng rng(28);
  const Points x = oracle::uniform_points(rng, 8, 1);
  VectorXd y = random_y(rng, 8);
  const GpParams p = random_params(rng, 1);
  const double before = loocv_means(FittedGp::from_params(x, y, p))[3];
  y[3] += 100.0;
  const double after = loocv_means(FittedGp::from_params(x, y, p))[3];
  CHECK(after == doctest::Approx(before).epsilon(1e-10));
}

TEST_CASE("loocv means agree with predictions from the diminished factorization") {
  Rng rng(29);
  for (int t = 0; t < 20; ++t) {
    const Points x = oracle::uniform_points(rng, 9, 2);
    const VectorXd y = random_y(rng, 9);
    const GpParams p = random_params(rng, 2);
    const FittedGp gp = FittedGp::from_params(x, y, p);
    const VectorXd loo = gp.loocv_means();
    for (Index i = 0; i < 9; ++i) {
      const SpdFactorization f = gp.factorization().diminished(i);
      std::vector<int> rest;
      for (int j = 0; j < 9; ++j) {
        if (j != i) rest.push_back(j);
      }
      const VectorXd r = corr_vector(x, rest, x.row(i).data(), p.corr);
      VectorXd res(8);
      for (Index j = 0; j < 8; ++j) res[j] = y[rest[j]] - p.mu;
      const double mean = p.mu + r.dot(f.inverse() * res);
      CHECK(std::abs(loo[i] - mean) <= 1e-8);
    }
  }
}
