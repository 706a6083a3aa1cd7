#include "cgp/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "cgp/error.hpp"
#include "cgp/optimize.hpp"
#include "cgp/random.hpp"

namespace cgp {
namespace {

constexpr std::uint64_t kStartSeed = 0x9e3779b97f4a7c15ULL;

double sigma2_floor(const VectorXd& y) {
  const double scale = y.size() > 0 ? y.squaredNorm() / static_cast<double>(y.size()) : 0.0;
  return std::max(1e-14 * scale, 1e-100);
}

ProfileEstimate profile_from_llt(const Eigen::LLT<MatrixXd>& llt, const VectorXd& y) {
  const Index n = y.size();
  const auto lower = llt.matrixL();
  const VectorXd a1 = lower.solve(VectorXd::Ones(n));
  const VectorXd ay = lower.solve(y);
  ProfileEstimate est;
  est.mu = a1.dot(ay) / a1.squaredNorm();
  const VectorXd ar = ay - est.mu * a1;
  est.sigma2 = std::max(ar.squaredNorm() / static_cast<double>(n), sigma2_floor(y));
  const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  est.log_likelihood = -0.5 * (static_cast<double>(n) * std::log(est.sigma2) + log_det);
  return est;
}

/// Space-filling starts over the log-gamma box: a Latin hypercube drawn with
/// a fixed seed so that fits are reproducible and independent of call order.
std::vector<VectorXd> start_points(const VectorXd& log_lo, const VectorXd& log_hi, int count) {
  const Index d = log_lo.size();
  Rng rng(kStartSeed);
  std::vector<VectorXd> starts(count, VectorXd(d));
  std::vector<int> perm(count);
  for (Index l = 0; l < d; ++l) {
    std::iota(perm.begin(), perm.end(), 0);
    shuffle(perm.begin(), perm.end(), rng);
    for (int s = 0; s < count; ++s) {
      const double u = (perm[s] + 0.5) / count;
      starts[s][l] = log_lo[l] + u * (log_hi[l] - log_lo[l]);
    }
  }
  return starts;
}

}  // namespace

GammaBounds GammaBounds::from_ranges(const Points& x) {
  GammaBounds b;
  const Index d = x.cols();
  b.lower.resize(d);
  b.upper.resize(d);
  for (Index l = 0; l < d; ++l) {
    double range = x.rows() > 0 ? x.col(l).maxCoeff() - x.col(l).minCoeff() : 0.0;
    if (!(range > 0.0)) range = 1.0;
    b.lower[l] = 1e-2 / range;
    b.upper[l] = 1e2 / range;
  }
  return b;
}

ProfileEstimate profile_likelihood(const Points& x, const VectorXd& y,
                                   const CorrelationSpec& spec) {
  if (x.rows() != y.size()) fail(ErrorCode::kDimensionMismatch, "inputs and responses differ");
  Eigen::LLT<MatrixXd> llt(corr_matrix(x, spec));
  if (llt.info() != Eigen::Success) {
    fail(ErrorCode::kNotPositiveDefinite, "correlation matrix is not positive definite");
  }
  return profile_from_llt(llt, y);
}

ProfileEstimate profile_likelihood(const SpdFactorization& fact, const VectorXd& y) {
  const Index n = y.size();
  if (fact.order() != n) fail(ErrorCode::kDimensionMismatch, "factorization order differs");
  const MatrixXd& q = fact.inverse();
  const VectorXd q1 = q.rowwise().sum();
  ProfileEstimate est;
  est.mu = q1.dot(y) / q1.sum();
  const VectorXd r = y.array() - est.mu;
  est.sigma2 = std::max(r.dot(q * r) / static_cast<double>(n), sigma2_floor(y));
  est.log_likelihood = -0.5 * (static_cast<double>(n) * std::log(est.sigma2) + fact.log_det());
  return est;
}

FittedGp FittedGp::from_params(Points x, VectorXd y, GpParams params) {
  if (x.rows() != y.size()) fail(ErrorCode::kDimensionMismatch, "inputs and responses differ");
  if (x.rows() < 1) fail(ErrorCode::kTooFewPoints, "a GP needs at least one point");
  params.corr.validate(x.cols());
  if (!(params.sigma2 > 0.0)) fail(ErrorCode::kInvalidArgument, "sigma2 must be positive");

  FittedGp gp;
  gp.fact_ = factorize(corr_matrix(x, params.corr));
  gp.weights_ = gp.fact_.solve((y.array() - params.mu).matrix());
  gp.params_ = std::move(params);
  gp.x_ = std::move(x);
  gp.y_ = std::move(y);
  return gp;
}

double FittedGp::log_likelihood() const {
  const double n = static_cast<double>(y_.size());
  const VectorXd r = y_.array() - params_.mu;
  return -0.5 * (n * std::log(2.0 * M_PI * params_.sigma2) + fact_.log_det() +
                 r.dot(weights_) / params_.sigma2);
}

GpPrediction FittedGp::predict(const double* x) const {
  const VectorXd r = corr_vector(x_, x, params_.corr);
  GpPrediction p;
  p.mean = params_.mu + r.dot(weights_);
  p.variance = params_.sigma2 * std::max(0.0, 1.0 - fact_.inverse_quadratic(r));
  return p;
}

GpPrediction FittedGp::predict(const VectorXd& x) const {
  if (x.size() != x_.cols()) fail(ErrorCode::kDimensionMismatch, "prediction point dimension");
  return predict(x.data());
}

VectorXd FittedGp::loocv_means() const {
  const Index n = y_.size();
  if (n < 2) fail(ErrorCode::kTooFewPoints, "leave-one-out needs at least two points");
  const MatrixXd& q = fact_.inverse();
  VectorXd out(n);
  for (Index i = 0; i < n; ++i) {
    // sum_{j != i} q_ij (y_j - mu) = w_i - q_ii (y_i - mu)
    const double off = weights_[i] - q(i, i) * (y_[i] - params_.mu);
    out[i] = params_.mu - off / q(i, i);
  }
  return out;
}

FittedGp fit_gp(Points x, VectorXd y, const GpFitOptions& options) {
  const Index n = x.rows();
  const Index d = x.cols();
  if (y.size() != n) fail(ErrorCode::kDimensionMismatch, "inputs and responses differ");
  if (n < 2) fail(ErrorCode::kTooFewPoints, "fit_gp needs at least two points, got " +
                                                std::to_string(n));

  const GammaBounds bounds = options.bounds.empty() ? GammaBounds::from_ranges(x) : options.bounds;
  if (bounds.lower.size() != d || bounds.upper.size() != d) {
    fail(ErrorCode::kDimensionMismatch, "gamma bounds do not match the input dimension");
  }
  const VectorXd log_lo = bounds.lower.array().log();
  const VectorXd log_hi = bounds.upper.array().log();

  CorrelationSpec spec;
  spec.power = options.power;
  spec.nugget = options.nugget;
  spec.gamma = VectorXd::Ones(d);
  spec.validate(d);

  auto negative_loglik = [&](const VectorXd& log_gamma) {
    CorrelationSpec s = spec;
    s.gamma = log_gamma.array().exp();
    Eigen::LLT<MatrixXd> llt(corr_matrix(x, s));
    if (llt.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
    return -profile_from_llt(llt, y).log_likelihood;
  };

  NelderMeadOptions nm;
  nm.max_evals = options.max_evals_per_start > 0 ? options.max_evals_per_start
                                                 : 60 + 40 * static_cast<int>(d);

  std::vector<VectorXd> starts;
  std::optional<VectorXd> warm;
  if (options.init_gamma) {
    if (options.init_gamma->size() != d) {
      fail(ErrorCode::kDimensionMismatch, "initial gamma does not match the input dimension");
    }
    warm = VectorXd(options.init_gamma->array().log().cwiseMax(log_lo.array()).cwiseMin(
        log_hi.array()));
  }
  if (options.local_only && warm) {
    starts.push_back(*warm);
    nm.initial_step = 0.25;
  } else {
    starts = start_points(log_lo, log_hi, std::max(options.starts, 1));
    if (warm) starts.front() = *warm;
  }

  VectorXd best_x = starts.front();
  double best_value = std::numeric_limits<double>::infinity();
  bool best_converged = false;
  for (const auto& s : starts) {
    const NelderMeadResult r = nelder_mead_box(negative_loglik, s, log_lo, log_hi, nm);
    if (r.value < best_value) {
      best_value = r.value;
      best_x = r.x;
      best_converged = r.converged;
    }
  }
  if (warm) {
    // Keep the warm start unless the search found a real improvement; repeated
    // refits on unchanged data then stay put.
    const double warm_value = negative_loglik(*warm);
    if (std::isfinite(warm_value) && best_value > warm_value - 1e-9 * (1.0 + std::abs(warm_value))) {
      best_x = *warm;
      best_value = warm_value;
      best_converged = true;
    }
  }
  if (!std::isfinite(best_value)) {
    fail(ErrorCode::kNotPositiveDefinite,
         "no evaluated gamma gave a positive definite correlation matrix");
  }

  spec.gamma = best_x.array().exp();
  const ProfileEstimate est = profile_likelihood(x, y, spec);
  GpParams params{est.mu, est.sigma2, spec};
  FittedGp gp = FittedGp::from_params(std::move(x), std::move(y), std::move(params));
  gp.optimizer_warning_ = !best_converged;
  return gp;
}

GpPrediction gp_predict(const FittedGp& model, const VectorXd& x) { return model.predict(x); }

VectorXd loocv_means(const FittedGp& model) { return model.loocv_means(); }

}  // namespace cgp
