#pragma once

#include <optional>

#include "cgp/linalg.hpp"

namespace cgp {

struct GpParams {
  double mu = 0.0;
  double sigma2 = 1.0;
  CorrelationSpec corr;
};

/// Box for the decay parameters, in gamma units (not log).
struct GammaBounds {
  VectorXd lower;
  VectorXd upper;

  bool empty() const { return lower.size() == 0; }
  /// [1e-2 / r_l, 1e2 / r_l] with r_l the observed range of column l
  /// (r_l = 1 for constant columns).
  static GammaBounds from_ranges(const Points& x);
};

struct GpFitOptions {
  double power = 2.0;
  double nugget = 1e-6;
  int starts = 8;
  /// Objective evaluations per local search; 0 picks 60 + 40 d.
  int max_evals_per_start = 0;
  /// Defaults to GammaBounds::from_ranges of the fitted inputs.
  GammaBounds bounds;
  /// Warm start. With `local_only` this is the single search start, otherwise
  /// it replaces the first of the space-filling starts.
  std::optional<VectorXd> init_gamma;
  bool local_only = false;
};

/// Closed-form mean and variance for fixed correlation parameters, and the
/// resulting profile log-likelihood -0.5 (n log sigma2 + log det R) (additive
/// constants dropped).
struct ProfileEstimate {
  double mu = 0.0;
  double sigma2 = 0.0;
  double log_likelihood = 0.0;
};

/// Throws kNotPositiveDefinite.
ProfileEstimate profile_likelihood(const Points& x, const VectorXd& y,
                                   const CorrelationSpec& spec);
ProfileEstimate profile_likelihood(const SpdFactorization& fact, const VectorXd& y);

struct GpPrediction {
  double mean = 0.0;
  double variance = 0.0;
};

/// A stationary GP conditioned on its training data. Immutable.
class FittedGp {
 public:
  /// Conditions on (x, y) with fixed hyperparameters.
  static FittedGp from_params(Points x, VectorXd y, GpParams params);

  const GpParams& params() const { return params_; }
  const Points& inputs() const { return x_; }
  const VectorXd& responses() const { return y_; }
  const SpdFactorization& factorization() const { return fact_; }
  /// Q (y - mu 1).
  const VectorXd& weights() const { return weights_; }
  Index size() const { return x_.rows(); }
  /// Full Gaussian log-density of the responses, constants included.
  double log_likelihood() const;
  /// Set when the best local search stopped on its evaluation budget.
  bool optimizer_warning() const { return optimizer_warning_; }

  /// Conditional normal at `x` (`dim()` doubles). The variance is
  /// sigma2 (1 - r' Q r) clamped at zero.
  GpPrediction predict(const double* x) const;
  GpPrediction predict(const VectorXd& x) const;

  /// Leave-one-out means from the cached inverse:
  /// mu - (1 / q_ii) sum_{j != i} q_ij (y_j - mu).
  VectorXd loocv_means() const;

 private:
  friend FittedGp fit_gp(Points x, VectorXd y, const GpFitOptions& options);

  GpParams params_;
  Points x_;
  VectorXd y_;
  SpdFactorization fact_;
  VectorXd weights_;
  bool optimizer_warning_ = false;
};

/// Profile maximum likelihood: mu and sigma2 in closed form, log gamma by
/// multistart bounded Nelder-Mead. Throws kTooFewPoints for n < 2.
FittedGp fit_gp(Points x, VectorXd y, const GpFitOptions& options);

GpPrediction gp_predict(const FittedGp& model, const VectorXd& x);
VectorXd loocv_means(const FittedGp& model);

}  // namespace cgp
