#pragma once

#include <vector>

#include "cgp/sem.hpp"

namespace cgp {

struct MixtureComponent {
  double mean = 0.0;
  /// Conditional variance; zero only for an exact interpolation with no
  /// nugget, in which case the component is a point mass.
  double variance = 0.0;
  double weight = 0.0;
};

/// Predictive distribution at one input: a gated mixture of normals.
struct PredictiveMixture {
  std::vector<MixtureComponent> components;
};

/// `x` in original input units.
PredictiveMixture predictive_mixture(const ClusteredGpModel& model, const VectorXd& x);

struct MeanVariance {
  double mean = 0.0;
  double variance = 0.0;
};

/// Law of total variance: sum w s^2 + sum w m^2 - (sum w m)^2, clamped at 0.
MeanVariance mixture_mean_var(const PredictiveMixture& mix);

double mixture_cdf(const PredictiveMixture& mix, double y);
double mixture_pdf(const PredictiveMixture& mix, double y);

/// Solves mixture_cdf(y) = q by bisection. Throws kQOutOfRange unless
/// 0 < q < 1.
double mixture_quantile(const PredictiveMixture& mix, double q);

double normal_cdf(double z);

}  // namespace cgp
