#include "cgp/predict.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "cgp/error.hpp"

namespace cgp {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

PredictiveMixture predictive_mixture(const ClusteredGpModel& model, const VectorXd& x) {
  if (x.size() != model.dim()) fail(ErrorCode::kDimensionMismatch, "prediction point dimension");
  const VectorXd xs = model.scaling().apply(x.data());
  const VectorXd w = model.gating().probabilities(xs.data());
  PredictiveMixture mix;
  mix.components.reserve(model.num_clusters());
  for (int k = 0; k < model.num_clusters(); ++k) {
    const GpPrediction p = model.clusters()[k].predict(xs.data());
    mix.components.push_back({p.mean, p.variance, w[k]});
  }
  return mix;
}

MeanVariance mixture_mean_var(const PredictiveMixture& mix) {
  double m1 = 0.0, m2 = 0.0, ev = 0.0;
  for (const auto& c : mix.components) {
    m1 += c.weight * c.mean;
    m2 += c.weight * c.mean * c.mean;
    ev += c.weight * c.variance;
  }
  return {m1, std::max(0.0, ev + m2 - m1 * m1)};
}

double mixture_cdf(const PredictiveMixture& mix, double y) {
  double acc = 0.0;
  for (const auto& c : mix.components) {
    if (c.weight == 0.0) continue;
    if (c.variance > 0.0) {
      acc += c.weight * normal_cdf((y - c.mean) / std::sqrt(c.variance));
    } else if (y >= c.mean) {
      acc += c.weight;
    }
  }
  return acc;
}

double mixture_pdf(const PredictiveMixture& mix, double y) {
  double acc = 0.0;
  for (const auto& c : mix.components) {
    if (c.weight == 0.0 || !(c.variance > 0.0)) continue;
    const double sd = std::sqrt(c.variance);
    const double z = (y - c.mean) / sd;
    acc += c.weight * std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
  }
  return acc;
}

namespace {
constexpr double kCdfTolerance = 1e-12;
}  // namespace

double mixture_quantile(const PredictiveMixture& mix, double q) {
  if (!(q > 0.0 && q < 1.0)) fail(ErrorCode::kQOutOfRange, "quantile level must be in (0, 1)");
  if (mix.components.empty()) fail(ErrorCode::kInvalidArgument, "empty mixture");

  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& c : mix.components) {
    const double sd = std::sqrt(std::max(c.variance, 0.0));
    lo = std::min(lo, c.mean - 10.0 * sd);
    hi = std::max(hi, c.mean + 10.0 * sd);
  }
  // The +-10 sd bracket leaves ~1e-23 tail mass per component; widen anyway
  // for extreme q.
  const double pad = std::max(1.0, hi - lo);
  while (mixture_cdf(mix, lo) > q) lo -= pad;
  while (mixture_cdf(mix, hi) < q) hi += pad;

  for (int iter = 0; iter < 400; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double f = mixture_cdf(mix, mid);
    if (std::abs(f - q) <= kCdfTolerance) return mid;
    if (f < q) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace cgp
