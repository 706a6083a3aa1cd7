#include "cgp/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "cgp/error.hpp"

namespace cgp {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

NelderMeadResult nelder_mead_box(const std::function<double(const VectorXd&)>& objective,
                                 const VectorXd& start, const VectorXd& lower,
                                 const VectorXd& upper, const NelderMeadOptions& options) {
  const Index d = start.size();
  if (lower.size() != d || upper.size() != d) {
    fail(ErrorCode::kDimensionMismatch, "bounds do not match the start point");
  }

  NelderMeadResult result;
  auto project = [&](VectorXd x) { return VectorXd(x.cwiseMax(lower).cwiseMin(upper)); };
  auto eval = [&](const VectorXd& x) {
    ++result.evals;
    const double v = objective(x);
    return std::isfinite(v) ? v : kInf;
  };

  std::vector<VectorXd> simplex;
  std::vector<double> values;
  simplex.reserve(d + 1);
  simplex.push_back(project(start));
  for (Index l = 0; l < d; ++l) {
    VectorXd v = simplex.front();
    const double step = options.initial_step;
    v[l] = (v[l] + step <= upper[l]) ? v[l] + step : v[l] - step;
    simplex.push_back(project(std::move(v)));
  }
  for (const auto& v : simplex) values.push_back(eval(v));

  std::vector<std::size_t> order(simplex.size());
  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<VectorXd> s2;
    std::vector<double> v2;
    for (auto i : order) {
      s2.push_back(std::move(simplex[i]));
      v2.push_back(values[i]);
    }
    simplex = std::move(s2);
    values = std::move(v2);
  };

  constexpr double kReflect = 1.0, kExpand = 2.0, kContract = 0.5, kShrink = 0.5;
  const std::size_t worst = simplex.size() - 1;
  while (true) {
    sort_simplex();
    const double best = values.front();
    double fspread = 0.0, xspread = 0.0;
    for (std::size_t i = 1; i < simplex.size(); ++i) {
      fspread = std::max(fspread, std::abs(values[i] - best));
      xspread = std::max(xspread, (simplex[i] - simplex.front()).cwiseAbs().maxCoeff());
    }
    if (std::isfinite(best) && fspread <= options.f_tol * (1.0 + std::abs(best)) &&
        xspread <= options.x_tol) {
      result.converged = true;
      break;
    }
    if (d == 0 || result.evals >= options.max_evals) break;

    VectorXd centroid = VectorXd::Zero(d);
    for (std::size_t i = 0; i < worst; ++i) centroid += simplex[i];
    centroid /= static_cast<double>(worst);

    const VectorXd reflected = project(centroid + kReflect * (centroid - simplex[worst]));
    const double fr = eval(reflected);
    if (fr < values.front()) {
      const VectorXd expanded = project(centroid + kExpand * (reflected - centroid));
      const double fe = eval(expanded);
      if (fe < fr) {
        simplex[worst] = expanded;
        values[worst] = fe;
      } else {
        simplex[worst] = reflected;
        values[worst] = fr;
      }
      continue;
    }
    if (fr < values[worst - 1]) {
      simplex[worst] = reflected;
      values[worst] = fr;
      continue;
    }
    const bool outside = fr < values[worst];
    const VectorXd contracted =
        outside ? project(centroid + kContract * (reflected - centroid))
                : project(centroid + kContract * (simplex[worst] - centroid));
    const double fc = eval(contracted);
    if (fc < (outside ? fr : values[worst])) {
      simplex[worst] = contracted;
      values[worst] = fc;
      continue;
    }
    for (std::size_t i = 1; i < simplex.size(); ++i) {
      simplex[i] = project(simplex.front() + kShrink * (simplex[i] - simplex.front()));
      values[i] = eval(simplex[i]);
    }
  }

  result.x = simplex.front();
  result.value = values.front();
  return result;
}

}  // namespace cgp
