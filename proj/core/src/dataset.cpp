#include "cgp/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "cgp/error.hpp"

namespace cgp {

double min_pairwise_distance(const Points& x) {
  const Index n = x.rows();
  if (n < 2) return std::numeric_limits<double>::infinity();
  // Sweep along the first coordinate so typical designs prune most pairs.
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    return x(a, 0) < x(b, 0) || (x(a, 0) == x(b, 0) && a < b);
  });
  double best2 = std::numeric_limits<double>::infinity();
  for (Index a = 0; a < n; ++a) {
    for (Index b = a + 1; b < n; ++b) {
      const double dx = x(order[b], 0) - x(order[a], 0);
      if (dx * dx >= best2) break;
      best2 = std::min(best2, (x.row(order[a]) - x.row(order[b])).squaredNorm());
    }
  }
  return std::sqrt(best2);
}

void validate_dataset(const Dataset& data) {
  if (data.x.rows() != data.y.size()) {
    fail(ErrorCode::kDimensionMismatch, "x has " + std::to_string(data.x.rows()) +
                                            " rows but y has " + std::to_string(data.y.size()));
  }
  if (data.x.cols() < 1) fail(ErrorCode::kMalformedInput, "no input columns");
  if (!data.x.allFinite() || !data.y.allFinite()) {
    fail(ErrorCode::kMalformedInput, "non-finite values in data");
  }
  if (data.x.cols() > 0 && !(min_pairwise_distance(data.x) > 0.0)) {
    fail(ErrorCode::kDuplicatePoints, "duplicated input rows");
  }
}

Dataset subset(const Dataset& data, std::span<const int> rows) {
  Dataset out;
  out.x.resize(static_cast<Index>(rows.size()), data.x.cols());
  out.y.resize(static_cast<Index>(rows.size()));
  for (Index i = 0; i < out.x.rows(); ++i) {
    out.x.row(i) = data.x.row(rows[i]);
    out.y[i] = data.y[rows[i]];
  }
  return out;
}

}  // namespace cgp
