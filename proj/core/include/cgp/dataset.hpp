#pragma once

#include <span>

#include "cgp/linalg.hpp"

namespace cgp {

struct Dataset {
  Points x;
  VectorXd y;

  Index size() const { return x.rows(); }
  Index dim() const { return x.cols(); }
};

/// Throws kDimensionMismatch / kMalformedInput for shape or non-finite values,
/// kDuplicatePoints when two rows of x coincide.
void validate_dataset(const Dataset& data);

/// Smallest pairwise Euclidean distance (infinity for n < 2).
double min_pairwise_distance(const Points& x);

/// Rows of `data` selected by `rows`, in that order.
Dataset subset(const Dataset& data, std::span<const int> rows);

}  // namespace cgp
