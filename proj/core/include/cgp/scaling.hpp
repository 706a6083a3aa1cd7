#pragma once

#include "cgp/linalg.hpp"

namespace cgp {

/// Affine map of each input column onto [0, 1] using the observed range.
struct InputScaling {
  VectorXd offset;
  VectorXd scale;

  static InputScaling fit(const Points& x);
  static InputScaling identity(Index dim);

  Index dim() const { return offset.size(); }
  Points apply(const Points& x) const;
  VectorXd apply(const double* x) const;
};

}  // namespace cgp
