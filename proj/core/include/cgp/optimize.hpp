#pragma once

#include <functional>

#include "cgp/linalg.hpp"

namespace cgp {

struct NelderMeadOptions {
  int max_evals = 500;
  double initial_step = 0.5;
  double f_tol = 1e-10;  // relative spread of simplex values
  double x_tol = 1e-8;   // max-norm spread of simplex vertices
};

struct NelderMeadResult {
  VectorXd x;
  double value = 0.0;
  int evals = 0;
  bool converged = false;
};

/// Derivative-free minimization over the box [lower, upper]. Trial points are
/// projected onto the box; non-finite objective values count as +infinity.
NelderMeadResult nelder_mead_box(const std::function<double(const VectorXd&)>& objective,
                                 const VectorXd& start, const VectorXd& lower,
                                 const VectorXd& upper, const NelderMeadOptions& options = {});

}  // namespace cgp
