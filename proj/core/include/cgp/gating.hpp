#pragma once

#include <span>
#include <vector>

#include "cgp/linalg.hpp"

namespace cgp {

/// K-class softmax over linear scores. Class K - 1 (zero-based) is the
/// reference category with all coefficients fixed at zero.
class GatingModel {
 public:
  /// Single class: probability 1 everywhere.
  GatingModel() = default;
  /// Zero coefficients, i.e. uniform probabilities.
  GatingModel(int num_classes, Index dim);
  /// `slopes` is (K-1) x d, `intercepts` has K-1 entries.
  GatingModel(VectorXd intercepts, MatrixXd slopes);

  int num_classes() const { return static_cast<int>(intercepts_.size()) + 1; }
  Index dim() const { return slopes_.cols(); }
  const VectorXd& intercepts() const { return intercepts_; }
  const MatrixXd& slopes() const { return slopes_; }

  /// Linear scores, the last one identically zero.
  VectorXd scores(const double* x) const;
  VectorXd probabilities(const double* x) const;
  VectorXd probabilities(const VectorXd& x) const;
  VectorXd log_probabilities(const double* x) const;

 private:
  VectorXd intercepts_;
  MatrixXd slopes_;
};

VectorXd gating_probs(const GatingModel& model, const VectorXd& x);

/// Max-subtracted softmax and log-softmax.
VectorXd softmax(const VectorXd& scores);
VectorXd log_softmax(const VectorXd& scores);

struct GatingFitOptions {
  /// Penalty ridge * ||slopes||^2 / 2, applied to the slopes of the internally
  /// standardized inputs. Intercepts are unpenalized.
  double ridge = 0.0;
  int max_iter = 500;
  double grad_tol = 1e-6;
  /// Used as the starting point when it has matching K and d.
  const GatingModel* warm_start = nullptr;
};

struct GatingFitReport {
  int iterations = 0;
  bool converged = false;
  /// Penalized log-likelihood after each accepted step (entry 0 = start).
  std::vector<double> objective;
};

/// Penalized maximum likelihood by gradient ascent with Barzilai-Borwein
/// steps and Armijo backtracking. `labels` are zero-based classes in [0, K).
/// Throws kEmptyClass if a class has no members.
GatingModel fit_gating(const Points& x, std::span<const int> labels, int num_classes,
                       const GatingFitOptions& options = {}, GatingFitReport* report = nullptr);

}  // namespace cgp
