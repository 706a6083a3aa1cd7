#pragma once

#include <Eigen/Dense>

#include <span>

namespace cgp {

/// Input locations, one point per row.
using Points = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Power-exponential correlation exp{-(sum_l (gamma_l |x_l - x'_l|)^2)^(power/2)}.
/// With power = 2 this is the anisotropic squared exponential.
struct CorrelationSpec {
  VectorXd gamma;
  double power = 2.0;
  double nugget = 1e-6;

  Index dim() const { return gamma.size(); }
  /// Throws kInvalidArgument / kDimensionMismatch.
  void validate(Index expected_dim) const;
};

double correlation(const double* a, const double* b, const CorrelationSpec& spec);

/// n x n correlation matrix with `spec.nugget` added to the diagonal.
MatrixXd corr_matrix(const Points& points, const CorrelationSpec& spec);
/// Same, restricted to the listed rows (in that order).
MatrixXd corr_matrix(const Points& points, std::span<const int> rows,
                     const CorrelationSpec& spec);
/// Cross-correlations Phi(a_i, b_j); no nugget.
MatrixXd cross_corr(const Points& a, const Points& b, const CorrelationSpec& spec);
/// Phi(points[rows], x); no nugget. `x` points at `spec.dim()` doubles.
VectorXd corr_vector(const Points& points, std::span<const int> rows, const double* x,
                     const CorrelationSpec& spec);
VectorXd corr_vector(const Points& points, const double* x, const CorrelationSpec& spec);

/// Cholesky factor, explicit inverse and log-determinant of an SPD matrix,
/// maintained under single-row/column insertion and deletion in O(n^2).
///
/// Immutable: the update operations return new values.
class SpdFactorization {
 public:
  /// Empty (order 0) factorization, the starting point for `augmented`.
  SpdFactorization() = default;

  Index order() const { return inverse_.rows(); }
  const MatrixXd& lower() const { return lower_; }
  const MatrixXd& inverse() const { return inverse_; }
  double log_det() const { return log_det_; }
  /// Rank-one updates applied since the last full factorization.
  int updates_since_build() const { return updates_; }

  /// Throws kNotPositiveDefinite.
  static SpdFactorization build(const MatrixXd& mat);

  /// Appends a point as the last row/column. `cross` holds its correlations
  /// with the current set and `self_corr` its diagonal entry (1 + nugget).
  /// Throws kNonpositiveSchurComplement when the point numerically duplicates
  /// the span of the current set.
  SpdFactorization augmented(const VectorXd& cross, double self_corr) const;

  /// Removes row/column `index`. Throws kSingletonSet when order() < 2.
  SpdFactorization diminished(Index index) const;

  /// M^-1 b by two triangular solves.
  VectorXd solve(const VectorXd& b) const;
  /// b' M^-1 b as the squared norm of L^-1 b.
  double inverse_quadratic(const VectorXd& b) const;

  /// Schur complement self_corr - cross' Q cross of a candidate point.
  double schur_complement(const VectorXd& cross, double self_corr) const;

 private:
  MatrixXd lower_;
  MatrixXd inverse_;
  double log_det_ = 0.0;
  int updates_ = 0;
};

SpdFactorization factorize(const MatrixXd& mat);
SpdFactorization augment_inverse(const SpdFactorization& fact, const VectorXd& cross,
                                 double self_corr);
SpdFactorization diminish_inverse(const SpdFactorization& fact, Index index);

/// In-place update of a lower Cholesky factor: L L' <- L L' + x x'.
void cholesky_rank_one_update(Eigen::Ref<MatrixXd> lower, VectorXd x);

}  // namespace cgp
