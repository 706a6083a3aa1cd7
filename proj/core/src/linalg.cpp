#include "cgp/linalg.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "cgp/error.hpp"

namespace cgp {

void CorrelationSpec::validate(Index expected_dim) const {
  if (gamma.size() != expected_dim) {
    fail(ErrorCode::kDimensionMismatch, "gamma has " + std::to_string(gamma.size()) +
                                            " entries, inputs have " +
                                            std::to_string(expected_dim) + " columns");
  }
  for (Index l = 0; l < gamma.size(); ++l) {
    if (!(gamma[l] > 0.0) || !std::isfinite(gamma[l])) {
      fail(ErrorCode::kInvalidArgument, "gamma must be strictly positive");
    }
  }
  if (!(power > 0.0 && power <= 2.0)) {
    fail(ErrorCode::kInvalidArgument, "power must lie in (0, 2]");
  }
  if (!(nugget >= 0.0) || !std::isfinite(nugget)) {
    fail(ErrorCode::kInvalidArgument, "nugget must be nonnegative");
  }
}

double correlation(const double* a, const double* b, const CorrelationSpec& spec) {
  const Index d = spec.gamma.size();
  const double* g = spec.gamma.data();
  double sq = 0.0;
  for (Index l = 0; l < d; ++l) {
    const double t = g[l] * (a[l] - b[l]);
    sq += t * t;
  }
  if (spec.power == 2.0) return std::exp(-sq);
  return std::exp(-std::pow(sq, 0.5 * spec.power));
}

MatrixXd corr_matrix(const Points& points, const CorrelationSpec& spec) {
  spec.validate(points.cols());
  const Index n = points.rows();
  MatrixXd out(n, n);
  for (Index j = 0; j < n; ++j) {
    out(j, j) = 1.0 + spec.nugget;
    for (Index i = j + 1; i < n; ++i) {
      const double c = correlation(points.row(i).data(), points.row(j).data(), spec);
      out(i, j) = c;
      out(j, i) = c;
    }
  }
  return out;
}

MatrixXd corr_matrix(const Points& points, std::span<const int> rows,
                     const CorrelationSpec& spec) {
  spec.validate(points.cols());
  const auto n = static_cast<Index>(rows.size());
  MatrixXd out(n, n);
  for (Index j = 0; j < n; ++j) {
    out(j, j) = 1.0 + spec.nugget;
    const double* xj = points.row(rows[j]).data();
    for (Index i = j + 1; i < n; ++i) {
      const double c = correlation(points.row(rows[i]).data(), xj, spec);
      out(i, j) = c;
      out(j, i) = c;
    }
  }
  return out;
}

MatrixXd cross_corr(const Points& a, const Points& b, const CorrelationSpec& spec) {
  spec.validate(a.cols());
  if (b.cols() != a.cols()) fail(ErrorCode::kDimensionMismatch, "cross_corr column mismatch");
  MatrixXd out(a.rows(), b.rows());
  for (Index j = 0; j < b.rows(); ++j) {
    for (Index i = 0; i < a.rows(); ++i) {
      out(i, j) = correlation(a.row(i).data(), b.row(j).data(), spec);
    }
  }
  return out;
}

VectorXd corr_vector(const Points& points, std::span<const int> rows, const double* x,
                     const CorrelationSpec& spec) {
  VectorXd out(static_cast<Index>(rows.size()));
  for (Index i = 0; i < out.size(); ++i) {
    out[i] = correlation(points.row(rows[i]).data(), x, spec);
  }
  return out;
}

VectorXd corr_vector(const Points& points, const double* x, const CorrelationSpec& spec) {
  VectorXd out(points.rows());
  for (Index i = 0; i < out.size(); ++i) {
    out[i] = correlation(points.row(i).data(), x, spec);
  }
  return out;
}

SpdFactorization SpdFactorization::build(const MatrixXd& mat) {
  if (mat.rows() != mat.cols()) fail(ErrorCode::kDimensionMismatch, "matrix is not square");
  SpdFactorization f;
  const Index n = mat.rows();
  if (n == 0) return f;
  Eigen::LLT<MatrixXd> llt(mat);
  if (llt.info() != Eigen::Success) {
    fail(ErrorCode::kNotPositiveDefinite,
         "matrix of order " + std::to_string(n) +
             " is not numerically positive definite (nugget too small or duplicated points)");
  }
  f.lower_ = llt.matrixL();
  const auto diag = f.lower_.diagonal();
  if ((diag.array() <= 0.0).any() || !diag.allFinite()) {
    fail(ErrorCode::kNotPositiveDefinite, "degenerate Cholesky pivot");
  }
  f.log_det_ = 2.0 * diag.array().log().sum();
  f.inverse_ = llt.solve(MatrixXd::Identity(n, n));
  f.inverse_ = 0.5 * (f.inverse_ + f.inverse_.transpose());
  return f;
}

VectorXd SpdFactorization::solve(const VectorXd& b) const {
  if (b.size() != order()) fail(ErrorCode::kDimensionMismatch, "right-hand side length");
  if (order() == 0) return b;
  const VectorXd half = lower_.triangularView<Eigen::Lower>().solve(b);
  return lower_.transpose().triangularView<Eigen::Upper>().solve(half);
}

double SpdFactorization::inverse_quadratic(const VectorXd& b) const {
  if (b.size() != order()) fail(ErrorCode::kDimensionMismatch, "right-hand side length");
  if (order() == 0) return 0.0;
  return lower_.triangularView<Eigen::Lower>().solve(b).squaredNorm();
}

double SpdFactorization::schur_complement(const VectorXd& cross, double self_corr) const {
  if (cross.size() != order()) {
    fail(ErrorCode::kDimensionMismatch, "cross-correlation length differs from set size");
  }
  return self_corr - inverse_quadratic(cross);
}

SpdFactorization SpdFactorization::augmented(const VectorXd& cross, double self_corr) const {
  const Index n = order();
  if (cross.size() != n) {
    fail(ErrorCode::kDimensionMismatch, "cross-correlation length differs from set size");
  }
  SpdFactorization out;
  out.updates_ = updates_ + 1;
  if (n == 0) {
    if (!(self_corr > 0.0)) fail(ErrorCode::kNonpositiveSchurComplement, "self correlation <= 0");
    out.lower_ = MatrixXd::Constant(1, 1, std::sqrt(self_corr));
    out.inverse_ = MatrixXd::Constant(1, 1, 1.0 / self_corr);
    out.log_det_ = std::log(self_corr);
    return out;
  }

  // Through the factor: l = L^-1 cross, s = self - l'l, B cross = L^-T l.
  const VectorXd l = lower_.triangularView<Eigen::Lower>().solve(cross);
  const double schur = self_corr - l.squaredNorm();
  const double rounding = static_cast<double>(n + 1) * std::numeric_limits<double>::epsilon() *
                          (self_corr + l.squaredNorm());
  if (!(schur > rounding) || !std::isfinite(schur)) {
    fail(ErrorCode::kNonpositiveSchurComplement,
         "point numerically duplicates an existing member (Schur complement " +
             std::to_string(schur) + ")");
  }
  const VectorXd bv = lower_.transpose().triangularView<Eigen::Upper>().solve(l);

  out.inverse_.resize(n + 1, n + 1);
  out.inverse_.topLeftCorner(n, n) = inverse_ + (bv * bv.transpose()) / schur;
  out.inverse_.block(n, 0, 1, n) = -bv.transpose() / schur;
  out.inverse_.block(0, n, n, 1) = -bv / schur;
  out.inverse_(n, n) = 1.0 / schur;
  out.log_det_ = log_det_ + std::log(schur);

  out.lower_ = MatrixXd::Zero(n + 1, n + 1);
  out.lower_.topLeftCorner(n, n) = lower_;
  out.lower_.block(n, 0, 1, n) = l.transpose();
  out.lower_(n, n) = std::sqrt(schur);
  return out;
}

SpdFactorization SpdFactorization::diminished(Index index) const {
  const Index n = order();
  if (n < 2) fail(ErrorCode::kSingletonSet, "cannot remove a point from a set of size < 2");
  if (index < 0 || index >= n) fail(ErrorCode::kInvalidArgument, "index out of range");

  const Index m = n - 1;
  const Index tail = n - index - 1;
  auto drop = [&](const MatrixXd& src) {
    MatrixXd dst(m, m);
    dst.topLeftCorner(index, index) = src.topLeftCorner(index, index);
    dst.topRightCorner(index, tail) = src.topRightCorner(index, tail);
    dst.bottomLeftCorner(tail, index) = src.bottomLeftCorner(tail, index);
    dst.bottomRightCorner(tail, tail) = src.bottomRightCorner(tail, tail);
    return dst;
  };

  SpdFactorization out;
  out.updates_ = updates_ + 1;

  // Inverse of the submatrix = Q_{-i,-i} - q_{-i,i} q_{i,-i} / q_ii.
  const double corner = inverse_(index, index);
  VectorXd off(m);
  off.head(index) = inverse_.col(index).head(index);
  off.tail(tail) = inverse_.col(index).tail(tail);
  out.inverse_ = drop(inverse_);
  out.inverse_.noalias() -= (off * off.transpose()) / corner;
  // det(M) = det(M_{-i,-i}) / q_ii.
  out.log_det_ = log_det_ + std::log(corner);

  out.lower_ = drop(lower_);
  if (tail > 0) {
    VectorXd spill = lower_.col(index).tail(tail);
    cholesky_rank_one_update(out.lower_.bottomRightCorner(tail, tail), std::move(spill));
  }
  return out;
}

void cholesky_rank_one_update(Eigen::Ref<MatrixXd> lower, VectorXd x) {
  const Index n = lower.rows();
  for (Index k = 0; k < n; ++k) {
    const double lkk = lower(k, k);
    const double r = std::hypot(lkk, x[k]);
    const double c = r / lkk;
    const double s = x[k] / lkk;
    lower(k, k) = r;
    if (k + 1 < n) {
      const Index rest = n - k - 1;
      lower.col(k).tail(rest) = (lower.col(k).tail(rest) + s * x.tail(rest)) / c;
      x.tail(rest) = c * x.tail(rest) - s * lower.col(k).tail(rest);
    }
  }
}

SpdFactorization factorize(const MatrixXd& mat) { return SpdFactorization::build(mat); }

SpdFactorization augment_inverse(const SpdFactorization& fact, const VectorXd& cross,
                                 double self_corr) {
  return fact.augmented(cross, self_corr);
}

SpdFactorization diminish_inverse(const SpdFactorization& fact, Index index) {
  return fact.diminished(index);
}

}  // namespace cgp
