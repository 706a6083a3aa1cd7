#include "cgp/gating.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cgp/error.hpp"

namespace cgp {

GatingModel::GatingModel(int num_classes, Index dim)
    : intercepts_(VectorXd::Zero(std::max(num_classes - 1, 0))),
      slopes_(MatrixXd::Zero(std::max(num_classes - 1, 0), dim)) {
  if (num_classes < 1) fail(ErrorCode::kInvalidArgument, "gating needs at least one class");
}

GatingModel::GatingModel(VectorXd intercepts, MatrixXd slopes)
    : intercepts_(std::move(intercepts)), slopes_(std::move(slopes)) {
  if (slopes_.rows() != intercepts_.size()) {
    fail(ErrorCode::kDimensionMismatch, "gating slopes and intercepts disagree on K");
  }
}

VectorXd GatingModel::scores(const double* x) const {
  const Index k1 = intercepts_.size();
  VectorXd s(k1 + 1);
  const Eigen::Map<const VectorXd> xv(x, slopes_.cols());
  if (k1 > 0) s.head(k1) = intercepts_ + slopes_ * xv;
  s[k1] = 0.0;
  return s;
}

VectorXd GatingModel::probabilities(const double* x) const { return softmax(scores(x)); }

VectorXd GatingModel::probabilities(const VectorXd& x) const {
  if (x.size() != dim() && num_classes() > 1) {
    fail(ErrorCode::kDimensionMismatch, "gating input dimension");
  }
  return probabilities(x.data());
}

VectorXd GatingModel::log_probabilities(const double* x) const { return log_softmax(scores(x)); }

VectorXd gating_probs(const GatingModel& model, const VectorXd& x) {
  return model.probabilities(x);
}

VectorXd softmax(const VectorXd& scores) {
  const VectorXd e = (scores.array() - scores.maxCoeff()).exp();
  return e / e.sum();
}

VectorXd log_softmax(const VectorXd& scores) {
  const double m = scores.maxCoeff();
  const double lse = m + std::log((scores.array() - m).exp().sum());
  return scores.array() - lse;
}

namespace {

struct Standardized {
  MatrixXd design;  // n x (d+1), leading column of ones
  VectorXd center;
  VectorXd scale;
};

Standardized standardize(const Points& x) {
  const Index n = x.rows(), d = x.cols();
  Standardized s;
  s.center = x.colwise().mean().transpose();
  s.scale.resize(d);
  s.design.resize(n, d + 1);
  s.design.col(0).setOnes();
  for (Index l = 0; l < d; ++l) {
    const double sd =
        std::sqrt((x.col(l).array() - s.center[l]).square().sum() / static_cast<double>(n));
    s.scale[l] = sd > 0.0 ? sd : 1.0;
    s.design.col(l + 1) = (x.col(l).array() - s.center[l]) / s.scale[l];
  }
  return s;
}

struct Evaluation {
  double objective;
  MatrixXd gradient;  // (K-1) x (d+1)
};

Evaluation evaluate(const MatrixXd& coef, const MatrixXd& design, const MatrixXd& onehot,
                    double ridge) {
  const Index n = design.rows();
  const Index k1 = coef.rows();
  MatrixXd scores(n, k1 + 1);
  scores.leftCols(k1) = design * coef.transpose();
  scores.col(k1).setZero();

  MatrixXd resid(n, k1);
  double loglik = 0.0;
  for (Index i = 0; i < n; ++i) {
    const VectorXd lp = log_softmax(scores.row(i).transpose());
    for (Index k = 0; k <= k1; ++k) {
      if (onehot(i, k) != 0.0) loglik += lp[k];
    }
    resid.row(i) = onehot.row(i).head(k1) - lp.head(k1).array().exp().matrix().transpose();
  }
  const auto slopes = coef.rightCols(coef.cols() - 1);
  Evaluation e;
  e.objective = loglik - 0.5 * ridge * slopes.squaredNorm();
  e.gradient = resid.transpose() * design;
  e.gradient.rightCols(coef.cols() - 1) -= ridge * slopes;
  return e;
}

}  // namespace

GatingModel fit_gating(const Points& x, std::span<const int> labels, int num_classes,
                       const GatingFitOptions& options, GatingFitReport* report) {
  const Index n = x.rows(), d = x.cols();
  if (static_cast<Index>(labels.size()) != n) {
    fail(ErrorCode::kDimensionMismatch, "labels and inputs differ in length");
  }
  if (num_classes < 1) fail(ErrorCode::kInvalidArgument, "num_classes must be >= 1");
  if (!(options.ridge >= 0.0)) fail(ErrorCode::kInvalidArgument, "ridge must be nonnegative");

  std::vector<int> counts(num_classes, 0);
  for (int z : labels) {
    if (z < 0 || z >= num_classes) fail(ErrorCode::kInvalidArgument, "label out of range");
    ++counts[z];
  }
  for (int k = 0; k < num_classes; ++k) {
    if (counts[k] == 0) {
      fail(ErrorCode::kEmptyClass, "class " + std::to_string(k) + " has no members");
    }
  }
  if (report) *report = GatingFitReport{};
  if (num_classes == 1) {
    if (report) report->converged = true;
    return GatingModel(1, d);
  }

  const Standardized st = standardize(x);
  MatrixXd onehot = MatrixXd::Zero(n, num_classes);
  for (Index i = 0; i < n; ++i) onehot(i, labels[i]) = 1.0;

  const Index k1 = num_classes - 1;
  MatrixXd coef = MatrixXd::Zero(k1, d + 1);
  if (const GatingModel* w = options.warm_start;
      w && w->num_classes() == num_classes && w->dim() == d) {
    // Original-space coefficients expressed on standardized inputs.
    coef.col(0) = w->intercepts() + w->slopes() * st.center;
    coef.rightCols(d) = w->slopes() * st.scale.asDiagonal();
  }

  Evaluation cur = evaluate(coef, st.design, onehot, options.ridge);
  if (report) report->objective.push_back(cur.objective);
  double step = 1.0 / std::max(1.0, static_cast<double>(n));
  int iter = 0;
  bool converged = cur.gradient.cwiseAbs().maxCoeff() <= options.grad_tol;
  for (; iter < options.max_iter && !converged; ++iter) {
    const double gnorm2 = cur.gradient.squaredNorm();
    MatrixXd trial;
    Evaluation next;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      trial = coef + step * cur.gradient;
      next = evaluate(trial, st.design, onehot, options.ridge);
      if (std::isfinite(next.objective) &&
          next.objective >= cur.objective + 1e-4 * step * gnorm2) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;

    // Barzilai-Borwein step for the next iteration (ascent form).
    const MatrixXd s = trial - coef;
    const MatrixXd yv = cur.gradient - next.gradient;
    const double sy = (s.array() * yv.array()).sum();
    step = sy > 0.0 ? std::clamp(s.squaredNorm() / sy, 1e-10, 1e10) : step * 2.0;

    coef = std::move(trial);
    cur = std::move(next);
    if (report) report->objective.push_back(cur.objective);
    converged = cur.gradient.cwiseAbs().maxCoeff() <= options.grad_tol;
  }
  if (report) {
    report->iterations = iter;
    report->converged = converged;
  }

  MatrixXd slopes = coef.rightCols(d) * st.scale.cwiseInverse().asDiagonal();
  VectorXd intercepts = coef.col(0) - slopes * st.center;
  return GatingModel(std::move(intercepts), std::move(slopes));
}

}  // namespace cgp
