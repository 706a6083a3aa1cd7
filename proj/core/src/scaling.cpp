#include "cgp/scaling.hpp"

#include "cgp/error.hpp"

namespace cgp {

InputScaling InputScaling::fit(const Points& x) {
  InputScaling s;
  s.offset = x.colwise().minCoeff().transpose();
  s.scale = (x.colwise().maxCoeff() - x.colwise().minCoeff()).transpose();
  for (Index l = 0; l < s.scale.size(); ++l) {
    if (!(s.scale[l] > 0.0)) s.scale[l] = 1.0;
  }
  return s;
}

InputScaling InputScaling::identity(Index dim) {
  return InputScaling{VectorXd::Zero(dim), VectorXd::Ones(dim)};
}

Points InputScaling::apply(const Points& x) const {
  if (x.cols() != dim()) fail(ErrorCode::kDimensionMismatch, "scaling dimension");
  Points out(x.rows(), x.cols());
  for (Index i = 0; i < x.rows(); ++i) {
    for (Index l = 0; l < x.cols(); ++l) out(i, l) = (x(i, l) - offset[l]) / scale[l];
  }
  return out;
}

VectorXd InputScaling::apply(const double* x) const {
  VectorXd out(dim());
  for (Index l = 0; l < dim(); ++l) out[l] = (x[l] - offset[l]) / scale[l];
  return out;
}

}  // namespace cgp
