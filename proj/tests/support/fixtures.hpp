#pragma once

#include <memory>
#include <vector>

#include "cgp/sem.hpp"

namespace fixture {

/// State over `data` with the given partition and fixed parameters, each
/// cluster factorized from scratch.
inline cgp::ClusterState state_with(std::shared_ptr<const cgp::Dataset> data,
                                    std::vector<int> labels,
                                    const std::vector<cgp::GpParams>& params,
                                    cgp::GatingModel gating) {
  cgp::ClusterState s =
      cgp::make_state(std::move(data), std::move(labels), static_cast<int>(params.size()));
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& c = s.clusters[k];
    c.params = params[k];
    c.fact = cgp::SpdFactorization::build(cgp::corr_matrix(s.data->x, c.members, params[k].corr));
  }
  s.gating = std::move(gating);
  return s;
}

inline std::shared_ptr<const cgp::Dataset> share(cgp::Points x, cgp::VectorXd y) {
  return std::make_shared<const cgp::Dataset>(cgp::Dataset{std::move(x), std::move(y)});
}

}  // namespace fixture
