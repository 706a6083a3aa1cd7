#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cgp/dataset.hpp"
#include "cgp/gating.hpp"
#include "cgp/gp.hpp"
#include "cgp/random.hpp"
#include "cgp/scaling.hpp"

namespace cgp {

struct SemConfig {
  int max_iter = 100;
  std::uint64_t seed = 0;
  double nugget = 1e-6;
  double power = 2.0;
  /// Gating ridge per observation: the penalty is ridge * n.
  double ridge = 1e-4;
  /// Stop after this many iterations without a new LOOCV minimum.
  int patience = 10;
  int threads = 1;
  /// Re-optimize gamma every `refit_every` iterations; in between only the
  /// closed-form mu and sigma2 are refreshed.
  int refit_every = 1;
  /// Space-filling starts for the initial hyperparameter search.
  int gp_starts = 8;
  /// Local search budget per start (0 = default of fit_gp).
  int gp_max_evals = 0;
  /// Optional cap on cluster size; draws into a full cluster are redirected.
  std::optional<int> n_max;
  /// Visit points in a fresh random order each sweep instead of 0..n-1.
  bool shuffle_sweep = false;
  /// 0 selects max(2, d + 1).
  int min_cluster_size = 0;
  /// Rebuild a cluster's factorization from scratch after this many
  /// rank-one updates.
  int refactor_every = 64;
  /// Defaults to GammaBounds::from_ranges of the (normalized) inputs.
  std::optional<GammaBounds> gamma_bounds;
  /// Map inputs onto [0, 1]^d before fitting.
  bool normalize_inputs = true;

  int effective_min_size(Index dim) const;
};

/// Live per-cluster GP: members in factorization order.
struct ClusterCache {
  std::vector<int> members;
  GpParams params;
  SpdFactorization fact;
};

/// Mutable SEM state over a fixed dataset (already normalized).
struct ClusterState {
  std::shared_ptr<const Dataset> data;
  std::vector<int> labels;  // zero-based cluster of each point
  std::vector<ClusterCache> clusters;
  GatingModel gating;
  int iteration = 0;

  int num_clusters() const { return static_cast<int>(clusters.size()); }
  /// Partition, sizes, and member/factorization agreement. Throws on failure.
  void check_invariants(int min_size) const;
};

/// Membership probabilities of point i under the current state: normal
/// density of y_i given the other members of each cluster, times the gating
/// probability, normalized. The own cluster is evaluated through
/// diminish_inverse. Requires the own cluster to have at least 2 members.
VectorXd assignment_probs(const ClusterState& state, Index i);

struct EStepStats {
  int switches = 0;
  int redirected = 0;
};

/// One Gibbs sweep. Moves update the affected factorizations in O(n_k^2).
EStepStats stochastic_e_step(ClusterState& state, Rng& rng, const SemConfig& config);

struct MStepReport {
  /// Human-readable notes, e.g. merged degenerate clusters.
  std::vector<std::string> events;
  int optimizer_warnings = 0;
};

enum class HyperSearch {
  kFull,       // multistart search (initial fit)
  kWarmLocal,  // single local search from the current gamma
  kProfileOnly // keep gamma, refresh mu and sigma2
};

/// Refits every cluster GP (concurrently) and the gating model, then rebuilds
/// the factorizations. Clusters with fewer than 2 members are merged into the
/// nearest cluster by centroid, reducing K.
MStepReport m_step(ClusterState& state, const SemConfig& config, HyperSearch search);

/// Root mean squared leave-one-out error of the gated mixture mean.
double loocv_rmse(const ClusterState& state);

/// Fresh state from labels (parameters not yet fitted: call m_step).
ClusterState make_state(std::shared_ptr<const Dataset> data, std::vector<int> labels,
                        int num_clusters);

struct SemTrace {
  std::vector<double> loocv_rmse;  // index = iteration, 0 = initial fit
  std::vector<int> switches;
  std::vector<int> redirected;
  std::vector<std::vector<std::uint16_t>> assignments;
  std::vector<std::string> events;
  int best_iteration = 0;
};

struct FitInfo {
  std::uint64_t seed = 0;
  int iterations = 0;
  int best_iteration = 0;
  double best_loocv_rmse = 0.0;
};

/// Frozen fitted model; all cluster GPs and the gating live in normalized
/// input coordinates, the data and the public interface in original units.
class ClusteredGpModel {
 public:
  static ClusteredGpModel assemble(Dataset data, InputScaling scaling, std::vector<int> labels,
                                   std::vector<GpParams> params, GatingModel gating,
                                   FitInfo info);

  int num_clusters() const { return static_cast<int>(clusters_.size()); }
  Index dim() const { return data_.dim(); }
  const Dataset& data() const { return data_; }
  const InputScaling& scaling() const { return scaling_; }
  const std::vector<int>& labels() const { return labels_; }
  const std::vector<FittedGp>& clusters() const { return clusters_; }
  const GatingModel& gating() const { return gating_; }
  const FitInfo& info() const { return info_; }
  /// Member row indices of cluster k (ascending).
  std::vector<int> members(int k) const;

 private:
  Dataset data_;
  InputScaling scaling_;
  std::vector<int> labels_;
  std::vector<FittedGp> clusters_;
  GatingModel gating_;
  FitInfo info_;
};

/// loocv_rmse of a frozen model: the same quantity the fit loop minimizes.
double loocv_rmse(const ClusteredGpModel& model);

struct ClusteredFit {
  ClusteredGpModel model;
  SemTrace trace;
};

/// K-means initialization, initial M-step, then E/M iterations until the
/// LOOCV RMSE has not improved for `patience` iterations or `max_iter` is
/// reached. Returns the model at the iteration with the lowest LOOCV RMSE.
/// Throws kInfeasibleK when n < K * min_cluster_size.
ClusteredFit fit_clustered_gp(const Dataset& data, int num_clusters, const SemConfig& config);

/// The GP options the M-step uses on normalized data; exposed so that a
/// stationary baseline can be fitted the same way.
GpFitOptions gp_options(const SemConfig& config, const GammaBounds& bounds);

/// Stationary GP on the same normalized coordinates fit_clustered_gp uses.
struct StationaryFit {
  InputScaling scaling;
  FittedGp gp;
};
StationaryFit fit_stationary_gp(const Dataset& data, const SemConfig& config);

struct SelectKResult {
  int best_k = 0;
  std::vector<int> grid;
  std::vector<double> min_loocv_rmse;
  std::vector<ClusteredFit> fits;  // parallel to grid

  const ClusteredFit& best() const;
};

/// Fits each K of the grid and keeps the lowest best-iteration LOOCV RMSE
/// (ties go to the smaller K).
SelectKResult select_k(const Dataset& data, std::vector<int> grid, const SemConfig& config);

}  // namespace cgp
