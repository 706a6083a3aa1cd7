#pragma once

#include <cstdint>
#include <vector>

#include "cgp/linalg.hpp"

namespace cgp {

struct KMeansOptions {
  int restarts = 4;
  int max_iter = 300;
};

struct KMeansResult {
  Points centers;           // K x d
  std::vector<int> labels;  // zero-based
  double inertia = 0.0;
  /// Inertia after each Lloyd iteration of the winning restart.
  std::vector<double> inertia_trace;
};

/// Lloyd's algorithm from k-means++ seeds, best of `restarts` by inertia.
/// Deterministic in `seed`. Empty clusters take the point farthest from its
/// center. Throws kKTooLarge when K > n.
KMeansResult kmeans(const Points& x, int num_clusters, std::uint64_t seed,
                    const KMeansOptions& options = {});

/// Moves points from the largest cluster into any cluster below `min_size`,
/// nearest to the deficient cluster's centroid first. Requires
/// n >= K * min_size (kInfeasibleK otherwise).
void enforce_min_cluster_size(const Points& x, std::vector<int>& labels, int num_clusters,
                              int min_size);

}  // namespace cgp
