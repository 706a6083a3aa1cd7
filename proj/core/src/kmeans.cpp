#include "cgp/kmeans.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "cgp/error.hpp"
#include "cgp/random.hpp"

namespace cgp {
namespace {

double sq_dist(const Points& a, Index i, const Points& b, Index j) {
  return (a.row(i) - b.row(j)).squaredNorm();
}

Points seed_plus_plus(const Points& x, int k, Rng& rng) {
  const Index n = x.rows();
  Points centers(k, x.cols());
  centers.row(0) = x.row(static_cast<Index>(uniform_index(rng, n)));
  std::vector<double> d2(n);
  for (Index i = 0; i < n; ++i) d2[i] = sq_dist(x, i, centers, 0);
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (double v : d2) total += v;
    Index pick = n - 1;
    if (total > 0.0) {
      const double target = uniform01(rng) * total;
      double acc = 0.0;
      for (Index i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc > target && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
      while (d2[pick] == 0.0 && pick > 0) --pick;
    } else {
      pick = static_cast<Index>(uniform_index(rng, n));
    }
    centers.row(c) = x.row(pick);
    for (Index i = 0; i < n; ++i) d2[i] = std::min(d2[i], sq_dist(x, i, centers, c));
  }
  return centers;
}

struct LloydOutcome {
  Points centers;
  std::vector<int> labels;
  double inertia;
  std::vector<double> trace;
};

LloydOutcome lloyd(const Points& x, Points centers, int max_iter) {
  const Index n = x.rows(), d = x.cols();
  const int k = static_cast<int>(centers.rows());
  LloydOutcome out;
  out.labels.assign(n, -1);

  for (int iter = 0; iter < max_iter; ++iter) {
    bool changed = false;
    for (Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = sq_dist(x, i, centers, 0);
      for (int c = 1; c < k; ++c) {
        const double dc = sq_dist(x, i, centers, c);
        if (dc < best_d) {
          best_d = dc;
          best = c;
        }
      }
      if (out.labels[i] != best) {
        out.labels[i] = best;
        changed = true;
      }
    }

    std::vector<int> counts(k, 0);
    for (int z : out.labels) ++counts[z];
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) continue;
      // Repair: hand the empty cluster the worst-fitted point of a cluster
      // that can spare it.
      Index far = -1;
      double far_d = -1.0;
      for (Index i = 0; i < n; ++i) {
        if (counts[out.labels[i]] < 2) continue;
        const double di = sq_dist(x, i, centers, out.labels[i]);
        if (di > far_d) {
          far_d = di;
          far = i;
        }
      }
      --counts[out.labels[far]];
      out.labels[far] = c;
      ++counts[c];
      changed = true;
    }

    centers.setZero(k, d);
    for (Index i = 0; i < n; ++i) centers.row(out.labels[i]) += x.row(i);
    for (int c = 0; c < k; ++c) centers.row(c) /= static_cast<double>(counts[c]);

    double inertia = 0.0;
    for (Index i = 0; i < n; ++i) inertia += sq_dist(x, i, centers, out.labels[i]);
    out.trace.push_back(inertia);
    if (!changed) break;
  }
  out.centers = std::move(centers);
  out.inertia = out.trace.back();
  return out;
}

}  // namespace

KMeansResult kmeans(const Points& x, int num_clusters, std::uint64_t seed,
                    const KMeansOptions& options) {
  const Index n = x.rows();
  if (num_clusters < 1) fail(ErrorCode::kInvalidArgument, "K must be >= 1");
  if (num_clusters > n) {
    fail(ErrorCode::kKTooLarge, "K = " + std::to_string(num_clusters) + " exceeds n = " +
                                    std::to_string(n));
  }

  Rng rng(seed);
  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < std::max(options.restarts, 1); ++r) {
    LloydOutcome o = lloyd(x, seed_plus_plus(x, num_clusters, rng), options.max_iter);
    if (o.inertia < best.inertia) {
      best.centers = std::move(o.centers);
      best.labels = std::move(o.labels);
      best.inertia = o.inertia;
      best.inertia_trace = std::move(o.trace);
    }
  }
  return best;
}

void enforce_min_cluster_size(const Points& x, std::vector<int>& labels, int num_clusters,
                              int min_size) {
  const Index n = x.rows(), d = x.cols();
  if (static_cast<Index>(num_clusters) * min_size > n) {
    fail(ErrorCode::kInfeasibleK, std::to_string(num_clusters) + " clusters of at least " +
                                      std::to_string(min_size) + " points need n >= " +
                                      std::to_string(num_clusters * min_size));
  }
  while (true) {
    std::vector<int> counts(num_clusters, 0);
    for (int z : labels) ++counts[z];
    int small = -1;
    for (int c = 0; c < num_clusters; ++c) {
      if (counts[c] < min_size && (small < 0 || counts[c] < counts[small])) small = c;
    }
    if (small < 0) return;
    const int donor =
        static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());

    Eigen::RowVectorXd target = Eigen::RowVectorXd::Zero(d);
    bool use_far = counts[small] == 0;
    if (use_far) {
      for (Index i = 0; i < n; ++i) {
        if (labels[i] == donor) target += x.row(i);
      }
      target /= static_cast<double>(counts[donor]);
    } else {
      for (Index i = 0; i < n; ++i) {
        if (labels[i] == small) target += x.row(i);
      }
      target /= static_cast<double>(counts[small]);
    }
    Index pick = -1;
    double pick_d = 0.0;
    for (Index i = 0; i < n; ++i) {
      if (labels[i] != donor) continue;
      const double di = (x.row(i) - target).squaredNorm();
      const bool better = use_far ? di > pick_d : di < pick_d;
      if (pick < 0 || better) {
        pick = i;
        pick_d = di;
      }
    }
    labels[pick] = small;
  }
}

}  // namespace cgp
