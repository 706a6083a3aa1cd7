#include "cgp/sem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "cgp/error.hpp"
#include "cgp/kmeans.hpp"
#include "cgp/parallel.hpp"

namespace cgp {

int SemConfig::effective_min_size(Index dim) const {
  if (min_cluster_size > 0) return min_cluster_size;
  return std::max(2, static_cast<int>(dim) + 1);
}

void ClusterState::check_invariants(int min_size) const {
  const Index n = data->size();
  if (static_cast<Index>(labels.size()) != n) fail(ErrorCode::kInvalidArgument, "label count");
  std::vector<int> seen(n, 0);
  for (int k = 0; k < num_clusters(); ++k) {
    const auto& c = clusters[k];
    if (static_cast<int>(c.members.size()) < min_size) {
      fail(ErrorCode::kInvalidArgument, "cluster " + std::to_string(k) + " below minimum size");
    }
    if (c.fact.order() != static_cast<Index>(c.members.size())) {
      fail(ErrorCode::kInvalidArgument, "factorization order differs from member count");
    }
    for (int i : c.members) {
      if (labels[i] != k) fail(ErrorCode::kInvalidArgument, "member label mismatch");
      ++seen[i];
    }
  }
  for (Index i = 0; i < n; ++i) {
    if (seen[i] != 1) fail(ErrorCode::kInvalidArgument, "clusters do not partition the data");
  }
}

ClusterState make_state(std::shared_ptr<const Dataset> data, std::vector<int> labels,
                        int num_clusters) {
  ClusterState s;
  s.data = std::move(data);
  s.labels = std::move(labels);
  s.clusters.resize(num_clusters);
  for (Index i = 0; i < static_cast<Index>(s.labels.size()); ++i) {
    const int z = s.labels[i];
    if (z < 0 || z >= num_clusters) fail(ErrorCode::kInvalidArgument, "label out of range");
    s.clusters[z].members.push_back(static_cast<int>(i));
  }
  s.gating = GatingModel(num_clusters, s.data->dim());
  return s;
}

namespace {

struct PointEvaluation {
  VectorXd log_weights;
  VectorXd probs;
  int own = -1;
  Index own_pos = -1;
  SpdFactorization own_diminished;
  std::vector<VectorXd> cross;  // correlations with each cluster's remaining members
};

double variance_floor(const GpParams& p) {
  return p.sigma2 * std::max(p.corr.nugget, 1e-12);
}

PointEvaluation evaluate_point(const ClusterState& s, Index i) {
  const Dataset& data = *s.data;
  const int k_count = s.num_clusters();
  const double* xi = data.x.row(i).data();
  const double yi = data.y[i];

  PointEvaluation ev;
  ev.own = s.labels[i];
  ev.log_weights.resize(k_count);
  ev.cross.resize(k_count);
  const VectorXd log_g = s.gating.log_probabilities(xi);

  for (int k = 0; k < k_count; ++k) {
    const ClusterCache& c = s.clusters[k];
    const GpParams& p = c.params;
    const MatrixXd* q = &c.fact.inverse();
    std::vector<int> rest;
    std::span<const int> others(c.members);
    if (k == ev.own) {
      const auto it = std::find(c.members.begin(), c.members.end(), static_cast<int>(i));
      ev.own_pos = it - c.members.begin();
      ev.own_diminished = c.fact.diminished(ev.own_pos);
      q = &ev.own_diminished.inverse();
      rest.reserve(c.members.size() - 1);
      for (int m : c.members) {
        if (m != static_cast<int>(i)) rest.push_back(m);
      }
      others = rest;
    }

    VectorXd r = corr_vector(data.x, others, xi, p.corr);
    const VectorXd u = *q * r;
    double resid_dot = 0.0;
    for (Index j = 0; j < r.size(); ++j) resid_dot += u[j] * (data.y[others[j]] - p.mu);
    const double mean = p.mu + resid_dot;
    double var = p.sigma2 * (1.0 + p.corr.nugget - r.dot(u));
    var = std::max(var, variance_floor(p));

    const double z = yi - mean;
    ev.log_weights[k] =
        log_g[k] - 0.5 * std::log(2.0 * std::numbers::pi * var) - 0.5 * z * z / var;
    ev.cross[k] = std::move(r);
  }

  const double m = ev.log_weights.maxCoeff();
  if (!std::isfinite(m)) {
    ev.probs = VectorXd::Zero(k_count);
    ev.probs[ev.own] = 1.0;
  } else {
    ev.probs = (ev.log_weights.array() - m).exp();
    ev.probs /= ev.probs.sum();
  }
  return ev;
}

int draw_category(const VectorXd& probs, Rng& rng) {
  const double u = uniform01(rng);
  double acc = 0.0;
  const int k = static_cast<int>(probs.size());
  for (int c = 0; c < k; ++c) {
    acc += probs[c];
    if (u < acc) return c;
  }
  for (int c = k - 1; c >= 0; --c) {
    if (probs[c] > 0.0) return c;
  }
  return k - 1;
}

void maybe_refactor(const Dataset& data, ClusterCache& c, int refactor_every) {
  if (c.fact.updates_since_build() >= refactor_every) {
    c.fact = factorize(corr_matrix(data.x, c.members, c.params.corr));
  }
}

Eigen::RowVectorXd centroid(const Points& x, const std::vector<int>& rows) {
  Eigen::RowVectorXd c = Eigen::RowVectorXd::Zero(x.cols());
  for (int i : rows) c += x.row(i);
  return c / static_cast<double>(rows.size());
}

/// Merges clusters with fewer than two members into their nearest neighbour
/// by centroid and renumbers the rest contiguously.
void repair_degenerate(ClusterState& s, MStepReport& report) {
  while (s.num_clusters() > 1) {
    int bad = -1;
    for (int k = 0; k < s.num_clusters(); ++k) {
      if (s.clusters[k].members.size() < 2) {
        bad = k;
        break;
      }
    }
    if (bad < 0) return;

    auto& victims = s.clusters[bad].members;
    int target = -1;
    if (!victims.empty()) {
      const auto cb = centroid(s.data->x, victims);
      double best = std::numeric_limits<double>::infinity();
      for (int k = 0; k < s.num_clusters(); ++k) {
        if (k == bad || s.clusters[k].members.empty()) continue;
        const double d = (centroid(s.data->x, s.clusters[k].members) - cb).squaredNorm();
        if (d < best) {
          best = d;
          target = k;
        }
      }
    }
    report.events.push_back("iteration " + std::to_string(s.iteration) + ": cluster " +
                            std::to_string(bad) + " with " + std::to_string(victims.size()) +
                            " member(s) merged" +
                            (target >= 0 ? " into cluster " + std::to_string(target) : ""));
    if (target >= 0) {
      auto& dst = s.clusters[target].members;
      dst.insert(dst.end(), victims.begin(), victims.end());
    }
    s.clusters.erase(s.clusters.begin() + bad);
    for (int k = 0; k < s.num_clusters(); ++k) {
      for (int i : s.clusters[k].members) s.labels[i] = k;
    }
    s.gating = GatingModel(s.num_clusters(), s.data->dim());
  }
}

}  // namespace

VectorXd assignment_probs(const ClusterState& state, Index i) {
  if (i < 0 || i >= state.data->size()) fail(ErrorCode::kInvalidArgument, "point index");
  return evaluate_point(state, i).probs;
}

EStepStats stochastic_e_step(ClusterState& state, Rng& rng, const SemConfig& config) {
  const Dataset& data = *state.data;
  const Index n = data.size();
  const int min_size = config.effective_min_size(data.dim());

  std::vector<Index> order(n);
  for (Index i = 0; i < n; ++i) order[i] = i;
  if (config.shuffle_sweep) shuffle(order.begin(), order.end(), rng);

  EStepStats stats;
  for (Index i : order) {
    PointEvaluation ev = evaluate_point(state, i);
    const int from = ev.own;
    const int to = draw_category(ev.probs, rng);
    if (to == from) continue;

    ClusterCache& src = state.clusters[from];
    ClusterCache& dst = state.clusters[to];
    const bool too_small = static_cast<int>(src.members.size()) - 1 < min_size;
    const bool too_full =
        config.n_max && static_cast<int>(dst.members.size()) + 1 > *config.n_max;
    if (too_small || too_full) {
      ++stats.redirected;
      continue;
    }
    SpdFactorization grown;
    try {
      grown = dst.fact.augmented(ev.cross[to], 1.0 + dst.params.corr.nugget);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNonpositiveSchurComplement) throw;
      ++stats.redirected;
      continue;
    }
    src.fact = std::move(ev.own_diminished);
    src.members.erase(src.members.begin() + ev.own_pos);
    dst.fact = std::move(grown);
    dst.members.push_back(static_cast<int>(i));
    state.labels[i] = to;
    maybe_refactor(data, src, config.refactor_every);
    maybe_refactor(data, dst, config.refactor_every);
    ++stats.switches;
  }
  return stats;
}

GpFitOptions gp_options(const SemConfig& config, const GammaBounds& bounds) {
  GpFitOptions o;
  o.power = config.power;
  o.nugget = config.nugget;
  o.starts = config.gp_starts;
  o.max_evals_per_start = config.gp_max_evals;
  o.bounds = bounds;
  return o;
}

MStepReport m_step(ClusterState& state, const SemConfig& config, HyperSearch search) {
  MStepReport report;
  repair_degenerate(state, report);

  const Dataset& data = *state.data;
  const GammaBounds bounds =
      config.gamma_bounds ? *config.gamma_bounds : GammaBounds::from_ranges(data.x);
  const int k_count = state.num_clusters();

  std::vector<ClusterCache> refit(k_count);
  std::vector<int> warnings(k_count, 0);
  parallel_for(static_cast<std::size_t>(k_count), config.threads, [&](std::size_t kk) {
    const int k = static_cast<int>(kk);
    const ClusterCache& old = state.clusters[k];
    ClusterCache& c = refit[k];
    c.members = old.members;
    std::sort(c.members.begin(), c.members.end());
    Dataset sub = subset(data, c.members);

    const bool have_gamma = old.params.corr.gamma.size() == data.dim();
    if (search == HyperSearch::kProfileOnly && have_gamma) {
      CorrelationSpec spec = old.params.corr;
      spec.nugget = config.nugget;
      spec.power = config.power;
      const ProfileEstimate est = profile_likelihood(sub.x, sub.y, spec);
      c.params = GpParams{est.mu, est.sigma2, spec};
      c.fact = factorize(corr_matrix(sub.x, spec));
      return;
    }
    GpFitOptions opts = gp_options(config, bounds);
    if (search == HyperSearch::kWarmLocal && have_gamma) {
      opts.init_gamma = old.params.corr.gamma;
      opts.local_only = true;
    }
    FittedGp gp = fit_gp(std::move(sub.x), std::move(sub.y), opts);
    warnings[k] = gp.optimizer_warning() ? 1 : 0;
    c.params = gp.params();
    c.fact = gp.factorization();
  });
  for (int w : warnings) report.optimizer_warnings += w;
  state.clusters = std::move(refit);

  GatingFitOptions gopts;
  gopts.ridge = config.ridge * static_cast<double>(data.size());
  gopts.warm_start = &state.gating;
  state.gating = fit_gating(data.x, state.labels, k_count, gopts);
  return report;
}

double loocv_rmse(const ClusterState& state) {
  const Dataset& data = *state.data;
  const Index n = data.size();
  const int k_count = state.num_clusters();

  // held_out(i, k): cluster k's mean at x_i without observation i.
  MatrixXd held_out(n, k_count);
  for (int k = 0; k < k_count; ++k) {
    const ClusterCache& c = state.clusters[k];
    const GpParams& p = c.params;
    const MatrixXd& q = c.fact.inverse();
    VectorXd resid(static_cast<Index>(c.members.size()));
    for (Index j = 0; j < resid.size(); ++j) resid[j] = data.y[c.members[j]] - p.mu;
    const VectorXd w = q * resid;

    std::vector<char> member(n, 0);
    for (Index j = 0; j < resid.size(); ++j) {
      const int i = c.members[j];
      member[i] = 1;
      held_out(i, k) = p.mu - (w[j] - q(j, j) * resid[j]) / q(j, j);
    }
    for (Index i = 0; i < n; ++i) {
      if (member[i]) continue;
      const VectorXd r = corr_vector(data.x, c.members, data.x.row(i).data(), p.corr);
      held_out(i, k) = p.mu + r.dot(w);
    }
  }

  double sse = 0.0;
  for (Index i = 0; i < n; ++i) {
    const VectorXd g = state.gating.probabilities(data.x.row(i).data());
    const double e = data.y[i] - held_out.row(i).dot(g);
    sse += e * e;
  }
  return std::sqrt(sse / static_cast<double>(n));
}

ClusteredGpModel ClusteredGpModel::assemble(Dataset data, InputScaling scaling,
                                            std::vector<int> labels,
                                            std::vector<GpParams> params, GatingModel gating,
                                            FitInfo info) {
  validate_dataset(data);
  if (static_cast<Index>(labels.size()) != data.size()) {
    fail(ErrorCode::kDimensionMismatch, "labels and data differ in length");
  }
  if (gating.num_classes() != static_cast<int>(params.size())) {
    fail(ErrorCode::kDimensionMismatch, "gating and cluster counts differ");
  }
  ClusteredGpModel m;
  const Points xs = scaling.apply(data.x);
  const int k_count = static_cast<int>(params.size());
  std::vector<std::vector<int>> rows(k_count);
  for (Index i = 0; i < data.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= k_count) fail(ErrorCode::kInvalidArgument, "label range");
    rows[labels[i]].push_back(static_cast<int>(i));
  }
  for (int k = 0; k < k_count; ++k) {
    if (rows[k].empty()) fail(ErrorCode::kInvalidArgument, "cluster without members");
    Points xk(static_cast<Index>(rows[k].size()), xs.cols());
    VectorXd yk(static_cast<Index>(rows[k].size()));
    for (Index j = 0; j < xk.rows(); ++j) {
      xk.row(j) = xs.row(rows[k][j]);
      yk[j] = data.y[rows[k][j]];
    }
    m.clusters_.push_back(FittedGp::from_params(std::move(xk), std::move(yk), params[k]));
  }
  m.data_ = std::move(data);
  m.scaling_ = std::move(scaling);
  m.labels_ = std::move(labels);
  m.gating_ = std::move(gating);
  m.info_ = info;
  return m;
}

std::vector<int> ClusteredGpModel::members(int k) const {
  std::vector<int> out;
  for (Index i = 0; i < static_cast<Index>(labels_.size()); ++i) {
    if (labels_[i] == k) out.push_back(static_cast<int>(i));
  }
  return out;
}

double loocv_rmse(const ClusteredGpModel& model) {
  const Dataset& data = model.data();
  const Index n = data.size();
  const Points xs = model.scaling().apply(data.x);
  MatrixXd held_out(n, model.num_clusters());
  for (int k = 0; k < model.num_clusters(); ++k) {
    const FittedGp& gp = model.clusters()[k];
    const VectorXd loo = gp.loocv_means();
    std::vector<char> member(n, 0);
    const std::vector<int> rows = model.members(k);
    for (std::size_t j = 0; j < rows.size(); ++j) {
      member[rows[j]] = 1;
      held_out(rows[j], k) = loo[static_cast<Index>(j)];
    }
    for (Index i = 0; i < n; ++i) {
      if (!member[i]) held_out(i, k) = gp.predict(xs.row(i).data()).mean;
    }
  }
  double sse = 0.0;
  for (Index i = 0; i < n; ++i) {
    const VectorXd g = model.gating().probabilities(xs.row(i).data());
    const double e = data.y[i] - held_out.row(i).dot(g);
    sse += e * e;
  }
  return std::sqrt(sse / static_cast<double>(n));
}

namespace {

struct Snapshot {
  std::vector<int> labels;
  std::vector<GpParams> params;
  GatingModel gating;
};

Snapshot snapshot(const ClusterState& s) {
  Snapshot snap{s.labels, {}, s.gating};
  for (const auto& c : s.clusters) snap.params.push_back(c.params);
  return snap;
}

std::vector<std::uint16_t> compact(const std::vector<int>& labels) {
  return {labels.begin(), labels.end()};
}

constexpr std::uint64_t kSweepStream = 0xd1b54a32d192ed03ULL;

}  // namespace

ClusteredFit fit_clustered_gp(const Dataset& data, int num_clusters, const SemConfig& config) {
  validate_dataset(data);
  const Index n = data.size();
  const int min_size = config.effective_min_size(data.dim());
  if (num_clusters < 1) fail(ErrorCode::kInfeasibleK, "K must be >= 1");
  if (n < static_cast<Index>(num_clusters) * std::max(min_size, 2)) {
    fail(ErrorCode::kInfeasibleK,
         "K = " + std::to_string(num_clusters) + " needs n >= " +
             std::to_string(num_clusters * std::max(min_size, 2)) + " (minimum cluster size " +
             std::to_string(min_size) + "), got n = " + std::to_string(n));
  }
  if (num_clusters > 65535) fail(ErrorCode::kInfeasibleK, "K too large");

  InputScaling scaling =
      config.normalize_inputs ? InputScaling::fit(data.x) : InputScaling::identity(data.dim());
  auto norm = std::make_shared<Dataset>(Dataset{scaling.apply(data.x), data.y});

  KMeansResult km = kmeans(norm->x, num_clusters, config.seed);
  enforce_min_cluster_size(norm->x, km.labels, num_clusters, min_size);

  ClusterState state = make_state(norm, std::move(km.labels), num_clusters);
  SemTrace trace;
  MStepReport rep = m_step(state, config, HyperSearch::kFull);
  trace.events.insert(trace.events.end(), rep.events.begin(), rep.events.end());

  double best = loocv_rmse(state);
  trace.loocv_rmse.push_back(best);
  trace.switches.push_back(0);
  trace.redirected.push_back(0);
  trace.assignments.push_back(compact(state.labels));
  Snapshot best_snap = snapshot(state);

  // With one cluster there is nothing to sample: the sweep and refit are
  // fixed points, so the initial fit is the answer.
  if (state.num_clusters() > 1) {
    Rng rng(config.seed ^ kSweepStream);
    for (int it = 1; it <= config.max_iter; ++it) {
      state.iteration = it;
      const EStepStats es = stochastic_e_step(state, rng, config);
      const HyperSearch search = (config.refit_every <= 1 || it % config.refit_every == 0)
                                     ? HyperSearch::kWarmLocal
                                     : HyperSearch::kProfileOnly;
      rep = m_step(state, config, search);
      trace.events.insert(trace.events.end(), rep.events.begin(), rep.events.end());

      const double rmse = loocv_rmse(state);
      trace.loocv_rmse.push_back(rmse);
      trace.switches.push_back(es.switches);
      trace.redirected.push_back(es.redirected);
      trace.assignments.push_back(compact(state.labels));
      if (rmse < best) {
        best = rmse;
        trace.best_iteration = it;
        best_snap = snapshot(state);
      }
      if (it - trace.best_iteration >= config.patience) break;
      if (state.num_clusters() == 1) break;
    }
  }

  FitInfo info;
  info.seed = config.seed;
  info.iterations = static_cast<int>(trace.loocv_rmse.size()) - 1;
  info.best_iteration = trace.best_iteration;
  info.best_loocv_rmse = best;
  ClusteredGpModel model =
      ClusteredGpModel::assemble(data, std::move(scaling), std::move(best_snap.labels),
                                 std::move(best_snap.params), std::move(best_snap.gating), info);
  return ClusteredFit{std::move(model), std::move(trace)};
}

StationaryFit fit_stationary_gp(const Dataset& data, const SemConfig& config) {
  validate_dataset(data);
  InputScaling scaling =
      config.normalize_inputs ? InputScaling::fit(data.x) : InputScaling::identity(data.dim());
  Points xs = scaling.apply(data.x);
  const GammaBounds bounds =
      config.gamma_bounds ? *config.gamma_bounds : GammaBounds::from_ranges(xs);
  FittedGp gp = fit_gp(std::move(xs), data.y, gp_options(config, bounds));
  return StationaryFit{std::move(scaling), std::move(gp)};
}

const ClusteredFit& SelectKResult::best() const {
  for (std::size_t j = 0; j < grid.size(); ++j) {
    if (grid[j] == best_k) return fits[j];
  }
  fail(ErrorCode::kInvalidArgument, "empty K grid");
}

SelectKResult select_k(const Dataset& data, std::vector<int> grid, const SemConfig& config) {
  if (grid.empty()) fail(ErrorCode::kInvalidArgument, "empty K grid");
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  SelectKResult out;
  out.grid = grid;
  double best = std::numeric_limits<double>::infinity();
  for (int k : grid) {
    out.fits.push_back(fit_clustered_gp(data, k, config));
    const double v = out.fits.back().model.info().best_loocv_rmse;
    out.min_loocv_rmse.push_back(v);
    if (v < best) {
      best = v;
      out.best_k = k;
    }
  }
  return out;
}

}  // namespace cgp
