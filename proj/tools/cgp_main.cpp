// cgp: fit, predict, cross-validate and benchmark clustered Gaussian process
// models from the command line.

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cgp/bench.hpp"
#include "cgp/csv.hpp"
#include "cgp/error.hpp"
#include "cgp/model_io.hpp"
#include "cgp/parallel.hpp"
#include "cgp/predict.hpp"
#include "cgp/sem.hpp"

namespace {

namespace fs = std::filesystem;

enum Exit : int { kOk = 0, kFailure = 1, kInputError = 2, kInfeasible = 3, kDegenerate = 4 };

int exit_code(cgp::ErrorCode code) {
  using cgp::ErrorCode;
  switch (code) {
    case ErrorCode::kInfeasibleK:
    case ErrorCode::kKTooLarge:
    case ErrorCode::kTooFewPoints:
      return kInfeasible;
    case ErrorCode::kDuplicatePoints:
      return kDegenerate;
    case ErrorCode::kNotPositiveDefinite:
    case ErrorCode::kNonpositiveSchurComplement:
    case ErrorCode::kSingletonSet:
    case ErrorCode::kEmptyClass:
      return kFailure;
    default:
      return kInputError;
  }
}

/// Files are written next to their destination and renamed into place only
/// after every output of the command has been produced.
class StagedOutputs {
 public:
  StagedOutputs() = default;
  StagedOutputs(const StagedOutputs&) = delete;
  StagedOutputs& operator=(const StagedOutputs&) = delete;
  ~StagedOutputs() {
    for (const auto& [tmp, dest] : files_) {
      std::error_code ec;
      fs::remove(tmp, ec);
    }
  }

  void add(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) cgp::fail(cgp::ErrorCode::kIo, "cannot write '" + tmp + "'");
    out << content;
    out.flush();
    if (!out) cgp::fail(cgp::ErrorCode::kIo, "write failed for '" + tmp + "'");
    files_.emplace_back(tmp, path);
  }

  void commit() {
    for (const auto& [tmp, dest] : files_) {
      std::error_code ec;
      fs::rename(tmp, dest, ec);
      if (ec) cgp::fail(cgp::ErrorCode::kIo, "cannot move output into '" + dest + "'");
    }
    files_.clear();
  }

 private:
  std::vector<std::pair<std::string, std::string>> files_;
};

std::string trace_csv(const cgp::SemTrace& trace) {
  std::ostringstream out;
  out << "iter,loocv_rmse,switches\n";
  for (std::size_t it = 0; it < trace.loocv_rmse.size(); ++it) {
    out << it << ',' << cgp::format_double(trace.loocv_rmse[it]) << ',' << trace.switches[it]
        << '\n';
  }
  return out.str();
}

struct FitArgs {
  std::string train;
  std::optional<int> k;
  std::vector<int> k_grid;
  int max_iter = 100;
  std::uint64_t seed = 0;
  double nugget = 1e-6;
  double ridge = 1e-4;
  int patience = 10;
  int threads = 0;
  std::string out = "model.json";
  std::string trace;
};

cgp::SemConfig sem_config(int max_iter, std::uint64_t seed, double nugget, double ridge,
                          int patience, int threads) {
  cgp::SemConfig c;
  c.max_iter = max_iter;
  c.seed = seed;
  c.nugget = nugget;
  c.ridge = ridge;
  c.patience = patience;
  c.threads = threads > 0 ? threads : cgp::default_thread_count();
  return c;
}

int run_fit(const FitArgs& a) {
  const cgp::Dataset data = cgp::read_dataset(a.train);
  cgp::validate_dataset(data);
  const cgp::SemConfig config =
      sem_config(a.max_iter, a.seed, a.nugget, a.ridge, a.patience, a.threads);

  std::optional<cgp::ClusteredFit> fit;
  if (!a.k_grid.empty()) {
    cgp::SelectKResult sel = cgp::select_k(data, a.k_grid, config);
    for (std::size_t j = 0; j < sel.grid.size(); ++j) {
      std::cout << "K=" << sel.grid[j] << " loocv_rmse=" << cgp::format_double(sel.min_loocv_rmse[j])
                << '\n';
    }
    const std::size_t best = static_cast<std::size_t>(
        std::find(sel.grid.begin(), sel.grid.end(), sel.best_k) - sel.grid.begin());
    fit = std::move(sel.fits[best]);
  } else {
    fit = cgp::fit_clustered_gp(data, a.k.value_or(2), config);
  }

  const std::string trace_path =
      a.trace.empty() ? (fs::path(a.out).parent_path() / "trace.csv").string() : a.trace;
  StagedOutputs outputs;
  outputs.add(a.out, cgp::model_to_json(fit->model));
  outputs.add(trace_path, trace_csv(fit->trace));
  outputs.commit();

  std::cout << "K=" << fit->model.num_clusters()
            << " best_loocv_rmse=" << cgp::format_double(fit->model.info().best_loocv_rmse)
            << " best_iteration=" << fit->model.info().best_iteration << '\n';
  return kOk;
}

struct PredictArgs {
  std::string model;
  std::string test;
  std::vector<double> quantiles{0.025, 0.975};
  std::string out = "pred.csv";
};

int run_predict(const PredictArgs& a) {
  for (double q : a.quantiles) {
    if (!(q > 0.0 && q < 1.0)) {
      cgp::fail(cgp::ErrorCode::kQOutOfRange, "quantile " + cgp::format_double(q) +
                                                  " outside (0, 1)");
    }
  }
  const cgp::ClusteredGpModel model = cgp::load_model(a.model);
  const cgp::Points x = cgp::inputs_from_table(cgp::read_csv(a.test), model.dim(), a.test);

  std::ostringstream out;
  for (cgp::Index l = 0; l < x.cols(); ++l) out << 'x' << (l + 1) << ',';
  out << "mean,variance";
  for (double q : a.quantiles) out << ",q_" << cgp::format_double(q);
  out << '\n';
  for (cgp::Index i = 0; i < x.rows(); ++i) {
    const cgp::VectorXd xi = x.row(i).transpose();
    const cgp::PredictiveMixture mix = cgp::predictive_mixture(model, xi);
    const cgp::MeanVariance mv = cgp::mixture_mean_var(mix);
    for (cgp::Index l = 0; l < x.cols(); ++l) out << cgp::format_double(xi[l]) << ',';
    out << cgp::format_double(mv.mean) << ',' << cgp::format_double(mv.variance);
    for (double q : a.quantiles) out << ',' << cgp::format_double(cgp::mixture_quantile(mix, q));
    out << '\n';
  }
  StagedOutputs outputs;
  outputs.add(a.out, out.str());
  outputs.commit();
  return kOk;
}

int run_loocv(const std::string& model_path) {
  const cgp::ClusteredGpModel model = cgp::load_model(model_path);
  std::cout << "K=" << model.num_clusters()
            << " loocv_rmse=" << cgp::format_double(cgp::loocv_rmse(model)) << '\n';
  return kOk;
}

struct BenchArgs {
  std::string fn;
  int n = 0;
  int ntest = 1000;
  std::vector<std::string> methods{"clustered", "stationary"};
  std::uint64_t seed = 0;
  std::optional<int> k;
  int max_iter = 100;
  int threads = 0;
  std::string out = "report.csv";
  std::string predictions;
};

int run_bench(const BenchArgs& a) {
  const cgp::TestFunction fn = cgp::test_function(a.fn);
  if (a.n < 2) cgp::fail(cgp::ErrorCode::kInvalidArgument, "--n must be >= 2");
  if (a.ntest < 1) cgp::fail(cgp::ErrorCode::kInvalidArgument, "--ntest must be >= 1");
  std::vector<cgp::Method> methods;
  for (const auto& m : a.methods) methods.push_back(cgp::parse_method(m));

  cgp::BenchConfig config;
  config.sem = sem_config(a.max_iter, a.seed, 1e-6, 1e-4, 10, a.threads);
  config.k = a.k;
  const auto runs = cgp::run_benchmark(fn, a.n, a.ntest, methods, config, a.seed);

  std::vector<cgp::BenchReport> reports;
  for (const auto& r : runs) reports.push_back(r.report);
  StagedOutputs outputs;
  std::ostringstream report;
  cgp::write_report_csv(report, reports);
  outputs.add(a.out, report.str());
  if (!a.predictions.empty()) {
    for (const auto& r : runs) {
      std::ostringstream pred;
      cgp::write_predictions_csv(pred, r.predictions);
      outputs.add(a.predictions + "_" + r.report.method + ".csv", pred.str());
    }
  }
  outputs.commit();
  std::cout << report.str();
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Clustered Gaussian process regression"};
  app.require_subcommand(1);

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a clustered GP to a training CSV");
  fit_cmd->add_option("train", fit.train, "Training CSV (features, then y)")->required();
  auto* k_opt = fit_cmd->add_option("--k", fit.k, "Number of clusters");
  fit_cmd->add_option("--k-grid", fit.k_grid, "Candidate K values; lowest LOOCV RMSE wins")
      ->delimiter(',')
      ->excludes(k_opt);
  fit_cmd->add_option("--max-iter", fit.max_iter, "SEM iterations")->capture_default_str();
  fit_cmd->add_option("--seed", fit.seed, "Random seed")->capture_default_str();
  fit_cmd->add_option("--nugget", fit.nugget, "Diagonal nugget")->capture_default_str();
  fit_cmd->add_option("--ridge", fit.ridge, "Gating ridge per observation")
      ->capture_default_str();
  fit_cmd->add_option("--patience", fit.patience, "Iterations without improvement")
      ->capture_default_str();
  fit_cmd->add_option("--threads", fit.threads, "Worker threads (default CGP_THREADS)");
  fit_cmd->add_option("--out", fit.out, "Model file")->capture_default_str();
  fit_cmd->add_option("--trace", fit.trace, "Trace CSV (default: trace.csv beside the model)");

  PredictArgs pred;
  auto* pred_cmd = app.add_subcommand("predict", "Predict from a saved model");
  pred_cmd->add_option("model", pred.model, "Model file")->required();
  pred_cmd->add_option("test", pred.test, "Test CSV with the model's feature columns")
      ->required();
  pred_cmd->add_option("--quantiles", pred.quantiles, "Predictive quantiles")
      ->delimiter(',')
      ->capture_default_str();
  pred_cmd->add_option("--out", pred.out, "Prediction CSV")->capture_default_str();

  std::string loocv_model;
  auto* loocv_cmd = app.add_subcommand("loocv", "Leave-one-out RMSE of a saved model");
  loocv_cmd->add_option("model", loocv_model, "Model file")->required();

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Run a synthetic benchmark");
  bench_cmd->add_option("--fn", bench.fn, "gramacy1d, xiong, montagna, wavy or borehole")
      ->required();
  bench_cmd->add_option("--n", bench.n, "Training size")->required();
  bench_cmd->add_option("--ntest", bench.ntest, "Test size")->capture_default_str();
  bench_cmd->add_option("--methods", bench.methods, "clustered, stationary")
      ->delimiter(',')
      ->capture_default_str();
  bench_cmd->add_option("--seed", bench.seed, "Random seed")->capture_default_str();
  bench_cmd->add_option("--k", bench.k, "Clusters for the clustered method");
  bench_cmd->add_option("--max-iter", bench.max_iter, "SEM iterations")->capture_default_str();
  bench_cmd->add_option("--threads", bench.threads, "Worker threads (default CGP_THREADS)");
  bench_cmd->add_option("--out", bench.out, "Report CSV")->capture_default_str();
  bench_cmd->add_option("--predictions", bench.predictions,
                        "Prefix for per-method prediction CSVs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInputError;
  }

  try {
    if (*fit_cmd) return run_fit(fit);
    if (*pred_cmd) return run_predict(pred);
    if (*loocv_cmd) return run_loocv(loocv_model);
    if (*bench_cmd) return run_bench(bench);
  } catch (const cgp::Error& e) {
    std::cerr << "cgp: " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "cgp: " << e.what() << '\n';
    return kFailure;
  }
  return kInputError;
}
