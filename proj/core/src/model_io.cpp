#include "cgp/model_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cgp/error.hpp"

namespace cgp {
namespace {

using nlohmann::json;

json vec(const VectorXd& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json rows(const Points& x) {
  json a = json::array();
  for (Index i = 0; i < x.rows(); ++i) a.push_back(vec(x.row(i).transpose()));
  return a;
}

json rows(const MatrixXd& x) {
  json a = json::array();
  for (Index i = 0; i < x.rows(); ++i) a.push_back(vec(x.row(i).transpose()));
  return a;
}

VectorXd to_vec(const json& a, Index expected, const char* what) {
  if (!a.is_array() || (expected >= 0 && static_cast<Index>(a.size()) != expected)) {
    fail(ErrorCode::kMalformedInput, std::string("model field '") + what + "' has wrong length");
  }
  VectorXd v(static_cast<Index>(a.size()));
  for (Index i = 0; i < v.size(); ++i) v[i] = a[static_cast<std::size_t>(i)].get<double>();
  return v;
}

template <class M>
M to_rows(const json& a, Index n, Index d, const char* what) {
  if (!a.is_array() || static_cast<Index>(a.size()) != n) {
    fail(ErrorCode::kMalformedInput, std::string("model field '") + what + "' has wrong length");
  }
  M m(n, d);
  for (Index i = 0; i < n; ++i) m.row(i) = to_vec(a[static_cast<std::size_t>(i)], d, what);
  return m;
}

}  // namespace

std::string model_to_json(const ClusteredGpModel& model) {
  json j;
  j["format"] = kModelFormat;
  j["version"] = kModelVersion;
  j["d"] = model.dim();
  j["K"] = model.num_clusters();
  j["input_scaling"] = {{"offset", vec(model.scaling().offset)},
                        {"scale", vec(model.scaling().scale)}};
  json clusters = json::array();
  for (int k = 0; k < model.num_clusters(); ++k) {
    const GpParams& p = model.clusters()[k].params();
    clusters.push_back({{"mu", p.mu},
                        {"sigma2", p.sigma2},
                        {"gamma", vec(p.corr.gamma)},
                        {"power", p.corr.power},
                        {"nugget", p.corr.nugget},
                        {"members", model.members(k)}});
  }
  j["clusters"] = std::move(clusters);
  j["gating"] = {{"intercepts", vec(model.gating().intercepts())},
                 {"slopes", rows(model.gating().slopes())}};
  j["data"] = {{"X", rows(model.data().x)}, {"y", vec(model.data().y)}};
  const FitInfo& info = model.info();
  j["fit"] = {{"seed", info.seed},
              {"iterations", info.iterations},
              {"best_iteration", info.best_iteration},
              {"best_loocv_rmse", info.best_loocv_rmse}};
  return j.dump(1) + "\n";
}

ClusteredGpModel model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::kMalformedInput, std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (!j.is_object() || !j.contains("format") || !j["format"].is_string()) {
      fail(ErrorCode::kMalformedInput, "model file has no format field");
    }
    const auto format = j["format"].get<std::string>();
    constexpr std::string_view prefix = "cgp-model/";
    if (!format.starts_with(prefix)) {
      fail(ErrorCode::kMalformedInput, "unrecognized model format '" + format + "'");
    }
    const int version = std::stoi(format.substr(prefix.size()));
    if (version > kModelVersion) {
      fail(ErrorCode::kUnsupportedVersion,
           "model format '" + format + "' is newer than supported '" + kModelFormat + "'");
    }
    if (version < 1) fail(ErrorCode::kMalformedInput, "bad model version");

    const Index d = j.at("d").get<Index>();
    const int num_clusters = j.at("K").get<int>();
    if (d < 1 || num_clusters < 1) fail(ErrorCode::kMalformedInput, "model d and K must be >= 1");

    const json& data_j = j.at("data");
    const Index n = static_cast<Index>(data_j.at("y").size());
    Dataset data;
    data.y = to_vec(data_j.at("y"), n, "data.y");
    data.x = to_rows<Points>(data_j.at("X"), n, d, "data.X");

    InputScaling scaling;
    scaling.offset = to_vec(j.at("input_scaling").at("offset"), d, "input_scaling.offset");
    scaling.scale = to_vec(j.at("input_scaling").at("scale"), d, "input_scaling.scale");

    const json& cl = j.at("clusters");
    if (!cl.is_array() || static_cast<int>(cl.size()) != num_clusters) {
      fail(ErrorCode::kMalformedInput, "model cluster count does not match K");
    }
    std::vector<int> labels(static_cast<std::size_t>(n), -1);
    std::vector<GpParams> params;
    for (int k = 0; k < num_clusters; ++k) {
      const json& c = cl[static_cast<std::size_t>(k)];
      GpParams p;
      p.mu = c.at("mu").get<double>();
      p.sigma2 = c.at("sigma2").get<double>();
      p.corr.gamma = to_vec(c.at("gamma"), d, "gamma");
      p.corr.power = c.at("power").get<double>();
      p.corr.nugget = c.at("nugget").get<double>();
      for (int i : c.at("members").get<std::vector<int>>()) {
        if (i < 0 || i >= n || labels[static_cast<std::size_t>(i)] != -1) {
          fail(ErrorCode::kMalformedInput, "cluster members do not partition the data");
        }
        labels[static_cast<std::size_t>(i)] = k;
      }
      params.push_back(std::move(p));
    }
    for (int z : labels) {
      if (z < 0) fail(ErrorCode::kMalformedInput, "cluster members do not partition the data");
    }

    const json& g = j.at("gating");
    VectorXd intercepts = to_vec(g.at("intercepts"), num_clusters - 1, "gating.intercepts");
    MatrixXd slopes = to_rows<MatrixXd>(g.at("slopes"), num_clusters - 1, d, "gating.slopes");

    FitInfo info;
    if (j.contains("fit")) {
      const json& f = j["fit"];
      info.seed = f.value("seed", std::uint64_t{0});
      info.iterations = f.value("iterations", 0);
      info.best_iteration = f.value("best_iteration", 0);
      info.best_loocv_rmse = f.value("best_loocv_rmse", 0.0);
    }
    return ClusteredGpModel::assemble(std::move(data), std::move(scaling), std::move(labels),
                                      std::move(params),
                                      GatingModel(std::move(intercepts), std::move(slopes)), info);
  } catch (const json::exception& e) {
    fail(ErrorCode::kMalformedInput, std::string("model file: ") + e.what());
  }
}

void save_model(const ClusteredGpModel& model, const std::string& path) {
  const std::string text = model_to_json(model);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::kIo, "cannot write '" + tmp + "'");
    out << text;
    out.flush();
    if (!out) fail(ErrorCode::kIo, "write failed for '" + tmp + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::remove(tmp.c_str());
    fail(ErrorCode::kIo, "cannot rename '" + tmp + "' to '" + path + "': " + ec.message());
  }
}

ClusteredGpModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

}  // namespace cgp
