#include "ddlp/io.hpp"

#include <chrono>
#include <fstream>

namespace ddlp {

namespace {
constexpr const char* kToolVersion = "ddlp 0.1.0";
}

MatrixXd matrix_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty()) {
    throw std::invalid_argument("matrix_from_json: expected a nonempty nested array");
  }
  const size_t rows = j.size();
  const size_t cols = j[0].size();
  MatrixXd M(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols) {
      throw std::invalid_argument("matrix_from_json: ragged rows");
    }
    for (size_t k = 0; k < cols; ++k) {
      M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = j[i][k].get<double>();
    }
  }
  return M;
}

nlohmann::json matrix_to_json(const MatrixXd& M) {
  nlohmann::json j = nlohmann::json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index k = 0; k < M.cols(); ++k) row.push_back(M(i, k));
    j.push_back(std::move(row));
  }
  return j;
}

ControlProblem problem_from_json(const nlohmann::json& j) {
  ControlProblem p;
  p.A = matrix_from_json(j.at("A"));
  p.B = matrix_from_json(j.at("B"));
  const int n = p.n();
  const int m = p.m();
  p.Sigma = j.contains("Sigma") ? matrix_from_json(j.at("Sigma"))
                                : MatrixXd::Zero(n, n);
  p.gamma = j.value("gamma", 0.95);
  p.cost = j.contains("L") ? StageCost(matrix_from_json(j.at("L")), n, m)
                           : StageCost::identity(n, m);
  p.validate();
  return p;
}

nlohmann::json problem_to_json(const ControlProblem& problem) {
  nlohmann::json j;
  j["A"] = matrix_to_json(problem.A);
  j["B"] = matrix_to_json(problem.B);
  j["Sigma"] = matrix_to_json(problem.Sigma);
  j["gamma"] = problem.gamma;
  j["L"] = matrix_to_json(problem.cost.L);
  return j;
}

CliConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("load_config: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("load_config: " + path + ": " + e.what());
  }

  CliConfig cfg;
  const nlohmann::json& sys = j.contains("system") ? j.at("system") : j;
  cfg.problem = problem_from_json(sys);
  cfg.seed = j.value("seed", std::uint64_t{1});

  cfg.experiment.problem = cfg.problem;
  cfg.experiment.seed = cfg.seed;
  if (j.contains("experiment")) {
    const nlohmann::json& e = j.at("experiment");
    cfg.experiment.n_observed = e.value("n_observed", cfg.experiment.n_observed);
    cfg.experiment.n_synthetic = e.value("n_synthetic", cfg.experiment.n_synthetic);
    cfg.experiment.batch_size = e.value("batch_size", cfg.experiment.batch_size);
    cfg.experiment.runs = e.value("runs", cfg.experiment.runs);
    cfg.experiment.alpha_scale = e.value("alpha_scale", cfg.experiment.alpha_scale);
    if (e.contains("reinit_grid")) {
      cfg.experiment.reinit_grid = e.at("reinit_grid").get<std::vector<int>>();
    }
    cfg.experiment.avg_groups = e.value("avg_groups", cfg.experiment.avg_groups);
    cfg.experiment.avg_synth_count =
        e.value("avg_synth_count", cfg.experiment.avg_synth_count);
    cfg.experiment.err_probe_rows =
        e.value("err_probe_rows", cfg.experiment.err_probe_rows);
    cfg.experiment.pi_iterations = e.value("pi_iterations", cfg.experiment.pi_iterations);
    cfg.experiment.pi_states_per_iter =
        e.value("pi_states_per_iter", cfg.experiment.pi_states_per_iter);
    cfg.experiment.pi_gain_tol = e.value("pi_gain_tol", cfg.experiment.pi_gain_tol);
  }

  cfg.explore_x0 = VectorXd::Zero(cfg.problem.n());
  if (j.contains("explore")) {
    const nlohmann::json& e = j.at("explore");
    cfg.explore_length = e.value("length", cfg.explore_length);
    cfg.explore_input_scale = e.value("input_scale", cfg.explore_input_scale);
    if (e.contains("x0")) {
      const auto x0 = e.at("x0").get<std::vector<double>>();
      if (static_cast<int>(x0.size()) != cfg.problem.n()) {
        throw std::invalid_argument("load_config: explore.x0 has wrong length");
      }
      cfg.explore_x0 = Eigen::Map<const VectorXd>(x0.data(), cfg.problem.n());
    }
  }
  if (j.contains("synth")) {
    cfg.synth_count = j.at("synth").value("count", cfg.synth_count);
  }
  if (j.contains("targeted")) {
    const nlohmann::json& t = j.at("targeted");
    cfg.targeted_states = matrix_from_json(t.at("states"));
    cfg.targeted_inputs = matrix_from_json(t.at("inputs"));
    if (cfg.targeted_states.rows() != cfg.problem.n() ||
        cfg.targeted_inputs.rows() != cfg.problem.m() ||
        cfg.targeted_states.cols() != cfg.targeted_inputs.cols()) {
      throw std::invalid_argument("load_config: targeted pairs have wrong shape");
    }
  }
  return cfg;
}

std::string iso8601_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm_utc{};
  gmtime_r(&t, &tm_utc);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

RunManifest::RunManifest() : started_at(iso8601_now()), tool_version(kToolVersion) {}

void RunManifest::finish_and_write(const std::string& path) {
  finished_at = iso8601_now();
  nlohmann::json j;
  j["command"] = command;
  j["config"] = config_path;
  j["seed"] = seed;
  j["outputs"] = outputs;
  j["started_at"] = started_at;
  j["finished_at"] = finished_at;
  j["tool_version"] = tool_version;
  if (!extra.is_null()) j["extra"] = extra;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("RunManifest: cannot open " + path);
  out << j.dump(2) << "\n";
}

}  // namespace ddlp
