#include "ddlp/dataset.hpp"

#include <fstream>
#include <sstream>

namespace ddlp {

MatrixXd Dataset::stacked() const {
  MatrixXd S(n() + m(), length());
  S.topRows(n()) = X;
  S.bottomRows(m()) = U;
  return S;
}

void Dataset::validate() const {
  if (X.cols() < 1) throw std::invalid_argument("Dataset: length must be >= 1");
  if (U.cols() != X.cols() || Xplus.cols() != X.cols()) {
    throw std::invalid_argument("Dataset: X, U, Xplus must have the same column count");
  }
  if (Xplus.rows() != X.rows()) {
    throw std::invalid_argument("Dataset: Xplus rows must match X");
  }
}

Dataset collect_rollout(const ControlProblem& problem, const VectorXd& x0,
                        const MatrixXd& inputs, std::mt19937_64& rng) {
  const MatrixXd states = simulate(problem, x0, inputs, rng);
  const int T = static_cast<int>(inputs.cols());
  Dataset ds;
  ds.X = states.leftCols(T);
  ds.U = inputs;
  ds.Xplus = states.rightCols(T);
  return ds;
}

Dataset collect_targeted(const ControlProblem& problem, const MatrixXd& states,
                         const MatrixXd& inputs, std::mt19937_64& rng) {
  if (states.cols() != inputs.cols() || states.cols() < 1) {
    throw std::invalid_argument("collect_targeted: need matching, nonempty pair columns");
  }
  if (states.rows() != problem.n() || inputs.rows() != problem.m()) {
    throw std::invalid_argument("collect_targeted: pair dimensions must match problem");
  }
  const int T = static_cast<int>(states.cols());
  const bool noisy = !problem.deterministic();
  MatrixXd factor;
  if (noisy) factor = covariance_factor(problem.Sigma);
  const VectorXd zero = VectorXd::Zero(problem.n());

  Dataset ds;
  ds.X = states;
  ds.U = inputs;
  ds.Xplus.resize(problem.n(), T);
  for (int k = 0; k < T; ++k) {
    VectorXd xi = noisy ? VectorXd(factor * gaussian_vector(problem.n(), rng)) : zero;
    ds.Xplus.col(k) = step(problem, states.col(k), inputs.col(k), xi);
  }
  return ds;
}

MatrixXd hankel(const MatrixXd& inputs, int depth) {
  const int m = static_cast<int>(inputs.rows());
  const int T = static_cast<int>(inputs.cols());
  if (depth < 1 || T < depth) {
    throw std::invalid_argument("hankel: need T >= depth >= 1");
  }
  MatrixXd H(m * depth, T - depth + 1);
  for (int i = 0; i < depth; ++i)
    for (int j = 0; j < T - depth + 1; ++j)
      H.block(i * m, j, m, 1) = inputs.col(i + j);
  return H;
}

bool is_persistently_exciting(const MatrixXd& inputs, int order, double tol) {
  const int m = static_cast<int>(inputs.rows());
  const MatrixXd H = hankel(inputs, order);
  return numerical_rank(H, tol) == m * order;
}

bool rank_condition(const Dataset& dataset, double tol) {
  dataset.validate();
  return numerical_rank(dataset.stacked(), tol) == dataset.n() + dataset.m();
}

Dataset merge(std::span<const Dataset> datasets) {
  if (datasets.empty()) throw std::invalid_argument("merge: need at least one dataset");
  const int n = datasets[0].n();
  const int m = datasets[0].m();
  int total = 0;
  for (const Dataset& ds : datasets) {
    ds.validate();
    if (ds.n() != n || ds.m() != m) {
      throw std::invalid_argument("merge: inconsistent dataset dimensions");
    }
    total += ds.length();
  }
  Dataset out;
  out.X.resize(n, total);
  out.U.resize(m, total);
  out.Xplus.resize(n, total);
  int at = 0;
  for (const Dataset& ds : datasets) {
    out.X.middleCols(at, ds.length()) = ds.X;
    out.U.middleCols(at, ds.length()) = ds.U;
    out.Xplus.middleCols(at, ds.length()) = ds.Xplus;
    at += ds.length();
  }
  return out;
}

Dataset partition_and_average(const Dataset& dataset, int groups, int group_size) {
  dataset.validate();
  if (groups < 1 || group_size < 1 || dataset.length() != groups * group_size) {
    throw std::invalid_argument(
        "partition_and_average: dataset length must equal groups * group_size");
  }
  Dataset out;
  out.X.resize(dataset.n(), groups);
  out.U.resize(dataset.m(), groups);
  out.Xplus.resize(dataset.n(), groups);
  for (int g = 0; g < groups; ++g) {
    out.X.col(g) = dataset.X.middleCols(g * group_size, group_size).rowwise().mean();
    out.U.col(g) = dataset.U.middleCols(g * group_size, group_size).rowwise().mean();
    out.Xplus.col(g) =
        dataset.Xplus.middleCols(g * group_size, group_size).rowwise().mean();
  }
  return out;
}

SampleMeanTriple sample_mean(const Dataset& dataset) {
  dataset.validate();
  return SampleMeanTriple{dataset.X.rowwise().mean(), dataset.U.rowwise().mean(),
                          dataset.Xplus.rowwise().mean()};
}

void write_dataset_csv(const Dataset& dataset, const std::string& path) {
  dataset.validate();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_dataset_csv: cannot open " + path);
  for (int i = 0; i < dataset.n(); ++i) out << (i ? "," : "") << "x_" << (i + 1);
  for (int i = 0; i < dataset.m(); ++i) out << ",u_" << (i + 1);
  for (int i = 0; i < dataset.n(); ++i) out << ",xp_" << (i + 1);
  out << "\n";
  for (int k = 0; k < dataset.length(); ++k) {
    for (int i = 0; i < dataset.n(); ++i)
      out << (i ? "," : "") << format_double(dataset.X(i, k));
    for (int i = 0; i < dataset.m(); ++i) out << "," << format_double(dataset.U(i, k));
    for (int i = 0; i < dataset.n(); ++i)
      out << "," << format_double(dataset.Xplus(i, k));
    out << "\n";
  }
}

Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_dataset_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("read_dataset_csv: empty file " + path);
  }
  // Infer (n, m) from the header.
  int n = 0, m = 0;
  {
    std::stringstream ss(line);
    std::string tok;
    int nx = 0, nu = 0, nxp = 0;
    while (std::getline(ss, tok, ',')) {
      if (tok.rfind("xp_", 0) == 0) ++nxp;
      else if (tok.rfind("x_", 0) == 0) ++nx;
      else if (tok.rfind("u_", 0) == 0) ++nu;
      else throw std::runtime_error("read_dataset_csv: unexpected column '" + tok + "'");
    }
    if (nx == 0 || nx != nxp) throw std::runtime_error("read_dataset_csv: malformed header");
    n = nx;
    m = nu;
  }
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      size_t pos = 0;
      row.push_back(std::stod(tok, &pos));
    }
    if (static_cast<int>(row.size()) != 2 * n + m) {
      throw std::runtime_error("read_dataset_csv: wrong field count in row");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("read_dataset_csv: no data rows");
  Dataset ds;
  const int T = static_cast<int>(rows.size());
  ds.X.resize(n, T);
  ds.U.resize(m, T);
  ds.Xplus.resize(n, T);
  for (int k = 0; k < T; ++k) {
    for (int i = 0; i < n; ++i) ds.X(i, k) = rows[k][i];
    for (int i = 0; i < m; ++i) ds.U(i, k) = rows[k][n + i];
    for (int i = 0; i < n; ++i) ds.Xplus(i, k) = rows[k][n + m + i];
  }
  return ds;
}

}  // namespace ddlp
