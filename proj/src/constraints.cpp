#include "ddlp/constraints.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace ddlp {

namespace {

int half_vec_dim_to_p(Eigen::Index len) {
  const int p = static_cast<int>((std::sqrt(8.0 * static_cast<double>(len) + 1.0) - 1.0) / 2.0 + 0.5);
  if (static_cast<Eigen::Index>(p) * (p + 1) / 2 != len) {
    throw std::invalid_argument("half-vec: length is not p(p+1)/2");
  }
  return p;
}

double clamp_cost(double c) {
  if (c < -1e-12) {
    throw std::invalid_argument("stage cost evaluation is negative: " + format_double(c));
  }
  return std::max(c, 0.0);
}

}  // namespace

VectorXd sym_half_vec(const MatrixXd& M) {
  if (M.rows() != M.cols()) throw std::invalid_argument("sym_half_vec: M must be square");
  const int p = static_cast<int>(M.rows());
  VectorXd v(p * (p + 1) / 2);
  int k = 0;
  for (int i = 0; i < p; ++i)
    for (int j = i; j < p; ++j) v(k++) = M(i, j);
  return v;
}

MatrixXd sym_from_half_vec(const VectorXd& v) {
  const int p = half_vec_dim_to_p(v.size());
  MatrixXd M(p, p);
  int k = 0;
  for (int i = 0; i < p; ++i)
    for (int j = i; j < p; ++j) {
      M(i, j) = v(k);
      M(j, i) = v(k);
      ++k;
    }
  return M;
}

std::string provenance_name(Provenance p) {
  switch (p) {
    case Provenance::Observed: return "observed";
    case Provenance::Synthetic: return "synthetic";
    case Provenance::ReinitAverage: return "reinit-average";
    case Provenance::DatasetAverage: return "dataset-average";
  }
  throw std::logic_error("provenance_name: unknown value");
}

Provenance provenance_from_name(const std::string& name) {
  if (name == "observed") return Provenance::Observed;
  if (name == "synthetic") return Provenance::Synthetic;
  if (name == "reinit-average") return Provenance::ReinitAverage;
  if (name == "dataset-average") return Provenance::DatasetAverage;
  throw std::invalid_argument("unknown provenance '" + name + "'");
}

int ConstraintRow::n() const { return half_vec_dim_to_p(coeffs.size()); }

double ConstraintRow::evaluate(const MatrixXd& P) const {
  return coeffs.dot(sym_half_vec(P));
}

MatrixXd row_coefficient_matrix(const ConstraintRow& row) {
  MatrixXd H = sym_from_half_vec(row.coeffs);
  const int p = static_cast<int>(H.rows());
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j)
      if (i != j) H(i, j) *= 0.5;
  return H;
}

MatrixXd h_matrix(const ControlProblem& problem, const VectorXd& x, const VectorXd& u) {
  const VectorXd xnext = problem.A * x + problem.B * u;
  return x * x.transpose() - problem.gamma * xnext * xnext.transpose();
}

MatrixXd g_matrix(const ControlProblem& problem, const VectorXd& x,
                  const VectorXd& u, const VectorXd& xi) {
  const VectorXd xnext = problem.A * x + problem.B * u + xi;
  return x * x.transpose() - problem.gamma * xnext * xnext.transpose();
}

MatrixXd expected_g(const ControlProblem& problem, const VectorXd& x, const VectorXd& u) {
  return h_matrix(problem, x, u) - problem.gamma * problem.Sigma;
}

VectorXd solve_alpha(const Dataset& dataset, const VectorXd& x, const VectorXd& u,
                     double tol) {
  dataset.validate();
  if (!rank_condition(dataset)) {
    throw RankError("solve_alpha: dataset violates rank condition rank[X;U] = n+m");
  }
  const MatrixXd S = dataset.stacked();
  VectorXd z(dataset.n() + dataset.m());
  z << x, u;
  Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(S);
  const VectorXd alpha = cod.solve(z);
  const double residual = (S * alpha - z).norm();
  if (residual > tol * (1.0 + z.norm())) {
    throw InconsistentDataError("solve_alpha: residual " + format_double(residual) +
                                " exceeds tolerance");
  }
  return alpha;
}

MatrixXd synth_h(const Dataset& dataset, const VectorXd& alpha, double gamma) {
  dataset.validate();
  if (alpha.size() != dataset.length()) {
    throw std::invalid_argument("synth_h: alpha length must equal dataset length");
  }
  const VectorXd xa = dataset.X * alpha;
  const VectorXd xpa = dataset.Xplus * alpha;
  return xa * xa.transpose() - gamma * xpa * xpa.transpose();
}

ConstraintRow make_row(const MatrixXd& H, double rhs, Provenance provenance,
                       std::optional<std::pair<VectorXd, VectorXd>> source) {
  if (H.rows() != H.cols()) throw std::invalid_argument("make_row: H must be square");
  if (rhs < 0.0) {
    throw std::invalid_argument("make_row: rhs must be nonnegative (got " +
                                format_double(rhs) + ")");
  }
  MatrixXd doubled = H + H.transpose();  // symmetrize and double in one pass
  doubled.diagonal() = 0.5 * doubled.diagonal();
  ConstraintRow row;
  row.coeffs = sym_half_vec(doubled);
  row.rhs = rhs;
  row.provenance = provenance;
  row.source = std::move(source);
  return row;
}

CostFn cost_fn(const StageCost& cost) {
  return [cost](const VectorXd& x, const VectorXd& u) {
    return stage_cost_eval(cost, x, u);
  };
}

std::vector<ConstraintRow> synth_random_rows(const Dataset& dataset,
                                             const CostFn& cost, double gamma,
                                             int count, std::mt19937_64& rng,
                                             double alpha_scale) {
  if (count < 0) throw std::invalid_argument("synth_random_rows: count must be >= 0");
  std::vector<ConstraintRow> rows;
  rows.reserve(count);
  const MatrixXd S = dataset.stacked();
  for (int k = 0; k < count; ++k) {
    const VectorXd alpha = alpha_scale * gaussian_vector(dataset.length(), rng);
    const VectorXd z = S * alpha;
    const VectorXd x = z.head(dataset.n());
    const VectorXd u = z.tail(dataset.m());
    const double rhs = clamp_cost(cost(x, u));
    rows.push_back(make_row(synth_h(dataset, alpha, gamma), rhs,
                            Provenance::Synthetic, std::make_pair(x, u)));
  }
  return rows;
}

std::vector<ConstraintRow> synth_policy_rows(const Dataset& dataset,
                                             const PolicyGain& gain,
                                             const std::vector<VectorXd>& states,
                                             const CostFn& cost, double gamma) {
  std::vector<ConstraintRow> rows;
  rows.reserve(states.size());
  for (const VectorXd& x : states) {
    const VectorXd u = gain.K * x;
    const VectorXd alpha = solve_alpha(dataset, x, u);
    const double rhs = clamp_cost(cost(x, u));
    rows.push_back(make_row(synth_h(dataset, alpha, gamma), rhs,
                            Provenance::Synthetic, std::make_pair(x, u)));
  }
  return rows;
}

ConstraintRow observed_row(const VectorXd& x, const VectorXd& u,
                           const VectorXd& xplus, double gamma, double rhs) {
  const MatrixXd H = x * x.transpose() - gamma * xplus * xplus.transpose();
  return make_row(H, rhs, Provenance::Observed, std::make_pair(x, u));
}

ConstraintRow reinit_average_row(const ControlProblem& problem, const VectorXd& x,
                                 const VectorXd& u, int N, std::mt19937_64& rng) {
  if (N < 1) throw std::invalid_argument("reinit_average_row: N must be >= 1");
  MatrixXd factor;
  const bool noisy = !problem.deterministic();
  if (noisy) factor = covariance_factor(problem.Sigma);
  MatrixXd mean = MatrixXd::Zero(problem.n(), problem.n());
  const VectorXd zero = VectorXd::Zero(problem.n());
  for (int k = 0; k < N; ++k) {
    VectorXd xi = noisy ? VectorXd(factor * gaussian_vector(problem.n(), rng)) : zero;
    mean += g_matrix(problem, x, u, xi);
  }
  mean /= static_cast<double>(N);
  const double rhs = clamp_cost(stage_cost_eval(problem.cost, x, u));
  return make_row(mean, rhs, Provenance::ReinitAverage, std::make_pair(x, u));
}

ConstraintRow mean_transition_row(const SampleMeanTriple& triple, double gamma,
                                  double rhs) {
  const MatrixXd H = triple.x_bar * triple.x_bar.transpose() -
                     gamma * triple.xplus_bar * triple.xplus_bar.transpose();
  return make_row(H, rhs, Provenance::DatasetAverage,
                  std::make_pair(triple.x_bar, triple.u_bar));
}

void write_rows_csv(const std::vector<ConstraintRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_rows_csv: cannot open " + path);
  const int dim = rows.empty() ? 0 : static_cast<int>(rows[0].coeffs.size());
  for (int i = 0; i < dim; ++i) out << "c_" << (i + 1) << ",";
  out << "rhs,provenance\n";
  for (const ConstraintRow& row : rows) {
    if (row.coeffs.size() != dim) {
      throw std::invalid_argument("write_rows_csv: inconsistent row dimensions");
    }
    for (int i = 0; i < dim; ++i) out << format_double(row.coeffs(i)) << ",";
    out << format_double(row.rhs) << "," << provenance_name(row.provenance) << "\n";
  }
}

std::vector<ConstraintRow> read_rows_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_rows_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("read_rows_csv: empty file");
  int dim = 0;
  {
    std::stringstream ss(line);
    std::string tok;
    bool saw_rhs = false, saw_prov = false;
    while (std::getline(ss, tok, ',')) {
      if (tok.rfind("c_", 0) == 0) ++dim;
      else if (tok == "rhs") saw_rhs = true;
      else if (tok == "provenance") saw_prov = true;
      else throw std::runtime_error("read_rows_csv: unexpected column '" + tok + "'");
    }
    if (!saw_rhs || !saw_prov) throw std::runtime_error("read_rows_csv: malformed header");
  }
  std::vector<ConstraintRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string tok;
    ConstraintRow row;
    row.coeffs.resize(dim);
    for (int i = 0; i < dim; ++i) {
      if (!std::getline(ss, tok, ',')) {
        throw std::runtime_error("read_rows_csv: truncated row");
      }
      row.coeffs(i) = std::stod(tok);
    }
    if (!std::getline(ss, tok, ',')) throw std::runtime_error("read_rows_csv: missing rhs");
    row.rhs = std::stod(tok);
    if (!std::getline(ss, tok, ',')) throw std::runtime_error("read_rows_csv: missing provenance");
    row.provenance = provenance_from_name(tok);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace ddlp
