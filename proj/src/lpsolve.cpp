#include "ddlp/lpsolve.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace ddlp {

namespace {

// Revised simplex working state for the dual LP
//   min cost'lambda  s.t.  M lambda (+ signed artificials) = rhs, lambda >= 0,
// with M = A' (d x nr). Column indices: [0, nr) structural, [nr, nr+d)
// artificial k with column sign_k * e_k.
struct DualSimplex {
  const MatrixXd& M;  // d x nr
  const VectorXd& rhs;
  VectorXd art_sign;  // d
  int nr = 0;
  int d = 0;

  std::vector<int> basis;      // d basic column indices
  std::vector<char> is_basic;  // over structural columns only
  Eigen::MatrixXd Binv;
  VectorXd xB;
  VectorXd pi;
  int iterations = 0;

  static constexpr double kPivotEps = 1e-9;

  DualSimplex(const MatrixXd& M_, const VectorXd& rhs_)
      : M(M_), rhs(rhs_), nr(static_cast<int>(M_.cols())), d(static_cast<int>(M_.rows())) {
    art_sign.resize(d);
    basis.resize(d);
    is_basic.assign(nr, 0);
    for (int k = 0; k < d; ++k) {
      art_sign(k) = rhs(k) >= 0.0 ? 1.0 : -1.0;
      basis[k] = nr + k;
    }
  }

  VectorXd column(int j) const {
    if (j < nr) return M.col(j);
    VectorXd e = VectorXd::Zero(d);
    e(j - nr) = art_sign(j - nr);
    return e;
  }

  void refactor(const VectorXd& cost_basic) {
    MatrixXd B(d, d);
    for (int i = 0; i < d; ++i) B.col(i) = column(basis[i]);
    Binv = B.lu().solve(MatrixXd::Identity(d, d));
    xB = Binv * rhs;
    pi = Binv.transpose() * cost_basic;
  }

  // Runs the simplex to optimality for the given phase. cost(j) is implied:
  // phase 1 charges artificials 1 and structural 0; phase 2 charges
  // structural columns `struct_cost` and artificials 0.
  void run(bool phase1, const VectorXd& struct_cost, int max_iter) {
    const double cost_scale =
        phase1 ? 1.0 : (1.0 + struct_cost.cwiseAbs().maxCoeff());
    const double rc_tol = 1e-9 * cost_scale;
    const int bland_after = 2000 + 2 * (nr + d);

    VectorXd cost_basic(d);
    while (true) {
      if (iterations > max_iter) {
        throw SolverError("solve_lp: simplex iteration cap exceeded");
      }
      for (int i = 0; i < d; ++i) {
        const int j = basis[i];
        cost_basic(i) = phase1 ? (j >= nr ? 1.0 : 0.0)
                               : (j < nr ? struct_cost(j) : 0.0);
      }
      refactor(cost_basic);

      // Price structural columns only; artificials never (re-)enter.
      VectorXd reduced = (phase1 ? VectorXd::Zero(nr).eval() : struct_cost) -
                         M.transpose() * pi;
      int entering = -1;
      const bool bland = iterations > bland_after;
      double best = -rc_tol;
      for (int j = 0; j < nr; ++j) {
        if (is_basic[j]) continue;
        if (reduced(j) < best) {
          entering = j;
          if (bland) break;
          best = reduced(j);
        }
      }
      if (entering < 0) return;  // optimal for this phase

      const VectorXd w = Binv * M.col(entering);
      int leave = -1;
      double t_min = std::numeric_limits<double>::infinity();
      for (int i = 0; i < d; ++i) {
        const bool art = basis[i] >= nr;
        double t = -1.0;
        if (w(i) > kPivotEps) {
          t = std::max(xB(i), 0.0) / w(i);
        } else if (!phase1 && art && w(i) < -kPivotEps && xB(i) <= kPivotEps) {
          t = 0.0;  // keep driven-out artificials at zero
        } else {
          continue;
        }
        if (t < t_min - 1e-15) {
          t_min = t;
          leave = i;
        } else if (t <= t_min + 1e-15 && leave >= 0) {
          const bool cur_art = basis[leave] >= nr;
          if (bland) {
            // Pure Bland tie-break for guaranteed termination.
            if (basis[i] < basis[leave]) leave = i;
          } else if ((art && !cur_art) || (art == cur_art && basis[i] < basis[leave])) {
            // Prefer ejecting artificials, then the smallest index.
            leave = i;
          }
        }
      }
      if (leave < 0) {
        // The dual is bounded below in both phases (phase 1 by zero, phase 2
        // by zero since b >= 0); reaching here is a numerical failure.
        throw SolverError("solve_lp: unbounded dual pivot (numerical failure)");
      }
      if (basis[leave] < nr) is_basic[basis[leave]] = 0;
      basis[leave] = entering;
      is_basic[entering] = 1;
      ++iterations;
    }
  }

  double objective(bool phase1, const VectorXd& struct_cost) const {
    double obj = 0.0;
    for (int i = 0; i < d; ++i) {
      const int j = basis[i];
      const double c = phase1 ? (j >= nr ? 1.0 : 0.0)
                              : (j < nr ? struct_cost(j) : 0.0);
      obj += c * xB(i);
    }
    return obj;
  }
};

}  // namespace

LPInstance build_lp(const std::vector<ConstraintRow>& rows, int n, bool include_e,
                    double gamma) {
  const int hv = n * (n + 1) / 2;
  LPInstance inst;
  inst.n = n;
  inst.include_e = include_e;
  inst.dim = hv + (include_e ? 1 : 0);

  inst.objective = VectorXd::Zero(inst.dim);
  int k = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) inst.objective(k++) = (i == j) ? 1.0 : 0.0;
  if (include_e) inst.objective(hv) = 1.0;

  inst.A.resize(static_cast<Eigen::Index>(rows.size()), inst.dim);
  inst.b.resize(static_cast<Eigen::Index>(rows.size()));
  inst.provenance.reserve(rows.size());
  for (size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].coeffs.size() != hv) {
      throw std::invalid_argument("build_lp: row dimension does not match n");
    }
    inst.A.row(static_cast<Eigen::Index>(r)).head(hv) = rows[r].coeffs.transpose();
    if (include_e) inst.A(static_cast<Eigen::Index>(r), hv) = 1.0 - gamma;
    inst.b(static_cast<Eigen::Index>(r)) = rows[r].rhs;
    inst.provenance.push_back(rows[r].provenance);
  }
  return inst;
}

LPSolution solve_lp(const LPInstance& inst, double tol) {
  const int d = inst.dim;
  const int nr = inst.rows();
  if (d < 1) throw std::invalid_argument("solve_lp: instance has no variables");

  // Row scaling to unit max-abs keeps pricing well conditioned; the primal
  // solution is invariant under it.
  MatrixXd As = inst.A;
  VectorXd bs = inst.b;
  for (int r = 0; r < nr; ++r) {
    const double s = As.row(r).cwiseAbs().maxCoeff();
    if (s > 0.0) {
      As.row(r) /= s;
      bs(r) /= s;
    }
  }

  const MatrixXd M = As.transpose();  // d x nr
  const VectorXd& c = inst.objective;

  DualSimplex simplex(M, c);
  const int max_iter = 50000 + 20 * (nr + d);

  // Phase 1: drive the artificials to zero.
  simplex.run(/*phase1=*/true, VectorXd(), max_iter);
  const double infeas = simplex.objective(true, VectorXd());
  LPSolution sol;
  sol.iterations = simplex.iterations;
  if (infeas > 1e-7 * (1.0 + c.cwiseAbs().maxCoeff())) {
    // Dual infeasible: the primal is unbounded, and the phase-1 multipliers
    // certify it (A pi <= 0, c'pi > 0).
    sol.status = LPStatus::Unbounded;
    VectorXd ray = simplex.pi;
    const double norm = ray.norm();
    if (norm > 0.0) ray /= norm;
    sol.ray = ray;
    sol.objective_value = std::numeric_limits<double>::infinity();
    return sol;
  }

  // Phase 2: minimize b'lambda; the optimal multipliers are the primal point.
  simplex.run(/*phase1=*/false, bs, max_iter);
  sol.iterations = simplex.iterations;
  sol.status = LPStatus::Optimal;
  sol.y = simplex.pi;
  sol.objective_value = c.dot(sol.y);

  const VectorXd slack = inst.b - inst.A * sol.y;
  for (int r = 0; r < nr; ++r) {
    const double scale = std::max(1.0, inst.A.row(r).cwiseAbs().maxCoeff());
    if (std::abs(slack(r)) <= tol * scale) sol.active_set.push_back(r);
  }
  return sol;
}

QuadraticValue extract_value(const LPSolution& solution, int n, bool include_e) {
  if (solution.status != LPStatus::Optimal) {
    throw std::logic_error("extract_value: solution is not optimal");
  }
  const int hv = n * (n + 1) / 2;
  if (solution.y.size() != hv + (include_e ? 1 : 0)) {
    throw std::invalid_argument("extract_value: dimension mismatch");
  }
  QuadraticValue v;
  v.P = sym_from_half_vec(solution.y.head(hv));
  v.e = include_e ? solution.y(hv) : 0.0;
  return v;
}

std::vector<std::pair<int, Provenance>> support_constraints(
    const LPInstance& instance, const LPSolution& solution, double tol) {
  if (solution.status != LPStatus::Optimal) {
    throw std::logic_error("support_constraints: solution is not optimal");
  }
  std::vector<std::pair<int, Provenance>> support;
  const VectorXd slack = instance.b - instance.A * solution.y;
  for (int r = 0; r < instance.rows(); ++r) {
    const double scale = std::max(1.0, instance.A.row(r).cwiseAbs().maxCoeff());
    if (std::abs(slack(r)) <= tol * scale) {
      support.emplace_back(r, instance.provenance[static_cast<size_t>(r)]);
    }
  }
  return support;
}

void write_lp(const LPInstance& instance, const std::string& csv_path,
              const std::string& json_path) {
  {
    std::ofstream out(csv_path);
    if (!out) throw std::runtime_error("write_lp: cannot open " + csv_path);
    for (int j = 0; j < instance.dim; ++j) out << "a_" << (j + 1) << ",";
    out << "b,provenance\n";
    for (int r = 0; r < instance.rows(); ++r) {
      for (int j = 0; j < instance.dim; ++j) out << format_double(instance.A(r, j)) << ",";
      out << format_double(instance.b(r)) << ","
          << provenance_name(instance.provenance[static_cast<size_t>(r)]) << "\n";
    }
  }
  nlohmann::json header;
  header["dim"] = instance.dim;
  header["n"] = instance.n;
  header["include_e"] = instance.include_e;
  header["objective"] = std::vector<double>(
      instance.objective.data(), instance.objective.data() + instance.objective.size());
  std::ofstream out(json_path);
  if (!out) throw std::runtime_error("write_lp: cannot open " + json_path);
  out << header.dump(2) << "\n";
}

LPInstance read_lp(const std::string& csv_path, const std::string& json_path) {
  nlohmann::json header;
  {
    std::ifstream in(json_path);
    if (!in) throw std::runtime_error("read_lp: cannot open " + json_path);
    in >> header;
  }
  LPInstance inst;
  inst.dim = header.at("dim").get<int>();
  inst.n = header.at("n").get<int>();
  inst.include_e = header.at("include_e").get<bool>();
  const auto obj = header.at("objective").get<std::vector<double>>();
  if (static_cast<int>(obj.size()) != inst.dim) {
    throw std::runtime_error("read_lp: objective length does not match dim");
  }
  inst.objective = Eigen::Map<const VectorXd>(obj.data(), inst.dim);

  std::ifstream in(csv_path);
  if (!in) throw std::runtime_error("read_lp: cannot open " + csv_path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("read_lp: empty CSV");
  std::vector<std::vector<double>> rows;
  std::vector<Provenance> provs;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string tok;
    std::vector<double> row;
    for (int j = 0; j < inst.dim + 1; ++j) {
      if (!std::getline(ss, tok, ',')) throw std::runtime_error("read_lp: truncated row");
      row.push_back(std::stod(tok));
    }
    if (!std::getline(ss, tok, ',')) throw std::runtime_error("read_lp: missing provenance");
    provs.push_back(provenance_from_name(tok));
    rows.push_back(std::move(row));
  }
  inst.A.resize(static_cast<Eigen::Index>(rows.size()), inst.dim);
  inst.b.resize(static_cast<Eigen::Index>(rows.size()));
  for (size_t r = 0; r < rows.size(); ++r) {
    for (int j = 0; j < inst.dim; ++j) inst.A(static_cast<Eigen::Index>(r), j) = rows[r][static_cast<size_t>(j)];
    inst.b(static_cast<Eigen::Index>(r)) = rows[r][static_cast<size_t>(inst.dim)];
  }
  inst.provenance = std::move(provs);
  return inst;
}

}  // namespace ddlp
