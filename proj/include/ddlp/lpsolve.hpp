#pragma once

#include "ddlp/constraints.hpp"

namespace ddlp {

// Finite LP over free variables y: maximize objective . y subject to
// A y <= b row-wise. For Bellman-inequality instances y stacks the
// half-vectorized P (plus e when included) and every b_i >= 0, so y = 0 is
// always feasible and the solve never reports infeasibility.
struct LPInstance {
  int dim = 0;          // number of decision variables
  int n = 0;            // state dimension the rows were built over
  bool include_e = false;
  VectorXd objective;   // dim
  MatrixXd A;           // rows x dim
  VectorXd b;           // rows
  std::vector<Provenance> provenance;  // one tag per row

  int rows() const { return static_cast<int>(A.rows()); }
};

enum class LPStatus { Optimal, Unbounded };

struct LPSolution {
  LPStatus status = LPStatus::Optimal;
  VectorXd y;             // optimal point (vertex) when status == Optimal
  double objective_value = 0.0;
  std::vector<int> active_set;  // rows with |a_i.y - b_i| <= activity tol
  VectorXd ray;           // improving direction when status == Unbounded
  int iterations = 0;
};

// Assembles the LP max tr(P) (+ e) from constraint rows over the same n.
// When include_e is set, an extra free variable e is appended with objective
// weight 1 and per-row coefficient (1 - gamma).
LPInstance build_lp(const std::vector<ConstraintRow>& rows, int n,
                    bool include_e = false, double gamma = 0.0);

// Dense two-phase simplex on the dual (min b'lambda s.t. A'lambda = c,
// lambda >= 0), Dantzig pricing with a permanent switch to Bland's rule to
// break cycles. Deterministic given the instance. Throws SolverError past the
// iteration cap.
LPSolution solve_lp(const LPInstance& instance, double tol = 1e-7);

// Rebuilds the symmetric P (and e) from the solution coordinates.
QuadraticValue extract_value(const LPSolution& solution, int n, bool include_e);

// Active rows at the optimum, labeled by provenance.
std::vector<std::pair<int, Provenance>> support_constraints(
    const LPInstance& instance, const LPSolution& solution, double tol = 1e-7);

// External cross-checking format: CSV of rows (a_1..a_dim, b) plus a JSON
// header file carrying dim, objective, include_e and n.
void write_lp(const LPInstance& instance, const std::string& csv_path,
              const std::string& json_path);
LPInstance read_lp(const std::string& csv_path, const std::string& json_path);

}  // namespace ddlp
