#pragma once

#include "ddlp/dataset.hpp"

#include <functional>
#include <optional>
#include <utility>
#include <vector>

namespace ddlp {

// Half-vectorization of a symmetric p x p matrix in the order
// (1,1),(1,2),...,(1,p),(2,2),...,(p,p); dimension p(p+1)/2.
VectorXd sym_half_vec(const MatrixXd& M);
MatrixXd sym_from_half_vec(const VectorXd& v);

enum class Provenance { Observed, Synthetic, ReinitAverage, DatasetAverage };

std::string provenance_name(Provenance p);
Provenance provenance_from_name(const std::string& name);

// One linearized Bellman inequality coeffs . vec(P) <= rhs. Off-diagonal
// coefficients carry weight 2 so the inner product with the half-vectorized P
// equals the bilinear evaluation x'Px - gamma x+'Px+ exactly.
struct ConstraintRow {
  VectorXd coeffs;  // n(n+1)/2
  double rhs = 0.0;
  Provenance provenance = Provenance::Observed;
  std::optional<std::pair<VectorXd, VectorXd>> source;  // generating (x, u)

  int n() const;
  // Evaluates coeffs . vec(P) for a symmetric P.
  double evaluate(const MatrixXd& P) const;
};

// Recovers the (undoubled) symmetric coefficient matrix of a row.
MatrixXd row_coefficient_matrix(const ConstraintRow& row);

// H(x,u) = xx' - gamma (Ax+Bu)(Ax+Bu)'.
MatrixXd h_matrix(const ControlProblem& problem, const VectorXd& x, const VectorXd& u);

// G(x,u,xi) = xx' - gamma (Ax+Bu+xi)(Ax+Bu+xi)'.
MatrixXd g_matrix(const ControlProblem& problem, const VectorXd& x,
                  const VectorXd& u, const VectorXd& xi);

// E_xi G(x,u,xi) = H(x,u) - gamma Sigma for zero-mean noise.
MatrixXd expected_g(const ControlProblem& problem, const VectorXd& x, const VectorXd& u);

// Minimum-norm alpha with [X;U] alpha = [x;u]. Throws RankError when the
// dataset violates the rank condition and InconsistentDataError when the
// residual exceeds `tol` (relative).
VectorXd solve_alpha(const Dataset& dataset, const VectorXd& x, const VectorXd& u,
                     double tol = 1e-8);

// (X alpha)(X alpha)' - gamma (X+ alpha)(X+ alpha)'.
MatrixXd synth_h(const Dataset& dataset, const VectorXd& alpha, double gamma);

// Half-vectorizes H with doubled off-diagonals. Throws std::invalid_argument
// on negative rhs (stage costs are nonnegative).
ConstraintRow make_row(const MatrixXd& H, double rhs, Provenance provenance,
                       std::optional<std::pair<VectorXd, VectorXd>> source = {});

// Cost oracle l(x, u); either a known StageCost or a ReconstructedCost.
using CostFn = std::function<double(const VectorXd&, const VectorXd&)>;

CostFn cost_fn(const StageCost& cost);

// `count` synthetic rows at alpha with i.i.d. standard normal entries scaled
// by alpha_scale; rhs evaluated at (x,u) = [X;U] alpha.
std::vector<ConstraintRow> synth_random_rows(const Dataset& dataset,
                                             const CostFn& cost, double gamma,
                                             int count, std::mt19937_64& rng,
                                             double alpha_scale = 1.0);

// Policy-targeted rows at (x, Kx) for each given state.
std::vector<ConstraintRow> synth_policy_rows(const Dataset& dataset,
                                             const PolicyGain& gain,
                                             const std::vector<VectorXd>& states,
                                             const CostFn& cost, double gamma);

// Noise-corrupted constraint from a single observed transition.
ConstraintRow observed_row(const VectorXd& x, const VectorXd& u,
                           const VectorXd& xplus, double gamma, double rhs);

// Monte Carlo average of G(x,u,xi^k) over N fresh draws (re-initialization).
ConstraintRow reinit_average_row(const ControlProblem& problem, const VectorXd& x,
                                 const VectorXd& u, int N, std::mt19937_64& rng);

// Constraint at the sample means: coefficients xbar xbar' - gamma xpbar xpbar',
// which equals G(xbar, ubar, xibar) exactly with no access to the noise.
ConstraintRow mean_transition_row(const SampleMeanTriple& triple, double gamma,
                                  double rhs);

// CSV: one row per constraint, coefficient entries in canonical half-vec
// order, then rhs and provenance.
void write_rows_csv(const std::vector<ConstraintRow>& rows, const std::string& path);
std::vector<ConstraintRow> read_rows_csv(const std::string& path);

}  // namespace ddlp
