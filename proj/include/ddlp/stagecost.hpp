#pragma once

#include "ddlp/constraints.hpp"

namespace ddlp {

// Stage cost reconstructed from finitely many cost observations. L_XU is the
// matrix of the cost's bilinear form in the data basis Z = [X~; U~]; it is
// congruent to the true L via L_XU = Z' L Z.
struct ReconstructedCost {
  MatrixXd Z;     // (n+m) x (n+m), invertible
  MatrixXd L_XU;  // (n+m) x (n+m), symmetric
  double z_condition = 0.0;  // 2-norm condition number of Z
};

// Greedy order-preserving selection of n+m linearly independent dataset
// columns. Throws RankError if the dataset cannot supply a square basis.
MatrixXd select_square_basis(const Dataset& dataset, double tol = 1e-8);

// The (n+m)(n+m+1)/2 state-input points whose cost must be observed: the
// basis points z^i followed by the pairwise sums z^i + z^j (i < j),
// lexicographic in (i, j).
std::vector<VectorXd> probe_requirements(const MatrixXd& Z);

// Builds L_XU from observed costs ordered as probe_requirements(Z):
// diagonal [i,i] = l(z^i), off-diagonal [i,j] via polarization
// 1/2 (l(z^i+z^j) - l(z^i) - l(z^j)). Throws std::invalid_argument when the
// observation count does not match or a cost is negative.
ReconstructedCost build_L_XU(const MatrixXd& Z, const std::vector<double>& probe_costs);

// alpha = Z^{-1} [x;u]; returns alpha' L_XU alpha.
double eval_cost(const ReconstructedCost& recon, const VectorXd& x, const VectorXd& u);

// Inverts the congruence: Z^{-T} L_XU Z^{-1}, symmetrized.
StageCost recover_L(const ReconstructedCost& recon, int n, int m);

}  // namespace ddlp
