#include "ddlp/stagecost.hpp"

namespace ddlp {

MatrixXd select_square_basis(const Dataset& dataset, double tol) {
  dataset.validate();
  const MatrixXd S = dataset.stacked();
  const int p = dataset.n() + dataset.m();

  std::vector<int> picked;
  MatrixXd Q(p, p);  // orthonormal columns of the accepted subspace
  int q = 0;
  for (int t = 0; t < dataset.length() && q < p; ++t) {
    VectorXd r = S.col(t);
    // Two Gram-Schmidt passes for stability.
    for (int pass = 0; pass < 2; ++pass) {
      for (int j = 0; j < q; ++j) r -= Q.col(j).dot(r) * Q.col(j);
    }
    const double colnorm = S.col(t).norm();
    if (r.norm() > tol * colnorm && colnorm > 0.0) {
      Q.col(q++) = r / r.norm();
      picked.push_back(t);
    }
  }
  if (q < p) {
    throw RankError("select_square_basis: dataset rank below n+m, collect more data");
  }
  MatrixXd Z(p, p);
  for (int j = 0; j < p; ++j) Z.col(j) = S.col(picked[j]);
  return Z;
}

std::vector<VectorXd> probe_requirements(const MatrixXd& Z) {
  if (Z.rows() != Z.cols()) throw std::invalid_argument("probe_requirements: Z must be square");
  const int p = static_cast<int>(Z.rows());
  std::vector<VectorXd> probes;
  probes.reserve(p * (p + 1) / 2);
  for (int i = 0; i < p; ++i) probes.push_back(Z.col(i));
  for (int i = 0; i < p; ++i)
    for (int j = i + 1; j < p; ++j) probes.push_back(Z.col(i) + Z.col(j));
  return probes;
}

ReconstructedCost build_L_XU(const MatrixXd& Z, const std::vector<double>& probe_costs) {
  if (Z.rows() != Z.cols()) throw std::invalid_argument("build_L_XU: Z must be square");
  const int p = static_cast<int>(Z.rows());
  const size_t expected = static_cast<size_t>(p) * (p + 1) / 2;
  if (probe_costs.size() != expected) {
    throw std::invalid_argument("build_L_XU: expected " + std::to_string(expected) +
                                " probe costs, got " + std::to_string(probe_costs.size()));
  }
  for (double c : probe_costs) {
    if (c < -1e-12) {
      throw std::invalid_argument("build_L_XU: observed cost is negative");
    }
  }
  Eigen::JacobiSVD<MatrixXd> svd(Z);
  const double smin = svd.singularValues().minCoeff();
  if (smin <= 0.0 || numerical_rank(Z) < p) {
    throw RankError("build_L_XU: Z is singular");
  }

  ReconstructedCost recon;
  recon.Z = Z;
  recon.z_condition = svd.singularValues().maxCoeff() / smin;
  recon.L_XU.resize(p, p);
  for (int i = 0; i < p; ++i) recon.L_XU(i, i) = probe_costs[i];
  size_t k = p;
  for (int i = 0; i < p; ++i)
    for (int j = i + 1; j < p; ++j) {
      const double beta =
          0.5 * (probe_costs[k] - probe_costs[i] - probe_costs[j]);
      recon.L_XU(i, j) = beta;
      recon.L_XU(j, i) = beta;
      ++k;
    }
  return recon;
}

double eval_cost(const ReconstructedCost& recon, const VectorXd& x, const VectorXd& u) {
  VectorXd z(x.size() + u.size());
  z << x, u;
  if (z.size() != recon.Z.rows()) {
    throw std::invalid_argument("eval_cost: (x,u) dimension must match Z");
  }
  const VectorXd alpha = recon.Z.lu().solve(z);
  return alpha.dot(recon.L_XU * alpha);
}

StageCost recover_L(const ReconstructedCost& recon, int n, int m) {
  const int p = static_cast<int>(recon.Z.rows());
  if (n + m != p) throw std::invalid_argument("recover_L: n+m must match Z dimension");
  const MatrixXd Zinv = recon.Z.lu().solve(MatrixXd::Identity(p, p));
  MatrixXd L = Zinv.transpose() * recon.L_XU * Zinv;
  L = 0.5 * (L + L.transpose());
  return StageCost(std::move(L), n, m);
}

}  // namespace ddlp
