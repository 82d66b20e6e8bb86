#pragma once

#include "ddlp/experiments.hpp"

#include <random>

namespace testutil {

using ddlp::MatrixXd;
using ddlp::VectorXd;

// The two-state benchmark system used throughout the experiments.
inline ddlp::ControlProblem paper_problem(double noise_var = 0.0) {
  ddlp::ControlProblem p;
  p.A.resize(2, 2);
  p.A << 1.0, 0.1, 0.5, -0.5;
  p.B.resize(2, 1);
  p.B << 1.0, 0.5;
  p.Sigma = noise_var * MatrixXd::Identity(2, 2);
  p.gamma = 0.95;
  p.cost = ddlp::StageCost::identity(2, 1);
  return p;
}

inline MatrixXd random_matrix(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  MatrixXd M(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) M(i, j) = normal(rng);
  return M;
}

inline MatrixXd random_psd(int p, std::mt19937_64& rng) {
  const MatrixXd R = random_matrix(p, p, rng);
  return R * R.transpose() / p;
}

inline double spectral_radius(const MatrixXd& M) {
  return M.eigenvalues().cwiseAbs().maxCoeff();
}

// Random system with a spectral radius small enough that K = 0 already
// stabilizes the discounted dynamics, hence (A, B) is stabilizable.
inline ddlp::ControlProblem random_stabilizable(int n, int m, std::mt19937_64& rng,
                                                double radius = 0.9) {
  ddlp::ControlProblem p;
  p.A = random_matrix(n, n, rng);
  const double rho = spectral_radius(p.A);
  if (rho > 1e-12) p.A *= radius / rho;
  p.B = random_matrix(n, m, rng);
  p.Sigma = MatrixXd::Zero(n, n);
  p.gamma = 0.95;
  const MatrixXd C = random_matrix(n + m, n + m, rng);
  p.cost = ddlp::StageCost(
      C * C.transpose() / (n + m) + MatrixXd::Identity(n + m, n + m), n, m);
  return p;
}

// Targeted dataset at random pairs; T columns, rank-sufficient with
// probability one when T >= n+m.
inline ddlp::Dataset random_dataset(const ddlp::ControlProblem& problem, int T,
                                    std::mt19937_64& rng) {
  const MatrixXd states = random_matrix(problem.n(), T, rng);
  const MatrixXd inputs = random_matrix(problem.m(), T, rng);
  return ddlp::collect_targeted(problem, states, inputs, rng);
}

// Independent residual of the discounted Riccati equation at P.
inline double riccati_residual(const ddlp::ControlProblem& p, const MatrixXd& P) {
  const double g = p.gamma;
  const MatrixXd S = p.cost.Luu() + g * p.B.transpose() * P * p.B;
  const MatrixXd T = p.cost.Lxu() + g * p.A.transpose() * P * p.B;
  const MatrixXd next =
      p.cost.Lxx() + g * p.A.transpose() * P * p.A - T * S.ldlt().solve(T.transpose());
  return (P - next).cwiseAbs().maxCoeff();
}

}  // namespace testutil
