#pragma once

#include "ddlp/common.hpp"

namespace ddlp {

// Quadratic stage cost l(x,u) = [x;u]' L [x;u] with L symmetric PSD and the
// input block positive definite.
struct StageCost {
  MatrixXd L;  // (n+m) x (n+m), symmetric
  int n = 0;
  int m = 0;

  StageCost() = default;
  StageCost(MatrixXd L_, int n_, int m_);

  static StageCost identity(int n, int m);

  auto Lxx() const { return L.topLeftCorner(n, n); }
  auto Lxu() const { return L.topRightCorner(n, m); }
  auto Luu() const { return L.bottomRightCorner(m, m); }

  // Checks symmetry, L >= 0 and L_uu > 0. Throws std::invalid_argument.
  void validate(double tol = 1e-9) const;
};

// Discounted LQ problem instance x+ = Ax + Bu + xi, xi ~ (0, Sigma).
struct ControlProblem {
  MatrixXd A;      // n x n
  MatrixXd B;      // n x m
  MatrixXd Sigma;  // n x n symmetric PSD, zero in deterministic mode
  double gamma = 0.95;
  StageCost cost;

  int n() const { return static_cast<int>(A.rows()); }
  int m() const { return static_cast<int>(B.cols()); }
  bool deterministic(double tol = 0.0) const {
    return Sigma.size() == 0 || Sigma.cwiseAbs().maxCoeff() <= tol;
  }

  // Shape and invariant checks (gamma in (0,1), Sigma symmetric PSD, cost
  // valid). Stabilizability is surfaced operationally by solve_are.
  void validate(double tol = 1e-9) const;
};

// Quadratic value function v(x) = x'Px + e.
struct QuadraticValue {
  MatrixXd P;
  double e = 0.0;

  double eval(const VectorXd& x) const { return x.dot(P * x) + e; }
};

// Linear state feedback u = Kx.
struct PolicyGain {
  MatrixXd K;  // m x n
};

// One transition: Ax + Bu + xi.
VectorXd step(const ControlProblem& problem, const VectorXd& x,
              const VectorXd& u, const VectorXd& xi);

// Rollout under the given input sequence (columns of `inputs`); noise drawn
// zero-mean with covariance Sigma from `rng`. Returns states as columns of an
// n x (T+1) matrix.
MatrixXd simulate(const ControlProblem& problem, const VectorXd& x0,
                  const MatrixXd& inputs, std::mt19937_64& rng);

double stage_cost_eval(const StageCost& cost, const VectorXd& x,
                       const VectorXd& u);

struct AreOptions {
  double tol = 1e-12;   // sup-norm residual of the discounted recursion
  int max_iter = 100000;
};

struct AreSolution {
  QuadraticValue value;  // P*, e* = gamma/(1-gamma) tr(P* Sigma)
  PolicyGain gain;       // greedy gain at P*
  double residual = 0.0;
  int iterations = 0;
};

// Fixed-point iteration on the discounted Riccati recursion. Throws
// DivergenceError if the iteration does not converge within max_iter, which
// signals a non-stabilizable pair or bad conditioning.
AreSolution solve_are(const ControlProblem& problem, const AreOptions& opts = {});

// K = -(L_uu + gamma B'PB)^{-1} (L_xu' + gamma B'PA).
PolicyGain greedy_gain(const ControlProblem& problem, const QuadraticValue& v);

// Fixed point of P = L(K) + gamma (A+BK)' P (A+BK), solved exactly through
// the vectorized linear system and verified against `tol`. Throws
// DivergenceError when sqrt(gamma)(A+BK) is not Schur stable.
QuadraticValue evaluate_policy(const ControlProblem& problem,
                               const PolicyGain& gain, double tol = 1e-12);

// Spectral radius of sqrt(gamma) (A + BK).
double closed_loop_radius(const ControlProblem& problem, const PolicyGain& gain);

}  // namespace ddlp
