#include "ddlp/lqsystem.hpp"

#include <cmath>

namespace ddlp {

namespace {

void check_vector(const VectorXd& v, int expected, const char* what) {
  if (v.size() != expected) {
    throw std::invalid_argument(std::string(what) + ": expected length " +
                                std::to_string(expected) + ", got " +
                                std::to_string(v.size()));
  }
}

MatrixXd kron(const MatrixXd& A, const MatrixXd& B) {
  MatrixXd K(A.rows() * B.rows(), A.cols() * B.cols());
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j)
      K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return K;
}

double spectral_radius(const MatrixXd& M) {
  if (M.size() == 0) return 0.0;
  Eigen::EigenSolver<MatrixXd> es(M, /*computeEigenvectors=*/false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

StageCost::StageCost(MatrixXd L_, int n_, int m_) : L(std::move(L_)), n(n_), m(m_) {
  if (L.rows() != n + m || L.cols() != n + m) {
    throw std::invalid_argument("StageCost: L must be (n+m) x (n+m)");
  }
}

StageCost StageCost::identity(int n, int m) {
  return StageCost(MatrixXd::Identity(n + m, n + m), n, m);
}

void StageCost::validate(double tol) const {
  const double scale = 1.0 + L.cwiseAbs().maxCoeff();
  if ((L - L.transpose()).cwiseAbs().maxCoeff() > tol * scale) {
    throw std::invalid_argument("StageCost: L must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(L, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -tol * scale) {
    throw std::invalid_argument("StageCost: L must be positive semidefinite");
  }
  if (m > 0) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> esu(MatrixXd(Luu()), Eigen::EigenvaluesOnly);
    if (esu.eigenvalues().minCoeff() <= tol * scale) {
      throw std::invalid_argument("StageCost: L_uu must be positive definite");
    }
  }
}

void ControlProblem::validate(double tol) const {
  if (A.rows() != A.cols()) throw std::invalid_argument("ControlProblem: A must be square");
  if (B.rows() != A.rows()) throw std::invalid_argument("ControlProblem: B rows must match A");
  if (Sigma.rows() != A.rows() || Sigma.cols() != A.rows()) {
    throw std::invalid_argument("ControlProblem: Sigma must be n x n");
  }
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("ControlProblem: gamma must lie in (0,1)");
  }
  covariance_factor(Sigma, tol);  // symmetry + PSD check
  if (cost.n != n() || cost.m != m()) {
    throw std::invalid_argument("ControlProblem: cost dimensions must match (n,m)");
  }
  cost.validate(tol);
}

VectorXd step(const ControlProblem& problem, const VectorXd& x,
              const VectorXd& u, const VectorXd& xi) {
  check_vector(x, problem.n(), "step: x");
  check_vector(u, problem.m(), "step: u");
  check_vector(xi, problem.n(), "step: xi");
  return problem.A * x + problem.B * u + xi;
}

MatrixXd simulate(const ControlProblem& problem, const VectorXd& x0,
                  const MatrixXd& inputs, std::mt19937_64& rng) {
  check_vector(x0, problem.n(), "simulate: x0");
  if (inputs.rows() != problem.m() || inputs.cols() < 1) {
    throw std::invalid_argument("simulate: inputs must be m x T with T >= 1");
  }
  const int T = static_cast<int>(inputs.cols());
  const bool noisy = !problem.deterministic();
  MatrixXd factor;
  if (noisy) factor = covariance_factor(problem.Sigma);

  MatrixXd states(problem.n(), T + 1);
  states.col(0) = x0;
  const VectorXd zero = VectorXd::Zero(problem.n());
  for (int k = 0; k < T; ++k) {
    VectorXd xi = noisy ? VectorXd(factor * gaussian_vector(problem.n(), rng)) : zero;
    states.col(k + 1) = step(problem, states.col(k), inputs.col(k), xi);
  }
  return states;
}

double stage_cost_eval(const StageCost& cost, const VectorXd& x, const VectorXd& u) {
  check_vector(x, cost.n, "stage_cost_eval: x");
  check_vector(u, cost.m, "stage_cost_eval: u");
  VectorXd z(cost.n + cost.m);
  z << x, u;
  return z.dot(cost.L * z);
}

AreSolution solve_are(const ControlProblem& problem, const AreOptions& opts) {
  const int n = problem.n();
  const MatrixXd& A = problem.A;
  const MatrixXd& B = problem.B;
  const double g = problem.gamma;
  const MatrixXd Lxx = problem.cost.Lxx();
  const MatrixXd Lxu = problem.cost.Lxu();
  const MatrixXd Luu = problem.cost.Luu();

  MatrixXd P = Lxx;
  double residual = 0.0;
  for (int it = 1; it <= opts.max_iter; ++it) {
    const MatrixXd PB = P * B;
    const MatrixXd inner = Luu + g * B.transpose() * PB;
    Eigen::LDLT<MatrixXd> ldlt(inner);
    if (ldlt.info() != Eigen::Success) {
      throw SingularError("solve_are: L_uu + gamma B'PB not invertible");
    }
    const MatrixXd cross = Lxu + g * A.transpose() * PB;  // n x m
    MatrixXd next = Lxx + g * A.transpose() * P * A -
                    cross * ldlt.solve(cross.transpose());
    next = 0.5 * (next + next.transpose());
    residual = (next - P).cwiseAbs().maxCoeff();
    P = next;
    if (!P.allFinite()) {
      throw DivergenceError("solve_are: iteration diverged (non-stabilizable pair?)");
    }
    if (residual <= opts.tol) {
      AreSolution sol;
      sol.value.P = P;
      sol.value.e = g / (1.0 - g) * (P * problem.Sigma).trace();
      sol.gain = greedy_gain(problem, sol.value);
      sol.residual = residual;
      sol.iterations = it;
      return sol;
    }
  }
  throw DivergenceError(
      "solve_are: no convergence within max_iter (residual " +
      format_double(residual) + "); pair may not be stabilizable");
}

PolicyGain greedy_gain(const ControlProblem& problem, const QuadraticValue& v) {
  const double g = problem.gamma;
  const MatrixXd inner =
      MatrixXd(problem.cost.Luu()) + g * problem.B.transpose() * v.P * problem.B;
  Eigen::FullPivLU<MatrixXd> lu(inner);
  if (!lu.isInvertible()) {
    throw SingularError("greedy_gain: L_uu + gamma B'PB is singular");
  }
  const MatrixXd rhs = MatrixXd(problem.cost.Lxu()).transpose() +
                       g * problem.B.transpose() * v.P * problem.A;
  return PolicyGain{-lu.solve(rhs)};
}

double closed_loop_radius(const ControlProblem& problem, const PolicyGain& gain) {
  return std::sqrt(problem.gamma) *
         spectral_radius(problem.A + problem.B * gain.K);
}

QuadraticValue evaluate_policy(const ControlProblem& problem,
                               const PolicyGain& gain, double tol) {
  const int n = problem.n();
  if (gain.K.rows() != problem.m() || gain.K.cols() != n) {
    throw std::invalid_argument("evaluate_policy: K must be m x n");
  }
  if (closed_loop_radius(problem, gain) >= 1.0) {
    throw DivergenceError("evaluate_policy: sqrt(gamma)(A+BK) is not Schur stable");
  }
  const MatrixXd Acl = problem.A + problem.B * gain.K;
  const MatrixXd Lxx = problem.cost.Lxx();
  const MatrixXd Lxu = problem.cost.Lxu();
  const MatrixXd Luu = problem.cost.Luu();
  MatrixXd LK = Lxx + Lxu * gain.K + gain.K.transpose() * Lxu.transpose() +
                gain.K.transpose() * Luu * gain.K;
  LK = 0.5 * (LK + LK.transpose());

  // vec(P) = vec(L(K)) + gamma (Acl' (x) Acl') vec(P), solved directly.
  const MatrixXd AclT = Acl.transpose();
  const MatrixXd M = MatrixXd::Identity(n * n, n * n) - problem.gamma * kron(AclT, AclT);
  const VectorXd vecP = M.lu().solve(Eigen::Map<const VectorXd>(LK.data(), n * n));
  MatrixXd P = Eigen::Map<const MatrixXd>(vecP.data(), n, n);
  P = 0.5 * (P + P.transpose());

  const double res =
      (P - (LK + problem.gamma * Acl.transpose() * P * Acl)).cwiseAbs().maxCoeff();
  if (!(res <= tol * (1.0 + P.cwiseAbs().maxCoeff()))) {
    throw DivergenceError("evaluate_policy: fixed-point residual too large");
  }
  QuadraticValue v;
  v.P = P;
  v.e = problem.gamma / (1.0 - problem.gamma) * (P * problem.Sigma).trace();
  return v;
}

}  // namespace ddlp
