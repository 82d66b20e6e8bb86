#include "ddlp/common.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

namespace ddlp {

int numerical_rank(const MatrixXd& M, double tol) {
  if (M.size() == 0) return 0;
  Eigen::JacobiSVD<MatrixXd> svd(M);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) return 0;
  if (tol < 0.0) {
    tol = static_cast<double>(std::max(M.rows(), M.cols())) *
          std::numeric_limits<double>::epsilon() * sv(0);
  }
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > tol) ++rank;
  }
  return rank;
}

MatrixXd covariance_factor(const MatrixXd& Sigma, double tol) {
  if (Sigma.rows() != Sigma.cols()) {
    throw std::invalid_argument("covariance_factor: Sigma must be square");
  }
  if ((Sigma - Sigma.transpose()).cwiseAbs().maxCoeff() >
      tol * (1.0 + Sigma.cwiseAbs().maxCoeff())) {
    throw std::invalid_argument("covariance_factor: Sigma must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(Sigma);
  VectorXd ev = es.eigenvalues();
  const double floor = -tol * (1.0 + ev.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) < floor) {
      throw std::invalid_argument("covariance_factor: Sigma has a negative eigenvalue");
    }
    ev(i) = std::sqrt(std::max(ev(i), 0.0));
  }
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

VectorXd gaussian_vector(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = normal(rng);
  return v;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  // splitmix64 finalizer over the combined state.
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace ddlp
