#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace ddlp {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// An iterative scheme failed to converge (non-stabilizable pair, unstable
// closed loop, bad conditioning).
struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A matrix that must be invertible is numerically singular.
struct SingularError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A dataset or matrix does not meet a required rank condition.
struct RankError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A linear system that should be consistent has a large residual.
struct InconsistentDataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The LP solver hit its iteration cap or an internal numerical failure.
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numerical rank via singular values. A negative tolerance selects the
// default relative threshold max(rows, cols) * eps * sigma_max.
int numerical_rank(const MatrixXd& M, double tol = -1.0);

// Symmetric PSD square root used to sample noise with covariance Sigma.
// Throws std::invalid_argument if Sigma is not symmetric PSD.
MatrixXd covariance_factor(const MatrixXd& Sigma, double tol = 1e-9);

// Vector of i.i.d. standard normal entries.
VectorXd gaussian_vector(int n, std::mt19937_64& rng);

// Stable per-stream seed derivation (splitmix64 over base ^ stream).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

// Shortest decimal representation that round-trips a double ("%.17g").
std::string format_double(double x);

}  // namespace ddlp
