#pragma once

#include "ddlp/lpsolve.hpp"
#include "ddlp/stagecost.hpp"

namespace ddlp {

struct ExperimentConfig {
  ControlProblem problem;
  int n_observed = 10;
  int n_synthetic = 500;
  int batch_size = 10;
  int runs = 100;
  std::uint64_t seed = 1;
  double alpha_scale = 1.0;

  // Stochastic estimation knobs.
  std::vector<int> reinit_grid = {100, 1000, 10000};  // N values
  int avg_groups = 10;          // T subsets for the averaged-dataset heuristic
  int avg_synth_count = 1000;   // synthetic rows built from the averaged dataset
  int err_probe_rows = 20;      // rows used for constraint-error medians

  // Policy iteration knobs.
  int pi_iterations = 20;
  int pi_states_per_iter = 0;   // 0 -> default 2(n+m)
  double pi_gain_tol = 1e-9;

  void validate() const;
};

// Optimality-gap curve versus constraint count (medians across runs).
struct GapCurve {
  std::vector<int> constraint_counts;
  MatrixXd gaps;        // runs x counts; +inf marks unbounded solves
  MatrixXd objectives;  // runs x counts; LP objective per solve (+inf unbounded)
  std::vector<double> median_gaps;
  std::vector<bool> majority_unbounded;  // per count
};

// Relative trace gap (tr(P_hat) - tr(P*)) / max(tr(P*), 1e-12).
double optimality_gap(const ControlProblem& problem, const QuadraticValue& v_hat);
double optimality_gap(double trace_hat, double trace_star);

// Secondary metric ||P_hat - P*||_F / ||P*||_F.
double frobenius_gap(const ControlProblem& problem, const QuadraticValue& v_hat);

// Per run: a persistently exciting rollout provides n_observed constraints,
// then synthetic rows are appended batch by batch with the LP re-solved at
// each count. Deterministic problems only.
GapCurve fig1_experiment(const ExperimentConfig& config);

// Two-stage support-constraint comparison for n = 2: observed constraints
// only, then with synthetic rows added.
struct SupportReport {
  LPInstance first_instance;
  LPSolution first;
  LPInstance second_instance;
  LPSolution second;
  double first_gap = 0.0;   // +inf when unbounded
  double second_gap = 0.0;
  MatrixXd value_slice;  // columns: angle, v_first, v_second, v_star on the unit circle
};

SupportReport fig2_experiment(const ExperimentConfig& config);

struct PiStep {
  PolicyGain gain;
  QuadraticValue value;   // LP solution the gain was derived from
  double gap = 0.0;       // relative trace gap of the LP value
  double policy_gap = 0.0;  // ||K_t - K*||_inf
  double gain_change = 0.0;
  bool lp_unbounded = false;
  bool destabilized = false;
};

// Policy iteration emulated through policy-targeted constraint synthesis.
// Constraint rows accumulate across iterations. Terminates on gain change
// below pi_gain_tol, the iteration cap, or a destabilizing gain (recorded).
std::vector<PiStep> pi_experiment(const ExperimentConfig& config, int iterations,
                                  const PolicyGain* initial_gain = nullptr);

// Estimation error comparison for the three stochastic strategies at each N:
// (A) re-initialized Monte Carlo averaging of G, (B) the sample-mean
// transition row, (C) synthetic rows from the partitioned-and-averaged
// dataset, plus the policy error of the LP solved on method-C rows.
struct StochasticReport {
  std::vector<int> N_values;
  std::vector<double> reinit_error;       // median ||mean G - (H - gamma Sigma)||_F
  std::vector<double> mean_row_error;     // median ||row - H(xbar, ubar)||_F
  std::vector<double> averaged_error;     // median ||synth H - H||_F over probe rows
  std::vector<double> policy_error;       // median ||K_hat - K*||_inf
};

StochasticReport stochastic_experiment(const ExperimentConfig& config);

}  // namespace ddlp
