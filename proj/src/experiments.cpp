#include "ddlp/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ddlp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const size_t h = v.size() / 2;
  if (v.size() % 2 == 1) return v[h];
  return 0.5 * (v[h - 1] + v[h]);
}

Dataset rank_sufficient_rollout(const ControlProblem& problem, int length,
                                std::mt19937_64& rng, int max_retries = 50) {
  const VectorXd x0 = VectorXd::Zero(problem.n());
  for (int attempt = 0; attempt < max_retries; ++attempt) {
    MatrixXd inputs(problem.m(), length);
    for (int k = 0; k < length; ++k) inputs.col(k) = gaussian_vector(problem.m(), rng);
    Dataset ds = collect_rollout(problem, x0, inputs, rng);
    if (rank_condition(ds)) return ds;
  }
  throw RankError("rank_sufficient_rollout: could not reach rank n+m; "
                  "increase the rollout length");
}

std::vector<ConstraintRow> observed_rows(const Dataset& ds, const ControlProblem& problem) {
  std::vector<ConstraintRow> rows;
  rows.reserve(ds.length());
  for (int k = 0; k < ds.length(); ++k) {
    const double rhs =
        std::max(0.0, stage_cost_eval(problem.cost, ds.X.col(k), ds.U.col(k)));
    rows.push_back(observed_row(ds.X.col(k), ds.U.col(k), ds.Xplus.col(k),
                                problem.gamma, rhs));
  }
  return rows;
}

}  // namespace

void ExperimentConfig::validate() const {
  problem.validate();
  if (n_observed < 0 || n_synthetic < 0) {
    throw std::invalid_argument("ExperimentConfig: counts must be >= 0");
  }
  if (runs < 1) throw std::invalid_argument("ExperimentConfig: runs must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("ExperimentConfig: batch_size must be >= 1");
}

double optimality_gap(double trace_hat, double trace_star) {
  return (trace_hat - trace_star) / std::max(trace_star, 1e-12);
}

double optimality_gap(const ControlProblem& problem, const QuadraticValue& v_hat) {
  const AreSolution are = solve_are(problem);
  return optimality_gap(v_hat.P.trace(), are.value.P.trace());
}

double frobenius_gap(const ControlProblem& problem, const QuadraticValue& v_hat) {
  const AreSolution are = solve_are(problem);
  return (v_hat.P - are.value.P).norm() / std::max(are.value.P.norm(), 1e-12);
}

GapCurve fig1_experiment(const ExperimentConfig& config) {
  config.validate();
  if (!config.problem.deterministic()) {
    throw std::invalid_argument("fig1_experiment: deterministic problems only");
  }
  const ControlProblem& problem = config.problem;
  const AreSolution are = solve_are(problem);
  const double trace_star = are.value.P.trace();
  const CostFn cost = cost_fn(problem.cost);

  GapCurve curve;
  curve.constraint_counts.push_back(config.n_observed);
  for (int added = config.batch_size; added <= config.n_synthetic;
       added += config.batch_size) {
    curve.constraint_counts.push_back(config.n_observed + added);
  }
  if (config.n_synthetic % config.batch_size != 0) {
    curve.constraint_counts.push_back(config.n_observed + config.n_synthetic);
  }
  const int n_counts = static_cast<int>(curve.constraint_counts.size());
  curve.gaps.resize(config.runs, n_counts);
  curve.objectives.resize(config.runs, n_counts);

  for (int run = 0; run < config.runs; ++run) {
    std::mt19937_64 rng(derive_seed(config.seed, static_cast<std::uint64_t>(run)));
    const Dataset ds = rank_sufficient_rollout(problem, config.n_observed, rng);
    std::vector<ConstraintRow> rows = observed_rows(ds, problem);

    for (int c = 0; c < n_counts; ++c) {
      const int target = curve.constraint_counts[c];
      const int missing = target - static_cast<int>(rows.size());
      if (missing > 0) {
        auto extra = synth_random_rows(ds, cost, problem.gamma, missing, rng,
                                       config.alpha_scale);
        rows.insert(rows.end(), std::make_move_iterator(extra.begin()),
                    std::make_move_iterator(extra.end()));
      }
      const LPInstance inst = build_lp(rows, problem.n());
      const LPSolution sol = solve_lp(inst);
      if (sol.status == LPStatus::Unbounded) {
        curve.gaps(run, c) = kInf;
        curve.objectives(run, c) = kInf;
      } else {
        curve.gaps(run, c) = optimality_gap(sol.objective_value, trace_star);
        curve.objectives(run, c) = sol.objective_value;
      }
    }
  }

  for (int c = 0; c < n_counts; ++c) {
    std::vector<double> col(curve.gaps.col(c).data(),
                            curve.gaps.col(c).data() + config.runs);
    int unbounded = 0;
    for (double g : col) {
      if (std::isinf(g)) ++unbounded;
    }
    curve.majority_unbounded.push_back(2 * unbounded > config.runs);
    curve.median_gaps.push_back(median(std::move(col)));
  }
  return curve;
}

SupportReport fig2_experiment(const ExperimentConfig& config) {
  config.validate();
  if (config.problem.n() != 2) {
    throw std::invalid_argument("fig2_experiment: requires n = 2");
  }
  if (!config.problem.deterministic()) {
    throw std::invalid_argument("fig2_experiment: deterministic problems only");
  }
  const ControlProblem& problem = config.problem;
  const AreSolution are = solve_are(problem);
  const double trace_star = are.value.P.trace();
  const CostFn cost = cost_fn(problem.cost);

  std::mt19937_64 rng(config.seed);
  const Dataset ds = rank_sufficient_rollout(problem, config.n_observed, rng);
  std::vector<ConstraintRow> rows = observed_rows(ds, problem);

  SupportReport report;
  report.first_instance = build_lp(rows, problem.n());
  report.first = solve_lp(report.first_instance);
  report.first_gap = report.first.status == LPStatus::Optimal
                         ? optimality_gap(report.first.objective_value, trace_star)
                         : kInf;

  auto extra = synth_random_rows(ds, cost, problem.gamma, config.n_synthetic, rng,
                                 config.alpha_scale);
  rows.insert(rows.end(), std::make_move_iterator(extra.begin()),
              std::make_move_iterator(extra.end()));
  report.second_instance = build_lp(rows, problem.n());
  report.second = solve_lp(report.second_instance);
  report.second_gap = report.second.status == LPStatus::Optimal
                          ? optimality_gap(report.second.objective_value, trace_star)
                          : kInf;

  const int n_angles = 64;
  report.value_slice.resize(n_angles, 4);
  for (int k = 0; k < n_angles; ++k) {
    const double theta = 2.0 * M_PI * k / n_angles;
    VectorXd x(2);
    x << std::cos(theta), std::sin(theta);
    report.value_slice(k, 0) = theta;
    report.value_slice(k, 1) =
        report.first.status == LPStatus::Optimal
            ? x.dot(extract_value(report.first, 2, false).P * x)
            : std::numeric_limits<double>::quiet_NaN();
    report.value_slice(k, 2) =
        report.second.status == LPStatus::Optimal
            ? x.dot(extract_value(report.second, 2, false).P * x)
            : std::numeric_limits<double>::quiet_NaN();
    report.value_slice(k, 3) = x.dot(are.value.P * x);
  }
  return report;
}

std::vector<PiStep> pi_experiment(const ExperimentConfig& config, int iterations,
                                  const PolicyGain* initial_gain) {
  config.validate();
  const ControlProblem& problem = config.problem;
  const AreSolution are = solve_are(problem);
  const double trace_star = are.value.P.trace();
  const CostFn cost = cost_fn(problem.cost);
  const int states_per_iter = config.pi_states_per_iter > 0
                                  ? config.pi_states_per_iter
                                  : 2 * (problem.n() + problem.m());

  std::mt19937_64 rng(config.seed);
  const Dataset ds = rank_sufficient_rollout(problem, config.n_observed, rng);
  std::vector<ConstraintRow> rows = observed_rows(ds, problem);

  std::vector<PiStep> steps;
  PiStep init;
  const LPInstance inst0 = build_lp(rows, problem.n());
  const LPSolution sol0 = solve_lp(inst0);
  if (sol0.status == LPStatus::Unbounded) {
    init.lp_unbounded = true;
    init.gap = kInf;
    steps.push_back(std::move(init));
    return steps;
  }
  init.value = extract_value(sol0, problem.n(), false);
  init.gap = optimality_gap(sol0.objective_value, trace_star);
  init.gain = initial_gain ? *initial_gain : greedy_gain(problem, init.value);
  init.policy_gap = (init.gain.K - are.gain.K).cwiseAbs().maxCoeff();
  steps.push_back(init);

  for (int t = 0; t < iterations; ++t) {
    const PolicyGain& current = steps.back().gain;
    std::vector<VectorXd> states;
    states.reserve(states_per_iter);
    for (int s = 0; s < states_per_iter; ++s) {
      VectorXd x = gaussian_vector(problem.n(), rng);
      const double norm = x.norm();
      if (norm > 0.0) x /= norm;
      states.push_back(std::move(x));
    }
    auto policy_rows = synth_policy_rows(ds, current, states, cost, problem.gamma);
    rows.insert(rows.end(), std::make_move_iterator(policy_rows.begin()),
                std::make_move_iterator(policy_rows.end()));

    PiStep step;
    const LPInstance inst = build_lp(rows, problem.n());
    const LPSolution sol = solve_lp(inst);
    if (sol.status == LPStatus::Unbounded) {
      step.lp_unbounded = true;
      step.gap = kInf;
      step.gain = current;
      steps.push_back(std::move(step));
      break;
    }
    step.value = extract_value(sol, problem.n(), false);
    step.gap = optimality_gap(sol.objective_value, trace_star);
    step.gain = greedy_gain(problem, step.value);
    step.policy_gap = (step.gain.K - are.gain.K).cwiseAbs().maxCoeff();
    step.gain_change = (step.gain.K - current.K).cwiseAbs().maxCoeff();
    step.destabilized = closed_loop_radius(problem, step.gain) >= 1.0;
    const bool stop = step.destabilized || step.gain_change < config.pi_gain_tol;
    steps.push_back(std::move(step));
    if (stop) break;
  }
  return steps;
}

StochasticReport stochastic_experiment(const ExperimentConfig& config) {
  config.validate();
  const ControlProblem& problem = config.problem;
  const int n = problem.n();
  const int m = problem.m();
  const AreSolution are = solve_are(problem);
  const CostFn cost = cost_fn(problem.cost);

  // Fixed probe pair for the re-initialization comparisons.
  const VectorXd x_probe = VectorXd::Ones(n) / std::sqrt(static_cast<double>(n));
  const VectorXd u_probe = VectorXd::Ones(m) / std::sqrt(static_cast<double>(m));
  const MatrixXd H_probe = h_matrix(problem, x_probe, u_probe);
  const MatrixXd EG_probe = expected_g(problem, x_probe, u_probe);

  StochasticReport report;
  report.N_values = config.reinit_grid;
  for (size_t ni = 0; ni < config.reinit_grid.size(); ++ni) {
    const int N = config.reinit_grid[ni];
    std::vector<double> errA, errB, errC, errK;
    for (int run = 0; run < config.runs; ++run) {
      std::mt19937_64 rng(derive_seed(config.seed,
                                      static_cast<std::uint64_t>(run) * 1000 + ni));

      // Method A: Monte Carlo average of G with re-initialization.
      const ConstraintRow rowA = reinit_average_row(problem, x_probe, u_probe, N, rng);
      errA.push_back((row_coefficient_matrix(rowA) - EG_probe).norm());

      // Method B: sample-mean transition row over N re-initialized samples.
      MatrixXd Xrep(n, N), Urep(m, N);
      Xrep.colwise() = x_probe;
      Urep.colwise() = u_probe;
      const Dataset reinit_ds = collect_targeted(problem, Xrep, Urep, rng);
      const SampleMeanTriple means = sample_mean(reinit_ds);
      const double rhsB = std::max(0.0, stage_cost_eval(problem.cost, means.x_bar, means.u_bar));
      const ConstraintRow rowB = mean_transition_row(means, problem.gamma, rhsB);
      errB.push_back((row_coefficient_matrix(rowB) - H_probe).norm());

      // Method C: partition a long exploration dataset, average each group,
      // then synthesise rows from the averaged dataset. Each group explores
      // around its own base pair so the group mean stays O(1) while the
      // averaged noise decays like 1/sqrt(N); zero-mean exploration would
      // shrink the means at the same rate as the noise and the relative
      // error would never improve.
      const int total = N * config.avg_groups;
      MatrixXd Xs(n, total), Us(m, total);
      for (int g = 0; g < config.avg_groups; ++g) {
        const VectorXd base_x = gaussian_vector(n, rng);
        const VectorXd base_u = gaussian_vector(m, rng);
        for (int k = 0; k < N; ++k) {
          Xs.col(g * N + k) = base_x + gaussian_vector(n, rng);
          Us.col(g * N + k) = base_u + gaussian_vector(m, rng);
        }
      }
      const Dataset long_ds = collect_targeted(problem, Xs, Us, rng);
      const Dataset avg_ds = partition_and_average(long_ds, config.avg_groups, N);

      std::vector<double> probe_errors;
      for (int k = 0; k < config.err_probe_rows; ++k) {
        const VectorXd alpha =
            config.alpha_scale * gaussian_vector(avg_ds.length(), rng);
        const MatrixXd synth = synth_h(avg_ds, alpha, problem.gamma);
        const VectorXd z = avg_ds.stacked() * alpha;
        const MatrixXd model = h_matrix(problem, z.head(n), z.tail(m));
        probe_errors.push_back((synth - model).norm());
      }
      errC.push_back(median(std::move(probe_errors)));

      if (rank_condition(avg_ds)) {
        // Random rows bootstrap a gain; policy-targeted rows then refine it,
        // all synthesised from the averaged dataset within the same total
        // row budget of avg_synth_count.
        const int states_per_iter = 2 * (n + m);
        const int refine_iters =
            std::min(8, config.avg_synth_count / (2 * states_per_iter));
        const int bootstrap = config.avg_synth_count - refine_iters * states_per_iter;
        auto rows = synth_random_rows(avg_ds, cost, problem.gamma, bootstrap, rng,
                                      config.alpha_scale);
        double err = kInf;
        for (int it = 0; it <= refine_iters; ++it) {
          const LPSolution sol = solve_lp(build_lp(rows, n));
          if (sol.status != LPStatus::Optimal) break;
          const QuadraticValue v = extract_value(sol, n, false);
          const PolicyGain k_hat = greedy_gain(problem, v);
          err = (k_hat.K - are.gain.K).cwiseAbs().maxCoeff();
          if (it == refine_iters) break;
          std::vector<VectorXd> states(states_per_iter);
          for (auto& s : states) {
            s = gaussian_vector(n, rng);
            s.normalize();
          }
          auto extra = synth_policy_rows(avg_ds, k_hat, states, cost, problem.gamma);
          rows.insert(rows.end(), std::make_move_iterator(extra.begin()),
                      std::make_move_iterator(extra.end()));
        }
        errK.push_back(err);
      } else {
        errK.push_back(kInf);
      }
    }
    report.reinit_error.push_back(median(std::move(errA)));
    report.mean_row_error.push_back(median(std::move(errB)));
    report.averaged_error.push_back(median(std::move(errC)));
    report.policy_error.push_back(median(std::move(errK)));
  }
  return report;
}

}  // namespace ddlp
