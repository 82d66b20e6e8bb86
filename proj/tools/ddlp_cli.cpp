// Command-line surface for dataset collection, constraint synthesis, stage
// cost reconstruction, LP solving and the experiment harnesses.

#include "ddlp/io.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  std::int64_t seed_override = -1;
  int runs_override = -1;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "Config file (JSON)")->required();
  cmd->add_option("--out", opts.out_dir, "Output directory")->required();
  cmd->add_option("--seed", opts.seed_override, "Seed override");
  cmd->add_option("--runs", opts.runs_override, "Runs override (experiments)");
}

ddlp::CliConfig load(const CommonOpts& opts) {
  ddlp::CliConfig cfg = ddlp::load_config(opts.config_path);
  if (opts.seed_override >= 0) {
    cfg.seed = static_cast<std::uint64_t>(opts.seed_override);
    cfg.experiment.seed = cfg.seed;
  }
  if (opts.runs_override > 0) cfg.experiment.runs = opts.runs_override;
  return cfg;
}

std::string out_path(const CommonOpts& opts, const std::string& name) {
  fs::create_directories(opts.out_dir);
  return (fs::path(opts.out_dir) / name).string();
}

ddlp::RunManifest start_manifest(const std::string& command, const CommonOpts& opts,
                                 std::uint64_t seed) {
  ddlp::RunManifest manifest;
  manifest.command = command;
  manifest.config_path = opts.config_path;
  manifest.seed = seed;
  return manifest;
}

void write_csv_line(std::ofstream& out, const std::vector<std::string>& fields) {
  for (size_t i = 0; i < fields.size(); ++i) out << (i ? "," : "") << fields[i];
  out << "\n";
}

int achieved_pe_order(const ddlp::MatrixXd& inputs) {
  int order = 0;
  for (int L = 1; L <= inputs.cols(); ++L) {
    if (ddlp::is_persistently_exciting(inputs, L)) order = L;
    else break;
  }
  return order;
}

int cmd_explore(const CommonOpts& opts) {
  const ddlp::CliConfig cfg = load(opts);
  std::mt19937_64 rng(cfg.seed);
  ddlp::MatrixXd inputs(cfg.problem.m(), cfg.explore_length);
  for (int k = 0; k < cfg.explore_length; ++k) {
    inputs.col(k) = cfg.explore_input_scale * ddlp::gaussian_vector(cfg.problem.m(), rng);
  }
  const ddlp::Dataset ds = ddlp::collect_rollout(cfg.problem, cfg.explore_x0, inputs, rng);

  auto manifest = start_manifest("explore", opts, cfg.seed);
  const std::string data_path = out_path(opts, "dataset.csv");
  ddlp::write_dataset_csv(ds, data_path);
  manifest.outputs.push_back(data_path);

  const int pe = achieved_pe_order(inputs);
  const bool rank_ok = ddlp::rank_condition(ds);
  std::cout << "persistence of excitation: order " << pe << " achieved (order "
            << cfg.problem.n() + 1 << " wanted)\n"
            << "rank condition rank[X;U] = n+m: " << (rank_ok ? "satisfied" : "NOT satisfied")
            << "\n";
  manifest.extra = json{{"pe_order", pe}, {"rank_condition", rank_ok}};
  manifest.finish_and_write(out_path(opts, "manifest.json"));
  return 0;
}

int cmd_targeted(const CommonOpts& opts) {
  const ddlp::CliConfig cfg = load(opts);
  if (cfg.targeted_states.size() == 0) {
    throw std::invalid_argument("targeted: config must provide targeted.states/inputs");
  }
  std::mt19937_64 rng(cfg.seed);
  const ddlp::Dataset ds =
      ddlp::collect_targeted(cfg.problem, cfg.targeted_states, cfg.targeted_inputs, rng);

  auto manifest = start_manifest("targeted", opts, cfg.seed);
  const std::string data_path = out_path(opts, "dataset.csv");
  ddlp::write_dataset_csv(ds, data_path);
  manifest.outputs.push_back(data_path);
  const bool rank_ok = ddlp::rank_condition(ds);
  std::cout << "rank condition: " << (rank_ok ? "satisfied" : "NOT satisfied") << "\n";
  manifest.extra = json{{"rank_condition", rank_ok}};
  manifest.finish_and_write(out_path(opts, "manifest.json"));
  return 0;
}

int cmd_synth(const CommonOpts& opts, const std::string& data_path, int count_override) {
  const ddlp::CliConfig cfg = load(opts);
  const ddlp::Dataset ds = ddlp::read_dataset_csv(data_path);
  if (!ddlp::rank_condition(ds)) {
    throw ddlp::RankError(
        "synth: dataset violates rank[X;U] = n+m; collect more data "
        "(longer or richer exploration) and retry");
  }
  const int count = count_override >= 0 ? count_override : cfg.synth_count;
  std::mt19937_64 rng(cfg.seed);
  const auto rows = ddlp::synth_random_rows(ds, ddlp::cost_fn(cfg.problem.cost),
                                            cfg.problem.gamma, count, rng,
                                            cfg.experiment.alpha_scale);

  auto manifest = start_manifest("synth", opts, cfg.seed);
  const std::string rows_path = out_path(opts, "constraints.csv");
  ddlp::write_rows_csv(rows, rows_path);
  manifest.outputs.push_back(rows_path);
  manifest.extra = json{{"count", count}};
  manifest.finish_and_write(out_path(opts, "manifest.json"));
  std::cout << "wrote " << count << " synthetic constraints\n";
  return 0;
}

int cmd_stagecost(const CommonOpts& opts, const std::string& data_path) {
  const ddlp::CliConfig cfg = load(opts);
  const ddlp::Dataset ds = ddlp::read_dataset_csv(data_path);
  const ddlp::MatrixXd Z = ddlp::select_square_basis(ds);
  const auto probes = ddlp::probe_requirements(Z);

  const int n = cfg.problem.n();
  const int m = cfg.problem.m();
  std::vector<double> costs;
  costs.reserve(probes.size());
  for (const ddlp::VectorXd& z : probes) {
    costs.push_back(ddlp::stage_cost_eval(cfg.problem.cost, z.head(n), z.tail(m)));
  }
  const ddlp::ReconstructedCost recon = ddlp::build_L_XU(Z, costs);
  const ddlp::StageCost recovered = ddlp::recover_L(recon, n, m);

  auto manifest = start_manifest("stagecost", opts, cfg.seed);
  const std::string probes_path = out_path(opts, "probes.csv");
  {
    std::ofstream out(probes_path);
    for (int i = 0; i < n; ++i) out << "x_" << (i + 1) << ",";
    for (int i = 0; i < m; ++i) out << "u_" << (i + 1) << ",";
    out << "cost\n";
    for (size_t k = 0; k < probes.size(); ++k) {
      for (int i = 0; i < n + m; ++i) out << ddlp::format_double(probes[k](i)) << ",";
      out << ddlp::format_double(costs[k]) << "\n";
    }
  }
  manifest.outputs.push_back(probes_path);

  const std::string l_path = out_path(opts, "recovered_cost.json");
  {
    json j;
    j["L"] = ddlp::matrix_to_json(recovered.L);
    j["L_XU"] = ddlp::matrix_to_json(recon.L_XU);
    j["Z"] = ddlp::matrix_to_json(recon.Z);
    j["z_condition"] = recon.z_condition;
    j["probe_count"] = probes.size();
    std::ofstream out(l_path);
    out << j.dump(2) << "\n";
  }
  manifest.outputs.push_back(l_path);
  manifest.extra = json{{"z_condition", recon.z_condition}};
  manifest.finish_and_write(out_path(opts, "manifest.json"));
  std::cout << "reconstructed stage cost from " << probes.size()
            << " probes (cond(Z) = " << recon.z_condition << ")\n";
  return 0;
}

int cmd_solve(const CommonOpts& opts, const std::string& rows_path, bool include_e) {
  const ddlp::CliConfig cfg = load(opts);
  const auto rows = ddlp::read_rows_csv(rows_path);
  const ddlp::LPInstance inst =
      ddlp::build_lp(rows, cfg.problem.n(), include_e, cfg.problem.gamma);
  const ddlp::LPSolution sol = ddlp::solve_lp(inst);

  json j;
  auto manifest = start_manifest("solve", opts, cfg.seed);
  if (sol.status == ddlp::LPStatus::Optimal) {
    const ddlp::QuadraticValue v = ddlp::extract_value(sol, cfg.problem.n(), include_e);
    j["status"] = "optimal";
    j["P"] = ddlp::matrix_to_json(v.P);
    j["e"] = v.e;
    j["objective"] = sol.objective_value;
    json active = json::array();
    for (const auto& [idx, prov] : ddlp::support_constraints(inst, sol)) {
      active.push_back({{"row", idx}, {"provenance", ddlp::provenance_name(prov)}});
    }
    j["active_set"] = active;
    try {
      j["optimality_gap"] = ddlp::optimality_gap(cfg.problem, v);
      j["frobenius_gap"] = ddlp::frobenius_gap(cfg.problem, v);
    } catch (const ddlp::DivergenceError&) {
      // No Riccati ground truth for this system; omit the gap fields.
    }
  } else {
    j["status"] = "unbounded";
    j["ray"] = std::vector<double>(sol.ray.data(), sol.ray.data() + sol.ray.size());
  }
  j["iterations"] = sol.iterations;

  const std::string sol_path = out_path(opts, "solution.json");
  std::ofstream out(sol_path);
  out << j.dump(2) << "\n";
  manifest.outputs.push_back(sol_path);
  manifest.finish_and_write(out_path(opts, "manifest.json"));
  std::cout << "status: " << j["status"].get<std::string>() << "\n";
  return 0;
}

int cmd_fig1(const CommonOpts& opts) {
  const ddlp::CliConfig cfg = load(opts);
  const ddlp::GapCurve curve = ddlp::fig1_experiment(cfg.experiment);

  auto manifest = start_manifest("fig1", opts, cfg.seed);
  const std::string curve_path = out_path(opts, "fig1_curve.csv");
  {
    std::ofstream out(curve_path);
    out << "constraints,median_gap,majority_unbounded\n";
    for (size_t c = 0; c < curve.constraint_counts.size(); ++c) {
      out << curve.constraint_counts[c] << ","
          << ddlp::format_double(curve.median_gaps[c]) << ","
          << (curve.majority_unbounded[c] ? 1 : 0) << "\n";
    }
  }
  manifest.outputs.push_back(curve_path);

  const std::string runs_path = out_path(opts, "fig1_runs.csv");
  {
    std::ofstream out(runs_path);
    out << "run,constraints,gap,objective\n";
    for (int r = 0; r < curve.gaps.rows(); ++r) {
      for (size_t c = 0; c < curve.constraint_counts.size(); ++c) {
        out << r << "," << curve.constraint_counts[c] << ","
            << ddlp::format_double(curve.gaps(r, static_cast<int>(c))) << ","
            << ddlp::format_double(curve.objectives(r, static_cast<int>(c))) << "\n";
      }
    }
  }
  manifest.outputs.push_back(runs_path);
  manifest.extra = json{{"runs", cfg.experiment.runs},
                        {"final_median_gap", curve.median_gaps.back()}};
  manifest.finish_and_write(out_path(opts, "manifest.json"));
  std::cout << "median gap at " << curve.constraint_counts.front() << " constraints: "
            << curve.median_gaps.front() << "\n"
            << "median gap at " << curve.constraint_counts.back() << " constraints: "
            << curve.median_gaps.back() << "\n";
  return 0;
}

int cmd_fig2(const CommonOpts& opts) {
  ddlp::CliConfig cfg = load(opts);
  const ddlp::SupportReport report = ddlp::fig2_experiment(cfg.experiment);

  auto manifest = start_manifest("fig2", opts, cfg.seed);
  const std::string sols_path = out_path(opts, "fig2_solutions.csv");
  {
    std::ofstream out(sols_path);
    out << "stage,status,p11,p12,p22,objective,gap\n";
    auto emit = [&](int stage, const ddlp::LPSolution& sol, double gap) {
      if (sol.status == ddlp::LPStatus::Optimal) {
        out << stage << ",optimal," << ddlp::format_double(sol.y(0)) << ","
            << ddlp::format_double(sol.y(1)) << "," << ddlp::format_double(sol.y(2))
            << "," << ddlp::format_double(sol.objective_value) << ","
            << ddlp::format_double(gap) << "\n";
      } else {
        out << stage << ",unbounded,,,,," << "\n";
      }
    };
    emit(1, report.first, report.first_gap);
    emit(2, report.second, report.second_gap);
  }
  manifest.outputs.push_back(sols_path);

  const std::string support_path = out_path(opts, "fig2_support.csv");
  {
    std::ofstream out(support_path);
    out << "stage,row,provenance,c_p11,c_p12,c_p22,rhs\n";
    auto emit = [&](int stage, const ddlp::LPInstance& inst, const ddlp::LPSolution& sol) {
      if (sol.status != ddlp::LPStatus::Optimal) return;
      for (const auto& [idx, prov] : ddlp::support_constraints(inst, sol)) {
        out << stage << "," << idx << "," << ddlp::provenance_name(prov);
        for (int j = 0; j < inst.dim; ++j) out << "," << ddlp::format_double(inst.A(idx, j));
        out << "," << ddlp::format_double(inst.b(idx)) << "\n";
      }
    };
    emit(1, report.first_instance, report.first);
    emit(2, report.second_instance, report.second);
  }
  manifest.outputs.push_back(support_path);

  const std::string values_path = out_path(opts, "fig2_values.csv");
  {
    std::ofstream out(values_path);
    out << "theta,v_observed_only,v_with_synthetic,v_star\n";
    for (int k = 0; k < report.value_slice.rows(); ++k) {
      for (int j = 0; j < 4; ++j) {
        out << (j ? "," : "") << ddlp::format_double(report.value_slice(k, j));
      }
      out << "\n";
    }
  }
  manifest.outputs.push_back(values_path);
  manifest.finish_and_write(out_path(opts, "manifest.json"));
  std::cout << "stage 1 gap: " << report.first_gap << ", stage 2 gap: "
            << report.second_gap << "\n";
  return 0;
}

int cmd_pi(const CommonOpts& opts) {
  const ddlp::CliConfig cfg = load(opts);
  const auto steps = ddlp::pi_experiment(cfg.experiment, cfg.experiment.pi_iterations);

  auto manifest = start_manifest("pi", opts, cfg.seed);
  const std::string steps_path = out_path(opts, "pi_steps.csv");
  {
    std::ofstream out(steps_path);
    out << "iteration,gap,policy_gap,gain_change,lp_unbounded,destabilized\n";
    for (size_t t = 0; t < steps.size(); ++t) {
      out << t << "," << ddlp::format_double(steps[t].gap) << ","
          << ddlp::format_double(steps[t].policy_gap) << ","
          << ddlp::format_double(steps[t].gain_change) << ","
          << (steps[t].lp_unbounded ? 1 : 0) << ","
          << (steps[t].destabilized ? 1 : 0) << "\n";
    }
  }
  manifest.outputs.push_back(steps_path);
  manifest.finish_and_write(out_path(opts, "manifest.json"));
  std::cout << "policy iteration finished after "
            << (steps.empty() ? 0 : static_cast<int>(steps.size()) - 1)
            << " iterations, final policy gap "
            << (steps.empty() ? 0.0 : steps.back().policy_gap) << "\n";
  return 0;
}

int cmd_stochastic(const CommonOpts& opts) {
  const ddlp::CliConfig cfg = load(opts);
  const ddlp::StochasticReport report = ddlp::stochastic_experiment(cfg.experiment);

  auto manifest = start_manifest("stochastic", opts, cfg.seed);
  const std::string errors_path = out_path(opts, "stochastic_errors.csv");
  {
    std::ofstream out(errors_path);
    out << "N,reinit_error,mean_row_error,averaged_error,policy_error\n";
    for (size_t k = 0; k < report.N_values.size(); ++k) {
      out << report.N_values[k] << "," << ddlp::format_double(report.reinit_error[k])
          << "," << ddlp::format_double(report.mean_row_error[k]) << ","
          << ddlp::format_double(report.averaged_error[k]) << ","
          << ddlp::format_double(report.policy_error[k]) << "\n";
    }
  }
  manifest.outputs.push_back(errors_path);
  manifest.extra = json{{"runs", cfg.experiment.runs}};
  manifest.finish_and_write(out_path(opts, "manifest.json"));
  std::cout << "wrote stochastic estimation errors for " << report.N_values.size()
            << " values of N\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Data-driven LP approach to LQ optimal control"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string data_path;
  int count_override = -1;
  bool include_e = false;

  auto* explore = app.add_subcommand("explore", "Collect a rollout dataset");
  add_common(explore, opts);
  auto* targeted = app.add_subcommand("targeted", "Collect a targeted dataset");
  add_common(targeted, opts);
  auto* synth = app.add_subcommand("synth", "Synthesise constraints from a dataset");
  add_common(synth, opts);
  synth->add_option("--data", data_path, "Dataset CSV")->required();
  synth->add_option("--count", count_override, "Number of synthetic rows");
  auto* stagecost = app.add_subcommand("stagecost", "Reconstruct the stage cost");
  add_common(stagecost, opts);
  stagecost->add_option("--data", data_path, "Dataset CSV")->required();
  auto* solve = app.add_subcommand("solve", "Solve the LP over a constraint set");
  add_common(solve, opts);
  solve->add_option("--data", data_path, "Constraints CSV")->required();
  solve->add_flag("--include-e", include_e, "Include the constant offset variable e");
  auto* fig1 = app.add_subcommand("fig1", "Gap-vs-constraints experiment");
  add_common(fig1, opts);
  auto* fig2 = app.add_subcommand("fig2", "Support-constraint comparison (n = 2)");
  add_common(fig2, opts);
  auto* pi = app.add_subcommand("pi", "Policy iteration via targeted synthesis");
  add_common(pi, opts);
  auto* stochastic = app.add_subcommand("stochastic", "Stochastic estimation comparison");
  add_common(stochastic, opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (explore->parsed()) return cmd_explore(opts);
    if (targeted->parsed()) return cmd_targeted(opts);
    if (synth->parsed()) return cmd_synth(opts, data_path, count_override);
    if (stagecost->parsed()) return cmd_stagecost(opts, data_path);
    if (solve->parsed()) return cmd_solve(opts, data_path, include_e);
    if (fig1->parsed()) return cmd_fig1(opts);
    if (fig2->parsed()) return cmd_fig2(opts);
    if (pi->parsed()) return cmd_pi(opts);
    if (stochastic->parsed()) return cmd_stochastic(opts);
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
