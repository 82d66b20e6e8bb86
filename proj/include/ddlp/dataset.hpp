#pragma once

#include "ddlp/lqsystem.hpp"

#include <span>
#include <string>
#include <vector>

namespace ddlp {

// Column-stacked observations (x^k, u^k, x^{k+}) of a linear system.
struct Dataset {
  MatrixXd X;      // n x T
  MatrixXd U;      // m x T
  MatrixXd Xplus;  // n x T

  int n() const { return static_cast<int>(X.rows()); }
  int m() const { return static_cast<int>(U.rows()); }
  int length() const { return static_cast<int>(X.cols()); }

  // Stacked (n+m) x T matrix [X; U].
  MatrixXd stacked() const;

  void validate() const;  // consistent column counts, T >= 1
};

struct SampleMeanTriple {
  VectorXd x_bar;
  VectorXd u_bar;
  VectorXd xplus_bar;
};

// Chained rollout: column k holds (x^k, u^k, x^{k+1}).
Dataset collect_rollout(const ControlProblem& problem, const VectorXd& x0,
                        const MatrixXd& inputs, std::mt19937_64& rng);

// One independent transition per (state, input) column pair.
Dataset collect_targeted(const ControlProblem& problem, const MatrixXd& states,
                         const MatrixXd& inputs, std::mt19937_64& rng);

// Block Hankel matrix of depth L: block (i,j) = u^{i+j-1}, shape (mL) x (T-L+1).
MatrixXd hankel(const MatrixXd& inputs, int depth);

// True iff the depth-`order` Hankel matrix of the input sequence has full row
// rank m*order.
bool is_persistently_exciting(const MatrixXd& inputs, int order, double tol = -1.0);

// True iff rank [X; U] = n + m.
bool rank_condition(const Dataset& dataset, double tol = -1.0);

Dataset merge(std::span<const Dataset> datasets);

// Splits the columns into `groups` contiguous groups of `group_size` and
// replaces each group by its arithmetic mean.
Dataset partition_and_average(const Dataset& dataset, int groups, int group_size);

SampleMeanTriple sample_mean(const Dataset& dataset);

// CSV with header x_1..x_n,u_1..u_m,xp_1..xp_n, one observation per line,
// full decimal precision.
void write_dataset_csv(const Dataset& dataset, const std::string& path);
Dataset read_dataset_csv(const std::string& path);

}  // namespace ddlp
