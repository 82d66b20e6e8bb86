#include "helpers.hpp"

#include <doctest.h>

#include <array>
#include <cstdio>
#include <vector>

using namespace ddlp;
using testutil::paper_problem;

TEST_CASE("collect_rollout chains transitions") {
  const ControlProblem p = paper_problem();
  std::mt19937_64 rng(1);
  VectorXd x0(2);
  x0 << 1, 0;
  const Dataset ds = collect_rollout(p, x0, MatrixXd::Zero(1, 1), rng);
  CHECK(ds.length() == 1);
  CHECK(ds.X(0, 0) == 1.0);
  CHECK(ds.Xplus(0, 0) == doctest::Approx(1.0));
  CHECK(ds.Xplus(1, 0) == doctest::Approx(0.5));

  const Dataset zeros = collect_rollout(p, VectorXd::Zero(2), MatrixXd::Zero(1, 4), rng);
  CHECK(zeros.X.norm() == 0.0);
  CHECK(zeros.Xplus.norm() == 0.0);

  // Chaining: X column k+1 equals Xplus column k.
  const MatrixXd u = testutil::random_matrix(1, 6, rng);
  const Dataset chained = collect_rollout(p, x0, u, rng);
  CHECK((chained.X.rightCols(5) - chained.Xplus.leftCols(5)).norm() == 0.0);

  // Deterministic datasets satisfy Xplus = AX + BU to machine precision.
  CHECK((chained.Xplus - p.A * chained.X - p.B * chained.U).norm() < 1e-12);
}

TEST_CASE("collect_targeted produces independent columns") {
  const ControlProblem p = paper_problem();
  std::mt19937_64 rng(2);
  MatrixXd states = MatrixXd::Identity(2, 3).leftCols(3);
  states.setZero();
  states(0, 0) = 1;
  states(1, 1) = 1;
  MatrixXd inputs = MatrixXd::Zero(1, 3);
  inputs(0, 2) = 1;
  const Dataset ds = collect_targeted(p, states, inputs, rng);
  CHECK(rank_condition(ds));

  const Dataset zero = collect_targeted(p, MatrixXd::Zero(2, 1), MatrixXd::Zero(1, 1), rng);
  CHECK(zero.Xplus.norm() == 0.0);

  // Repeated pair with noise: columns differ almost surely.
  const ControlProblem noisy = paper_problem(1.0);
  MatrixXd xr = MatrixXd::Ones(2, 5), ur = MatrixXd::Ones(1, 5);
  const Dataset rep = collect_targeted(noisy, xr, ur, rng);
  CHECK((rep.Xplus.col(0) - rep.Xplus.col(1)).norm() > 1e-8);
}

TEST_CASE("hankel layout") {
  MatrixXd u(1, 4);
  u << 1, 2, 3, 4;
  const MatrixXd H = hankel(u, 2);
  CHECK(H.rows() == 2);
  CHECK(H.cols() == 3);
  MatrixXd expect(2, 3);
  expect << 1, 2, 3, 2, 3, 4;
  CHECK((H - expect).norm() == 0.0);

  CHECK((hankel(u, 1) - u).norm() == 0.0);

  std::mt19937_64 rng(3);
  const MatrixXd u2 = testutil::random_matrix(2, 3, rng);
  const MatrixXd H2 = hankel(u2, 2);
  CHECK(H2.rows() == 4);
  CHECK(H2.cols() == 2);
  CHECK((H2.block(0, 0, 2, 1) - u2.col(0)).norm() == 0.0);
  CHECK((H2.block(2, 1, 2, 1) - u2.col(2)).norm() == 0.0);

  CHECK_THROWS_AS(hankel(u, 5), std::invalid_argument);
}

TEST_CASE("persistence of excitation") {
  MatrixXd constant = MatrixXd::Ones(1, 3);
  CHECK_FALSE(is_persistently_exciting(constant, 2));

  // Random normal inputs of length n(m+1)+m are PE of order n+1 (m=1).
  std::mt19937_64 rng(4);
  const int n = 3, m = 1;
  const MatrixXd u = testutil::random_matrix(m, n * (m + 1) + m, rng);
  CHECK(is_persistently_exciting(u, n + 1));

  // T < L(m+1)-1 makes order L impossible.
  CHECK_FALSE(is_persistently_exciting(testutil::random_matrix(1, 4, rng), 4));
}

TEST_CASE("rank condition") {
  const ControlProblem p = paper_problem();
  std::mt19937_64 rng(5);
  const Dataset tiny = testutil::random_dataset(p, 2, rng);
  CHECK_FALSE(rank_condition(tiny));  // T < n+m

  const Dataset ds = testutil::random_dataset(p, 5, rng);
  CHECK(rank_condition(ds));

  // PE-order-(n+1) rollout of the controllable benchmark system.
  const MatrixXd u = testutil::random_matrix(1, 7, rng);
  REQUIRE(is_persistently_exciting(u, 3));
  const Dataset roll = collect_rollout(p, testutil::random_matrix(2, 1, rng), u, rng);
  CHECK(rank_condition(roll));
}

TEST_CASE("merge concatenates datasets") {
  const ControlProblem p = paper_problem();
  std::mt19937_64 rng(6);
  const Dataset a = testutil::random_dataset(p, 1, rng);
  const Dataset b = testutil::random_dataset(p, 1, rng);
  const Dataset ab = merge(std::array{a, b});
  CHECK(ab.length() == 2);
  CHECK((ab.X.col(0) - a.X.col(0)).norm() == 0.0);
  CHECK((ab.U.col(1) - b.U.col(0)).norm() == 0.0);

  const Dataset self = merge(std::array{a});
  CHECK((self.X - a.X).norm() == 0.0);

  // n+m rank-1 targeted datasets at basis pairs merge to a rank-sufficient set.
  std::vector<Dataset> parts;
  for (int k = 0; k < 3; ++k) {
    MatrixXd x = MatrixXd::Zero(2, 1), u = MatrixXd::Zero(1, 1);
    if (k < 2) x(k, 0) = 1.0;
    else u(0, 0) = 1.0;
    parts.push_back(collect_targeted(p, x, u, rng));
  }
  CHECK(rank_condition(merge(parts)));
}

TEST_CASE("partition_and_average") {
  const ControlProblem p = paper_problem();
  std::mt19937_64 rng(7);
  const Dataset ds = testutil::random_dataset(p, 6, rng);

  const Dataset same = partition_and_average(ds, 6, 1);
  CHECK((same.X - ds.X).norm() == 0.0);

  // Identical columns average to themselves.
  Dataset rep = ds;
  rep.X.col(1) = rep.X.col(0);
  rep.U.col(1) = rep.U.col(0);
  rep.Xplus.col(1) = rep.Xplus.col(0);
  const Dataset avg = partition_and_average(rep, 3, 2);
  CHECK((avg.X.col(0) - rep.X.col(0)).norm() < 1e-15);

  // Averaging commutes with deterministic dynamics.
  const Dataset avg2 = partition_and_average(ds, 2, 3);
  CHECK((avg2.Xplus - p.A * avg2.X - p.B * avg2.U).norm() < 1e-12);

  CHECK_THROWS_AS(partition_and_average(ds, 4, 2), std::invalid_argument);
}

TEST_CASE("sample_mean") {
  const ControlProblem p = paper_problem();
  std::mt19937_64 rng(8);
  const Dataset one = testutil::random_dataset(p, 1, rng);
  const SampleMeanTriple t1 = sample_mean(one);
  CHECK((t1.x_bar - one.X.col(0)).norm() == 0.0);

  Dataset opp = one;
  opp.X.conservativeResize(2, 2);
  opp.U.conservativeResize(1, 2);
  opp.Xplus.conservativeResize(2, 2);
  opp.X.col(1) = -opp.X.col(0);
  opp.U.col(1) = -opp.U.col(0);
  opp.Xplus.col(1) = -opp.Xplus.col(0);
  CHECK(sample_mean(opp).x_bar.norm() < 1e-15);
}

TEST_CASE("dataset CSV round trip is bit exact") {
  const ControlProblem p = paper_problem(0.3);
  std::mt19937_64 rng(9);
  const Dataset ds = testutil::random_dataset(p, 8, rng);
  const std::string path = "test_dataset_roundtrip.csv";
  write_dataset_csv(ds, path);
  const Dataset back = read_dataset_csv(path);
  CHECK((ds.X - back.X).norm() == 0.0);
  CHECK((ds.U - back.U).norm() == 0.0);
  CHECK((ds.Xplus - back.Xplus).norm() == 0.0);
  std::remove(path.c_str());
}
