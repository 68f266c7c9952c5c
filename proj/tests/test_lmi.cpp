#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "romkit/lmi.hpp"
#include "romkit/numeric.hpp"

using namespace romkit;

namespace {

// Exact scalar dataset for xdot = -x with a dead input channel.
TrajectoryBatch scalar_ct_batch() {
  TrajectoryBatch b;
  b.time_kind = TimeKind::Continuous;
  b.excitation = Excitation::Excited;
  b.T = 4;
  b.tau = 0.1;
  b.X.resize(1, 4);
  b.X << 1.0, 2.0, -1.0, 0.5;
  b.Xplus = -b.X;
  b.U.resize(1, 4);
  b.U << 0.3, -0.7, 0.2, 0.9;
  b.D = b.X;
  return b;
}

// Exact scalar dataset for x+ = 0.5 x (no input effect).
TrajectoryBatch scalar_dt_batch() {
  TrajectoryBatch b;
  b.time_kind = TimeKind::Discrete;
  b.excitation = Excitation::Excited;
  b.T = 3;
  b.X.resize(1, 3);
  b.X << 1.0, -2.0, 0.5;
  b.Xplus = 0.5 * b.X;
  b.U.resize(1, 3);
  b.U << 0.4, -0.1, 0.8;
  b.D = b.X;
  return b;
}

}  // namespace

TEST_CASE("scalar ct decay: feasible up to the critical rate") {
  const TrajectoryBatch batch = scalar_ct_batch();
  for (double khat : {0.5, 1.0, 1.9}) {
    const auto sol = lmi::solve(lmi::assemble_ct(batch, khat));
    CHECK(sol.Phi(0, 0) > 0);
    CHECK(sol.lmi_margin >= -1e-7);
    for (const auto& [name, value] : sol.equality_residuals)
      CHECK_MESSAGE(value < 1e-6, name);
  }
  // The critical rate itself is boundary-feasible.
  const auto boundary = lmi::solve(lmi::assemble_ct(batch, 2.0));
  CHECK(boundary.lmi_margin >= -1e-7);
}

TEST_CASE("scalar ct decay: infeasible beyond the critical rate") {
  const TrajectoryBatch batch = scalar_ct_batch();
  try {
    lmi::solve(lmi::assemble_ct(batch, 10.0));
    FAIL("expected infeasibility");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Infeasible);
    CHECK(std::string(e.what()).find("decay") != std::string::npos);
  }
}

TEST_CASE("scalar dt contraction at the boundary") {
  const TrajectoryBatch batch = scalar_dt_batch();
  const auto sol = lmi::solve(lmi::assemble_dt(batch, 0.5, 1.0));
  // kappa/(1+mu) = 0.25 exactly matches the squared one-step factor.
  CHECK(sol.lmi_margin >= -1e-7);
  CHECK(sol.Phi(0, 0) > 0);
  // A tighter contraction demand has no solution.
  CHECK_THROWS_AS(
      static_cast<void>(lmi::solve(lmi::assemble_dt(batch, 0.2, 1.0))), Error);
}

TEST_CASE("parameter validation") {
  const TrajectoryBatch ct = scalar_ct_batch();
  const TrajectoryBatch dt = scalar_dt_batch();
  CHECK_THROWS_AS(lmi::assemble_ct(dt, 1.0), Error);
  CHECK_THROWS_AS(lmi::assemble_dt(ct, 0.5, 1.0), Error);
  CHECK_THROWS_AS(lmi::assemble_ct(ct, -1.0), Error);
  CHECK_THROWS_AS(lmi::assemble_dt(dt, 1.5, 1.0), Error);  // kappa not in (0,1)
  CHECK_THROWS_AS(lmi::assemble_dt(dt, 0.5, -1.0), Error);
}

TEST_CASE("degenerate dictionary (d == n) has an empty Q2 block") {
  const TrajectoryBatch batch = scalar_ct_batch();
  const auto sol = lmi::solve(lmi::assemble_ct(batch, 1.0));
  CHECK(sol.Q2.rows() == batch.T);
  CHECK(sol.Q2.cols() == 0);
}

TEST_CASE("solution diagnostics are recomputed and trustworthy") {
  Rng rng(31);
  const int n = 2, T = 12;
  MatrixXd x(n, T), u(1, T);
  for (int k = 0; k < T; ++k) {
    x.col(k) = rng.normal_vector(n);
    u(0, k) = rng.normal();
  }
  MatrixXd a(n, n), b(n, 1);
  a << -1.0, 0.4, 0.0, -2.0;
  b << 1.0, 0.5;
  TrajectoryBatch batch;
  batch.time_kind = TimeKind::Continuous;
  batch.excitation = Excitation::Excited;
  batch.T = T;
  batch.X = x;
  batch.D = x;
  batch.U = u;
  batch.Xplus = a * x + b * u;

  const auto problem = lmi::assemble_ct(batch, 1.0);
  const auto sol = lmi::solve(problem);
  // Residuals must match an independent recomputation.
  const auto re = lmi::equality_residuals(problem, sol.Q2, sol.H, sol.Phi);
  for (const auto& [name, value] : sol.equality_residuals)
    CHECK(value == re.at(name));
  CHECK(sol.lmi_margin ==
        doctest::Approx(lmi::block_margin(problem, sol.H, sol.Phi)));
  // Phi is symmetric and clear of the floor.
  CHECK((sol.Phi - sol.Phi.transpose()).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(min_eigenvalue(sol.Phi) >= 0.5e-6);
}

TEST_CASE("dt block condition agrees with its Schur form on random instances") {
  Rng rng(77);
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(rng.raw() % 4);
    MatrixXd g(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) g(r, c) = rng.normal();
    const MatrixXd phi = g * g.transpose() + 0.1 * MatrixXd::Identity(n, n);
    MatrixXd m(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) m(r, c) = 0.6 * rng.normal();
    const double kappa = rng.uniform(0.05, 0.95);
    const double mu = rng.uniform(0.1, 3.0);

    MatrixXd blk(2 * n, 2 * n);
    blk.topLeftCorner(n, n) = phi / (1.0 + mu);
    blk.topRightCorner(n, n) = m;
    blk.bottomLeftCorner(n, n) = m.transpose();
    blk.bottomRightCorner(n, n) = kappa * phi;
    const double block_margin = min_eigenvalue(blk);

    MatrixXd phi_c = phi;
    const MatrixXd schur =
        kappa * phi - (1.0 + mu) * m.transpose() * phi_c.llt().solve(m);
    const double schur_margin = min_eigenvalue(schur);

    // Skip razor-edge instances where either test sits at zero.
    if (std::abs(block_margin) < 1e-9 || std::abs(schur_margin) < 1e-9)
      continue;
    ++checked;
    CHECK((block_margin >= 0) == (schur_margin >= -1e-6));
  }
  CHECK(checked >= 80);
}

TEST_CASE("ct gain cap bounds the closed-loop eigenvalues") {
  Rng rng(5);
  const int n = 2, T = 14;
  MatrixXd x(n, T), u(1, T);
  for (int k = 0; k < T; ++k) {
    x.col(k) = rng.normal_vector(n);
    u(0, k) = rng.normal();
  }
  MatrixXd a(n, n), b(n, 1);
  a << -1.0, 3.0, -2.0, -4.0;
  b << 1.0, 0.2;
  TrajectoryBatch batch;
  batch.time_kind = TimeKind::Continuous;
  batch.excitation = Excitation::Excited;
  batch.T = T;
  batch.X = x;
  batch.D = x;
  batch.U = u;
  batch.Xplus = a * x + b * u;

  const double cap = 12.0;
  const auto sol = lmi::solve(lmi::assemble_ct(batch, 1.0, cap));
  MatrixXd phi_c = sol.Phi;
  const MatrixXd p = phi_c.llt().solve(MatrixXd::Identity(n, n));
  const MatrixXd sp = spd_sqrt(0.5 * (p + p.transpose()));
  MatrixXd sp_c = sp;
  const MatrixXd spi = sp_c.llt().solve(MatrixXd::Identity(n, n));
  const MatrixXd q1 = sol.H * p;
  CHECK(spectral_norm(sp * (batch.Xplus * q1) * spi) <= cap * (1 + 1e-6));
}

TEST_CASE("triplet dump covers every constraint family") {
  const TrajectoryBatch batch = scalar_ct_batch();
  const auto problem = lmi::assemble_ct(batch, 1.0);
  const std::string path = "lmi_dump_test.txt";
  lmi::dump_problem(problem, path);
  std::ifstream in(path);
  REQUIRE(in.good());
  int eq = 0, lmi_lines = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("eq ", 0) == 0) ++eq;
    if (line.rfind("lmi ", 0) == 0) ++lmi_lines;
  }
  CHECK(eq > 0);
  CHECK(lmi_lines > 0);
  std::remove(path.c_str());
}
