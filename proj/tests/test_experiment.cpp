#include <doctest.h>

#include <cstdio>

#include "romkit/experiment.hpp"
#include "romkit/numeric.hpp"

using namespace romkit;

namespace {

ExperimentConfig small_config(int n, int m, int T) {
  ExperimentConfig c;
  c.T = T;
  c.tau = 0.01;
  c.seed = 99;
  c.input_lo = VectorXd::Constant(m, -2);
  c.input_hi = VectorXd::Constant(m, 2);
  c.x0_lo = VectorXd::Constant(n, -1);
  c.x0_hi = VectorXd::Constant(n, 1);
  return c;
}

// Row-reduction rank oracle, independent of the SVD path.
int gauss_rank(MatrixXd m) {
  const double tol = 1e-8 * std::max(1.0, m.cwiseAbs().maxCoeff());
  int rank = 0;
  for (int col = 0; col < m.cols() && rank < m.rows(); ++col) {
    int pivot = -1;
    double best = tol;
    for (int r = rank; r < m.rows(); ++r)
      if (std::abs(m(r, col)) > best) {
        best = std::abs(m(r, col));
        pivot = r;
      }
    if (pivot < 0) continue;
    m.row(pivot).swap(m.row(rank));
    for (int r = 0; r < m.rows(); ++r)
      if (r != rank) m.row(r) -= m(r, col) / m(rank, col) * m.row(rank);
    ++rank;
  }
  return rank;
}

}  // namespace

TEST_CASE("collection is bitwise reproducible and zero batches are zero") {
  const PlantModel plant = PlantModel::builtin(BenchmarkId::Dt10);
  const DictionarySpec spec = benchmark_dictionary(BenchmarkId::Dt10);
  ExperimentConfig cfg = small_config(10, 4, 30);

  const TrajectoryBatch a = collect(plant, spec, cfg);
  const TrajectoryBatch b = collect(plant, spec, cfg);
  CHECK(a.U == b.U);
  CHECK(a.X == b.X);
  CHECK(a.Xplus == b.Xplus);
  CHECK(a.data_hash() == b.data_hash());

  cfg.input_law = InputLaw::Zero;
  const TrajectoryBatch z = collect(plant, spec, cfg);
  CHECK(z.excitation == Excitation::ZeroInput);
  CHECK(z.U.cwiseAbs().maxCoeff() == 0.0);

  // Discrete successors reproduce the recursion bitwise.
  for (int k = 0; k < a.T; ++k)
    CHECK((a.Xplus.col(k) - plant.rhs(a.X.col(k), a.U.col(k)))
              .cwiseAbs()
              .maxCoeff() == 0.0);
  // Dictionary prefix carries the states exactly.
  CHECK(a.D.topRows(10) == a.X);
}

TEST_CASE("oracle-mode ct batches satisfy the data identity to 1e-12") {
  DictionarySpec spec = DictionarySpec::coordinates(2);
  MatrixXd a(2, 2), b(2, 1);
  a << -1, 0.5, 0, -2;
  b << 1, 0.3;
  const PlantModel plant =
      PlantModel::linear_in_dictionary(TimeKind::Continuous, a, b, spec);
  ExperimentConfig cfg = small_config(2, 1, 20);
  cfg.derivative_mode = DerivativeMode::Oracle;
  const TrajectoryBatch batch = collect(plant, spec, cfg);
  const MatrixXd residual = batch.Xplus - (a * batch.D + b * batch.U);
  CHECK(residual.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("rank report") {
  const RankReport ri = rank_report(MatrixXd::Identity(4, 4));
  CHECK(ri.full_row_rank);
  CHECK(ri.rank == 4);
  CHECK(ri.condition == doctest::Approx(1.0));

  MatrixXd repeated(3, 3);
  repeated.col(0) = VectorXd::Ones(3);
  repeated.col(1) = VectorXd::Ones(3);
  repeated.col(2) = VectorXd::Ones(3);
  const RankReport rr = rank_report(repeated);
  CHECK(rr.rank == 1);
  CHECK_FALSE(rr.full_row_rank);

  Rng rng(17);
  MatrixXd g(5, 20);
  for (int r = 0; r < 5; ++r)
    for (int c = 0; c < 20; ++c) g(r, c) = rng.normal();
  const RankReport rg = rank_report(g);
  CHECK(rg.full_row_rank);
  CHECK(rg.rank == gauss_rank(g));
}

TEST_CASE("right pseudoinverse") {
  CHECK((right_pinv(MatrixXd::Identity(3, 3)) - MatrixXd::Identity(3, 3))
            .cwiseAbs()
            .maxCoeff() < 1e-14);

  MatrixXd row(1, 2);
  row << 3, 4;
  const MatrixXd pinv = right_pinv(row);
  CHECK(pinv(0, 0) == doctest::Approx(0.12));
  CHECK(pinv(1, 0) == doctest::Approx(0.16));

  // Orthonormal rows invert by transposition.
  MatrixXd ortho(2, 3);
  ortho << 1, 0, 0, 0, 0, 1;
  CHECK((right_pinv(ortho) - ortho.transpose()).cwiseAbs().maxCoeff() < 1e-14);

  Rng rng(23);
  MatrixXd wide(6, 25);
  for (int r = 0; r < wide.rows(); ++r)
    for (int c = 0; c < wide.cols(); ++c) wide(r, c) = rng.normal();
  const MatrixXd m_pinv = right_pinv(wide);
  CHECK((wide * m_pinv - MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff() <
        1e-9);

  MatrixXd deficient(2, 4);
  deficient.row(0) << 1, 2, 3, 4;
  deficient.row(1) = 2.0 * deficient.row(0);
  CHECK_THROWS_WITH_AS(static_cast<void>(right_pinv(deficient)),
                       doctest::Contains("d+1 samples"), Error);
}

TEST_CASE("Qbar solve") {
  const int d = 4;
  const QbarSolution ident = solve_qbar(MatrixXd::Identity(d, d), 2);
  CHECK((ident.Qbar - MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(ident.Qbar1.cols() == 2);
  CHECK(ident.Qbar2.cols() == 2);

  // [I | I] has pseudoinverse [I; I]/2.
  MatrixXd twice(d, 2 * d);
  twice << MatrixXd::Identity(d, d), MatrixXd::Identity(d, d);
  const QbarSolution half = solve_qbar(twice, 2);
  CHECK((half.Qbar.topRows(d) - 0.5 * MatrixXd::Identity(d, d))
            .cwiseAbs()
            .maxCoeff() < 1e-12);
  CHECK((half.Qbar.bottomRows(d) - 0.5 * MatrixXd::Identity(d, d))
            .cwiseAbs()
            .maxCoeff() < 1e-12);

  // Collected zero-input benchmark data: residual under 1e-9. A single
  // free orbit decays too fast to span the dictionary, so the batch is
  // collected in one-step segments from fresh initial conditions.
  const PlantModel plant = PlantModel::builtin(BenchmarkId::Dt10);
  const DictionarySpec spec = benchmark_dictionary(BenchmarkId::Dt10);
  ExperimentConfig cfg = small_config(10, 4, 2 * (spec.size() + 1));
  cfg.input_law = InputLaw::Zero;
  cfg.restart_every = 1;
  cfg.x0_lo = VectorXd::Constant(10, -3);
  cfg.x0_hi = VectorXd::Constant(10, 3);
  const TrajectoryBatch z = collect(plant, spec, cfg);
  const QbarSolution q = solve_qbar(z.D, 10);
  CHECK(q.residual < 1e-9);
}

TEST_CASE("trajectory CSV round-trips bit-exactly") {
  const PlantModel plant = PlantModel::builtin(BenchmarkId::PendulumCt);
  const DictionarySpec spec = benchmark_dictionary(BenchmarkId::PendulumCt);
  ExperimentConfig cfg = small_config(4, 2, 15);
  cfg.tau = 0.05;
  const TrajectoryBatch batch = collect(plant, spec, cfg);

  const std::string path = "test_batch_roundtrip.csv";
  export_batch_csv(batch, path);
  const TrajectoryBatch back = import_batch_csv(path, spec, &plant);
  CHECK(back.T == batch.T);
  CHECK(back.tau == batch.tau);
  CHECK(back.U == batch.U);
  CHECK(back.X == batch.X);
  CHECK(back.Xplus == batch.Xplus);
  CHECK(back.D == batch.D);
  CHECK(back.data_hash() == batch.data_hash());

  // A different dictionary must be rejected.
  CHECK_THROWS_AS(
      import_batch_csv(path, benchmark_dictionary(BenchmarkId::Dt10), &plant),
      Error);
  std::remove(path.c_str());
  std::remove((path + ".meta").c_str());
}

TEST_CASE("oracle-mode export restores the exact derivative samples") {
  const PlantModel plant = PlantModel::builtin(BenchmarkId::PendulumCt);
  const DictionarySpec spec = benchmark_dictionary(BenchmarkId::PendulumCt);
  ExperimentConfig cfg = small_config(4, 2, 15);
  cfg.tau = 0.05;
  cfg.derivative_mode = DerivativeMode::Oracle;
  const TrajectoryBatch batch = collect(plant, spec, cfg);

  const std::string path = "test_batch_oracle.csv";
  export_batch_csv(batch, path);
  const TrajectoryBatch back = import_batch_csv(path, spec, &plant);
  CHECK(back.Xplus == batch.Xplus);
  CHECK_THROWS_AS(import_batch_csv(path, spec, nullptr), Error);
  std::remove(path.c_str());
  std::remove((path + ".meta").c_str());
}
