#include <doctest.h>

#include <cmath>

#include "romkit/mor_dt.hpp"
#include "romkit/numeric.hpp"
#include "romkit/synthesis.hpp"

using namespace romkit;

namespace {

Box box2(double lx, double ly, double hx, double hy) {
  Box b;
  b.lo = VectorXd(2);
  b.hi = VectorXd(2);
  b.lo << lx, ly;
  b.hi << hx, hy;
  return b;
}

Reduction toy_rom(TimeKind kind, const MatrixXd& ahat, const MatrixXd& bhat) {
  Reduction red;
  red.time_kind = kind;
  red.n = 2;
  red.m = 2;
  red.d = 2;
  red.nhat = 2;
  red.mhat = 2;
  red.Ahat = ahat;
  red.Bhat = bhat;
  red.R1 = MatrixXd::Identity(2, 2);
  red.Chat = red.R1;
  return red;
}

ReachAvoidProblem small_problem() {
  ReachAvoidProblem p;
  p.state_box = box2(0, 0, 10, 10);
  p.initial_box = box2(0.5, 0.5, 1.5, 1.5);
  p.target_box = box2(8, 8, 10, 10);
  p.input_box = box2(-1, -1, 1, 1);
  p.state_cells[0] = p.state_cells[1] = 64;
  p.input_cells[0] = p.input_cells[1] = 5;
  p.horizon = 500;
  p.sample_time = 0.5;
  return p;
}

}  // namespace

TEST_CASE("identity hold: zero dynamics map every cell onto itself") {
  const Reduction red =
      toy_rom(TimeKind::Continuous, MatrixXd::Zero(2, 2), MatrixXd::Zero(2, 2));
  const ReachAvoidProblem prob = small_problem();
  const RomAbstraction abs = abstract_rom(red, prob);
  // exp(0) = I, G = 0.
  CHECK((abs.F - MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(abs.G.cwiseAbs().maxCoeff() < 1e-12);
  const size_t ni = abs.inputs.size();
  for (int probe = 0; probe < 20; ++probe) {
    const int i = 3 + probe, j = 40 - probe;
    const size_t idx = (static_cast<size_t>(j) * abs.nx + i) * ni;
    REQUIRE(abs.lo_i[idx] >= 0);
    CHECK(abs.lo_i[idx] <= i);
    CHECK(abs.hi_i[idx] >= i);
    CHECK(abs.lo_j[idx] <= j);
    CHECK(abs.hi_j[idx] >= j);
  }
}

TEST_CASE("pure translation: successor box is the shifted cell") {
  const Reduction red =
      toy_rom(TimeKind::Discrete, MatrixXd::Zero(2, 2), MatrixXd::Identity(2, 2));
  ReachAvoidProblem prob = small_problem();
  prob.input_box = box2(2, 3, 2, 3);  // a single input value (2, 3)
  prob.input_cells[0] = prob.input_cells[1] = 1;
  const RomAbstraction abs = abstract_rom(red, prob);
  // F = 0: successors collapse to the point u, inflated by the grid.
  const int i = 10, j = 10;
  const size_t idx = static_cast<size_t>(j) * abs.nx + i;
  REQUIRE(abs.lo_i[idx] >= 0);
  const double hx = abs.hx, hy = abs.hy;
  CHECK(abs.lo_i[idx] == static_cast<int>(std::floor((2 - 0.5 * hx) / hx)));
  CHECK(abs.hi_i[idx] == static_cast<int>(std::floor((2 + 0.5 * hx) / hx)));
  CHECK(abs.lo_j[idx] == static_cast<int>(std::floor((3 - 0.5 * hy) / hy)));
  CHECK(abs.hi_j[idx] == static_cast<int>(std::floor((3 + 0.5 * hy) / hy)));
}

TEST_CASE("abstraction soundness on sampled pairs") {
  MatrixXd ahat(2, 2), bhat(2, 2);
  ahat << 0.98, 0.05, -0.03, 0.97;
  bhat << 0.2, 0.0, 0.05, 0.25;
  const Reduction red = toy_rom(TimeKind::Discrete, ahat, bhat);
  const ReachAvoidProblem prob = small_problem();
  const RomAbstraction abs = abstract_rom(red, prob);
  const size_t ni = abs.inputs.size();

  Rng rng(71);
  int tested = 0;
  for (int s = 0; s < 10000; ++s) {
    const int i = static_cast<int>(rng.raw() % abs.nx);
    const int j = static_cast<int>(rng.raw() % abs.ny);
    const size_t u = rng.raw() % ni;
    const size_t idx = (static_cast<size_t>(j) * abs.nx + i) * ni + u;
    if (abs.lo_i[idx] < 0) continue;
    ++tested;
    // Random point inside the cell.
    VectorXd x(2);
    x << abs.state_box.lo(0) + (i + rng.uniform01()) * abs.hx,
        abs.state_box.lo(1) + (j + rng.uniform01()) * abs.hy;
    const VectorXd next = abs.F * x + abs.G * abs.inputs[u];
    const int ni_cell =
        static_cast<int>(std::floor((next(0) - abs.state_box.lo(0)) / abs.hx));
    const int nj_cell =
        static_cast<int>(std::floor((next(1) - abs.state_box.lo(1)) / abs.hy));
    CHECK(ni_cell >= abs.lo_i[idx]);
    CHECK(ni_cell <= abs.hi_i[idx]);
    CHECK(nj_cell >= abs.lo_j[idx]);
    CHECK(nj_cell <= abs.hi_j[idx]);
  }
  CHECK(tested > 5000);
}

TEST_CASE("reduced models above two dimensions are rejected") {
  Reduction red = toy_rom(TimeKind::Discrete, MatrixXd::Identity(2, 2),
                          MatrixXd::Identity(2, 2));
  red.nhat = 3;
  CHECK_THROWS_WITH_AS(abstract_rom(red, small_problem()),
                       doctest::Contains("2-dimensional"), Error);
}

TEST_CASE("target covering the whole box wins everywhere") {
  MatrixXd bhat = 0.3 * MatrixXd::Identity(2, 2);
  const Reduction red = toy_rom(TimeKind::Discrete, MatrixXd::Identity(2, 2), bhat);
  ReachAvoidProblem prob = small_problem();
  prob.target_box = prob.state_box;
  const RomAbstraction abs = abstract_rom(red, prob);
  const ControllerTable tab = synthesize(abs, prob, 0.0);
  CHECK(tab.winning_count == tab.nx * tab.ny);
  CHECK(tab.initial_covered);
}

TEST_CASE("a surrounded target loses the initial cells") {
  MatrixXd bhat = 0.3 * MatrixXd::Identity(2, 2);
  const Reduction red = toy_rom(TimeKind::Discrete, MatrixXd::Identity(2, 2), bhat);
  ReachAvoidProblem prob = small_problem();
  prob.obstacle_boxes = {box2(7, 7, 10.0, 7.5), box2(7, 7, 7.5, 10.0)};
  const RomAbstraction abs = abstract_rom(red, prob);
  const ControllerTable tab = synthesize(abs, prob, 0.0);
  CHECK_FALSE(tab.initial_covered);

  // Inflation that swallows the target is diagnosed.
  CHECK_THROWS_WITH_AS(synthesize(abs, prob, 5.0),
                       doctest::Contains("swallow"), Error);
}

TEST_CASE("ranks decrease along the controller, so runs reach the target") {
  MatrixXd bhat = 0.3 * MatrixXd::Identity(2, 2);
  const Reduction red = toy_rom(TimeKind::Discrete, MatrixXd::Identity(2, 2), bhat);
  ReachAvoidProblem prob = small_problem();
  prob.obstacle_boxes = {box2(4, 0, 5, 7)};
  const RomAbstraction abs = abstract_rom(red, prob);
  const ControllerTable tab = synthesize(abs, prob, 0.3);
  CHECK(tab.initial_covered);
  CHECK(tab.winning_count > 0);

  const size_t ni = abs.inputs.size();
  for (int j = 0; j < tab.ny; ++j)
    for (int i = 0; i < tab.nx; ++i) {
      const size_t c = static_cast<size_t>(j) * tab.nx + i;
      if (tab.input_of_cell[c] < 0 || tab.target_cell[c]) continue;
      const size_t idx = c * ni + tab.input_of_cell[c];
      REQUIRE(abs.lo_i[idx] >= 0);
      const int own = tab.rank_of_cell[c];
      for (int jj = abs.lo_j[idx]; jj <= abs.hi_j[idx]; ++jj)
        for (int ii = abs.lo_i[idx]; ii <= abs.hi_i[idx]; ++ii) {
          const size_t cc = static_cast<size_t>(jj) * tab.nx + ii;
          CHECK(tab.input_of_cell[cc] >= 0);
          CHECK(tab.rank_of_cell[cc] < own);
        }
    }
}

TEST_CASE("refined run on a fully actuated discrete plant") {
  // Plant x+ = x + u over the coordinate dictionary; the pipeline gives
  // an exact interface so the refined run mirrors the reduced run.
  DictionarySpec spec = DictionarySpec::coordinates(2);
  MatrixXd a = MatrixXd::Identity(2, 2);
  MatrixXd b = MatrixXd::Identity(2, 2);
  const PlantModel plant =
      PlantModel::linear_in_dictionary(TimeKind::Discrete, a, b, spec);
  ExperimentConfig cfg;
  cfg.T = 10;
  cfg.seed = 2;
  cfg.input_lo = VectorXd::Constant(2, -1);
  cfg.input_hi = VectorXd::Constant(2, 1);
  cfg.x0_lo = VectorXd::Constant(2, -1);
  cfg.x0_hi = VectorXd::Constant(2, 1);
  const TrajectoryBatch excited = collect(plant, spec, cfg);
  cfg.input_law = InputLaw::Zero;
  cfg.seed = 8;
  cfg.restart_every = 2;
  const TrajectoryBatch zero = collect(plant, spec, cfg);

  ReductionConfig rc;
  rc.nhat = 2;
  rc.kappa = 0.5;
  rc.mu = 1.0;
  rc.gamma = 0.3;
  rc.equality_mode = EqualityMode::FixAhat;
  rc.fixed = MatrixXd::Identity(2, 2);
  rc.pinned_rows = {1, 2};
  const Reduction red = reduce_dt(excited, zero, spec, rc);
  CHECK(red.rho < 1e-9);  // fully actuated: exact input match

  ReachAvoidProblem prob = small_problem();
  prob.obstacle_boxes = {box2(4, 0, 5, 7)};
  const RomAbstraction abs = abstract_rom(red, prob);
  const ControllerTable tab = synthesize(abs, prob, 0.1);
  REQUIRE(tab.initial_covered);

  VectorXd xh0(2);
  xh0 << 1.0, 1.0;
  const RefineRun run = refine_and_run(red, tab, plant, prob, xh0, 400, 1);
  CHECK(run.reached_target);
  CHECK_FALSE(run.hit_true_obstacle);
  CHECK(run.max_deviation < 0.1 + 1e-6);
}
