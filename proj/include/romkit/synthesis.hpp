#ifndef ROMKIT_SYNTHESIS_HPP
#define ROMKIT_SYNTHESIS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "romkit/plant.hpp"
#include "romkit/reduction.hpp"

namespace romkit {

// Reach-while-avoid instance over a 2-D reduced model. Regions live in
// the plane spanned by plant coordinates (coord_i, coord_j), which the
// reduced output tracks one-to-one when those rows of R1 are pinned.
struct ReachAvoidProblem {
  Box state_box;                  // 2-D
  Box initial_box;                // 2-D
  Box target_box;                 // 2-D
  std::vector<Box> obstacle_boxes;  // 2-D, true geometry (uninflated)
  Box input_box;                  // per reduced input channel
  int state_cells[2] = {100, 100};
  int input_cells[2] = {7, 7};
  int horizon = 2000;             // fixpoint sweep cap and step bound
  double sample_time = 0.1;       // ct reduced model only
  double cell_inflation = 0.5;    // successor growth, fraction of a cell
  int coord_i = 0, coord_j = 1;   // plant coordinates of the plane
};

// Interval abstraction of the affine one-step map xhat+ = F xhat + G u.
// Per (cell, input) the successor box is over-approximated by an index
// rectangle; blocked pairs leave the state box.
struct RomAbstraction {
  MatrixXd F, G;
  Box state_box;
  int nx = 0, ny = 0;
  double hx = 0.0, hy = 0.0;
  std::vector<VectorXd> inputs;  // deterministic lexicographic order
  // Inclusive index rectangles, flat at cell * inputs.size() + input;
  // lo_i == -1 marks a blocked pair.
  std::vector<int32_t> lo_i, lo_j, hi_i, hi_j;

  int cell_index(int i, int j) const { return j * nx + i; }
  VectorXd cell_center(int i, int j) const;
  bool locate(const VectorXd& xhat, int* i, int* j) const;
};

RomAbstraction abstract_rom(const Reduction& red,
                            const ReachAvoidProblem& problem);

struct ControllerTable {
  int nx = 0, ny = 0;
  Box state_box;
  std::vector<VectorXd> inputs;
  std::vector<int32_t> input_of_cell;  // -1: not winning
  std::vector<int32_t> rank_of_cell;   // sweeps-to-target; target = 0
  std::vector<uint8_t> target_cell;
  std::vector<uint8_t> obstacle_cell;  // inflated obstacles
  int winning_count = 0;
  int sweeps = 0;
  bool initial_covered = false;  // every cell touching the initial box wins

  bool winning(int i, int j) const { return input_of_cell[j * nx + i] >= 0; }
};

// Maximal winning set by backward fixpoint over the abstraction; every
// admissible input moves strictly down the rank, so winning runs reach
// the target in at most `rank` steps. Obstacles are inflated by
// epsilon_inflation before quantization.
ControllerTable synthesize(const RomAbstraction& abstraction,
                           const ReachAvoidProblem& problem,
                           double epsilon_inflation);

void save_controller(const ControllerTable& table, const std::string& path);

struct RefineRun {
  MatrixXd x;          // plant states at recorded instants
  MatrixXd xhat;       // reduced states
  MatrixXd uhat;       // applied reduced inputs (one per control step)
  VectorXd deviation;  // |y - Chat xhat| per recorded instant
  VectorXd time;
  int steps_taken = 0;
  bool reached_target = false;
  bool hit_true_obstacle = false;
  double max_deviation = 0.0;
  double uhat_sup = 0.0;  // sup over the run of |uhat|
};

// Runs the reduced model under the synthesized controller and the plant
// under the refined input, side by side, until the reduced state enters
// the target or the step bound is hit. Continuous plants are integrated
// with RK4 substeps per control period.
RefineRun refine_and_run(const Reduction& red, const ControllerTable& ctrl,
                         const PlantModel& plant,
                         const ReachAvoidProblem& problem,
                         const VectorXd& xhat0, int max_steps, int substeps);

}  // namespace romkit

#endif  // ROMKIT_SYNTHESIS_HPP
