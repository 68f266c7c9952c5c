#include "romkit/synthesis.hpp"

#include <cmath>
#include <fstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "romkit/numeric.hpp"
#include "numeric_impl.hpp"

namespace romkit {
namespace {

bool boxes_intersect(double lo0, double hi0, double lo1, double hi1) {
  return lo0 <= hi1 && lo1 <= hi0;
}

std::vector<VectorXd> input_grid(const Box& box, const int cells[2]) {
  std::vector<VectorXd> grid;
  const int n0 = std::max(1, cells[0]);
  const int n1 = std::max(1, cells[1]);
  for (int a = 0; a < n0; ++a)
    for (int b = 0; b < n1; ++b) {
      VectorXd u(2);
      u(0) = n0 == 1 ? 0.5 * (box.lo(0) + box.hi(0))
                     : box.lo(0) + a * (box.hi(0) - box.lo(0)) / (n0 - 1);
      u(1) = n1 == 1 ? 0.5 * (box.lo(1) + box.hi(1))
                     : box.lo(1) + b * (box.hi(1) - box.lo(1)) / (n1 - 1);
      grid.push_back(u);
    }
  return grid;
}

}  // namespace

VectorXd RomAbstraction::cell_center(int i, int j) const {
  VectorXd c(2);
  c(0) = state_box.lo(0) + (i + 0.5) * hx;
  c(1) = state_box.lo(1) + (j + 0.5) * hy;
  return c;
}

bool RomAbstraction::locate(const VectorXd& xhat, int* i, int* j) const {
  const int ci = static_cast<int>(std::floor((xhat(0) - state_box.lo(0)) / hx));
  const int cj = static_cast<int>(std::floor((xhat(1) - state_box.lo(1)) / hy));
  if (ci < 0 || ci >= nx || cj < 0 || cj >= ny) return false;
  *i = ci;
  *j = cj;
  return true;
}

RomAbstraction abstract_rom(const Reduction& red,
                            const ReachAvoidProblem& prob) {
  require(red.nhat == 2, ErrorCode::InvalidInput,
          "grid synthesis supports 2-dimensional reduced models only "
          "(got nhat = " + std::to_string(red.nhat) + ")");
  require(prob.state_cells[0] >= 2 && prob.state_cells[1] >= 2,
          ErrorCode::InvalidInput, "need at least 2 cells per axis");
  require(prob.state_box.dim() == 2 && prob.input_box.dim() == 2,
          ErrorCode::InvalidInput, "state and input boxes must be 2-D");

  RomAbstraction abs;
  if (red.time_kind == TimeKind::Discrete) {
    abs.F = red.Ahat;
    abs.G = red.Bhat;
  } else {
    // Exact zero-order-hold discretization of the linear reduced model
    // via the augmented exponential.
    require(prob.sample_time > 0, ErrorCode::InvalidInput,
            "sample_time must be positive for a ct reduced model");
    const int nh = red.nhat, mh = red.mhat;
    MatrixXd aug = MatrixXd::Zero(nh + mh, nh + mh);
    aug.topLeftCorner(nh, nh) = red.Ahat;
    aug.topRightCorner(nh, mh) = red.Bhat;
    const MatrixXd e = (aug * prob.sample_time).exp();
    abs.F = e.topLeftCorner(nh, nh);
    abs.G = e.topRightCorner(nh, mh);
  }

  abs.state_box = prob.state_box;
  abs.nx = prob.state_cells[0];
  abs.ny = prob.state_cells[1];
  abs.hx = (prob.state_box.hi(0) - prob.state_box.lo(0)) / abs.nx;
  abs.hy = (prob.state_box.hi(1) - prob.state_box.lo(1)) / abs.ny;
  abs.inputs = input_grid(prob.input_box, prob.input_cells);

  const size_t pairs = static_cast<size_t>(abs.nx) * abs.ny * abs.inputs.size();
  abs.lo_i.assign(pairs, -1);
  abs.lo_j.assign(pairs, -1);
  abs.hi_i.assign(pairs, -1);
  abs.hi_j.assign(pairs, -1);

  const Eigen::Matrix2d fabs_ = abs.F.cwiseAbs();
  const Eigen::Vector2d half(0.5 * abs.hx, 0.5 * abs.hy);
  const Eigen::Vector2d grow = fabs_ * half +
                               prob.cell_inflation *
                                   Eigen::Vector2d(abs.hx, abs.hy);
  const size_t ni = abs.inputs.size();
  std::vector<Eigen::Vector2d> shift(ni);
  for (size_t u = 0; u < ni; ++u) shift[u] = abs.G * abs.inputs[u];

  for (int j = 0; j < abs.ny; ++j)
    for (int i = 0; i < abs.nx; ++i) {
      const Eigen::Vector2d c = abs.F * abs.cell_center(i, j);
      for (size_t u = 0; u < ni; ++u) {
        const Eigen::Vector2d cc = c + shift[u];
        const Eigen::Vector2d lo = cc - grow;
        const Eigen::Vector2d hi = cc + grow;
        if (lo(0) < prob.state_box.lo(0) || hi(0) > prob.state_box.hi(0) ||
            lo(1) < prob.state_box.lo(1) || hi(1) > prob.state_box.hi(1))
          continue;  // blocked: successor may leave the state box
        const size_t idx = (static_cast<size_t>(j) * abs.nx + i) * ni + u;
        abs.lo_i[idx] = static_cast<int32_t>(
            std::floor((lo(0) - prob.state_box.lo(0)) / abs.hx));
        abs.hi_i[idx] = std::min<int32_t>(
            abs.nx - 1, static_cast<int32_t>(
                            std::floor((hi(0) - prob.state_box.lo(0)) / abs.hx)));
        abs.lo_j[idx] = static_cast<int32_t>(
            std::floor((lo(1) - prob.state_box.lo(1)) / abs.hy));
        abs.hi_j[idx] = std::min<int32_t>(
            abs.ny - 1, static_cast<int32_t>(
                            std::floor((hi(1) - prob.state_box.lo(1)) / abs.hy)));
        abs.lo_i[idx] = std::max<int32_t>(0, abs.lo_i[idx]);
        abs.lo_j[idx] = std::max<int32_t>(0, abs.lo_j[idx]);
      }
    }
  return abs;
}

ControllerTable synthesize(const RomAbstraction& abs,
                           const ReachAvoidProblem& prob,
                           double epsilon_inflation) {
  require(epsilon_inflation >= 0, ErrorCode::InvalidInput,
          "epsilon inflation must be non-negative");
  const int nx = abs.nx, ny = abs.ny;
  const size_t cells = static_cast<size_t>(nx) * ny;
  const size_t ni = abs.inputs.size();

  ControllerTable tab;
  tab.nx = nx;
  tab.ny = ny;
  tab.state_box = abs.state_box;
  tab.inputs = abs.inputs;
  tab.input_of_cell.assign(cells, -1);
  tab.rank_of_cell.assign(cells, -1);
  tab.target_cell.assign(cells, 0);
  tab.obstacle_cell.assign(cells, 0);

  int target_count = 0;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const double x0 = abs.state_box.lo(0) + i * abs.hx;
      const double x1 = x0 + abs.hx;
      const double y0 = abs.state_box.lo(1) + j * abs.hy;
      const double y1 = y0 + abs.hy;
      const size_t c = abs.cell_index(i, j);
      for (const Box& ob : prob.obstacle_boxes) {
        if (boxes_intersect(x0, x1, ob.lo(0) - epsilon_inflation,
                            ob.hi(0) + epsilon_inflation) &&
            boxes_intersect(y0, y1, ob.lo(1) - epsilon_inflation,
                            ob.hi(1) + epsilon_inflation)) {
          tab.obstacle_cell[c] = 1;
          break;
        }
      }
      if (!tab.obstacle_cell[c] && x0 >= prob.target_box.lo(0) &&
          x1 <= prob.target_box.hi(0) && y0 >= prob.target_box.lo(1) &&
          y1 <= prob.target_box.hi(1)) {
        tab.target_cell[c] = 1;
        tab.rank_of_cell[c] = 0;
        tab.input_of_cell[c] = 0;  // any input; target is absorbing here
        ++target_count;
      }
    }
  require(target_count > 0, ErrorCode::Infeasible,
          "inflated obstacles swallow the target region");

  // Jacobi backward sweeps. The prefix sum turns "is the whole successor
  // rectangle winning" into an O(1) query per pair.
  std::vector<int32_t> prefix((nx + 1) * (ny + 1));
  auto build_prefix = [&]() {
    for (int j = 0; j < ny; ++j) {
      int32_t rowsum = 0;
      for (int i = 0; i < nx; ++i) {
        rowsum += tab.input_of_cell[abs.cell_index(i, j)] >= 0 ? 1 : 0;
        prefix[(j + 1) * (nx + 1) + (i + 1)] =
            prefix[j * (nx + 1) + (i + 1)] + rowsum;
      }
    }
  };
  auto rect_all_winning = [&](int i0, int j0, int i1, int j1) {
    const int32_t count = prefix[(j1 + 1) * (nx + 1) + (i1 + 1)] -
                          prefix[j0 * (nx + 1) + (i1 + 1)] -
                          prefix[(j1 + 1) * (nx + 1) + i0] +
                          prefix[j0 * (nx + 1) + i0];
    return count == (i1 - i0 + 1) * (j1 - j0 + 1);
  };

  tab.winning_count = target_count;
  for (int sweep = 1; sweep <= prob.horizon; ++sweep) {
    build_prefix();
    std::vector<std::pair<size_t, int32_t>> additions;
    for (size_t c = 0; c < cells; ++c) {
      if (tab.input_of_cell[c] >= 0 || tab.obstacle_cell[c]) continue;
      for (size_t u = 0; u < ni; ++u) {
        const size_t idx = c * ni + u;
        if (abs.lo_i[idx] < 0) continue;
        if (rect_all_winning(abs.lo_i[idx], abs.lo_j[idx], abs.hi_i[idx],
                             abs.hi_j[idx])) {
          additions.push_back({c, static_cast<int32_t>(u)});
          break;  // first admissible input in grid order
        }
      }
    }
    if (additions.empty()) break;
    for (const auto& [c, u] : additions) {
      tab.input_of_cell[c] = u;
      tab.rank_of_cell[c] = sweep;
    }
    tab.winning_count += static_cast<int>(additions.size());
    tab.sweeps = sweep;
  }

  tab.initial_covered = true;
  for (int j = 0; j < ny && tab.initial_covered; ++j)
    for (int i = 0; i < nx; ++i) {
      const double x0 = abs.state_box.lo(0) + i * abs.hx;
      const double y0 = abs.state_box.lo(1) + j * abs.hy;
      if (boxes_intersect(x0, x0 + abs.hx, prob.initial_box.lo(0),
                          prob.initial_box.hi(0)) &&
          boxes_intersect(y0, y0 + abs.hy, prob.initial_box.lo(1),
                          prob.initial_box.hi(1)) &&
          !tab.winning(i, j)) {
        tab.initial_covered = false;
        break;
      }
    }
  return tab;
}

void save_controller(const ControllerTable& tab, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), ErrorCode::Io, "cannot write " + path);
  out << "cell_i,cell_j,u1,u2\n";
  for (int j = 0; j < tab.ny; ++j)
    for (int i = 0; i < tab.nx; ++i) {
      const int32_t u = tab.input_of_cell[j * tab.nx + i];
      if (u < 0 || tab.target_cell[j * tab.nx + i]) continue;
      out << i << "," << j << "," << format_double(tab.inputs[u](0)) << ","
          << format_double(tab.inputs[u](1)) << "\n";
    }
  require(out.good(), ErrorCode::Io, "write failed for " + path);
}

RefineRun refine_and_run(const Reduction& red, const ControllerTable& ctrl,
                         const PlantModel& plant,
                         const ReachAvoidProblem& prob, const VectorXd& xhat0,
                         int max_steps, int substeps) {
  require(red.nhat == 2, ErrorCode::InvalidInput, "reduced model must be 2-D");
  require(substeps >= 1, ErrorCode::InvalidInput, "substeps must be >= 1");
  const bool ct = red.time_kind == TimeKind::Continuous;
  require(plant.time_kind() == red.time_kind, ErrorCode::InvalidInput,
          "plant and reduction disagree on the time kind");

  const int per_step = ct ? substeps : 1;
  const int capacity = max_steps * per_step + 1;
  RefineRun run;
  run.x.resize(red.n, capacity);
  run.xhat.resize(2, capacity);
  run.uhat.resize(2, std::max(max_steps, 1));
  run.deviation.resize(capacity);
  run.time.resize(capacity);

  VectorXd x = red.R1 * xhat0;  // matched start: S(x0, xhat0) = 0
  VectorXd xh = xhat0;
  run.x.col(0) = x;
  run.xhat.col(0) = xh;
  run.deviation(0) = red.output_error(x, xh).norm();
  run.time(0) = 0.0;

  auto in_true_obstacle = [&](const VectorXd& state) {
    for (const Box& ob : prob.obstacle_boxes)
      if (state(prob.coord_i) >= ob.lo(0) && state(prob.coord_i) <= ob.hi(0) &&
          state(prob.coord_j) >= ob.lo(1) && state(prob.coord_j) <= ob.hi(1))
        return true;
    return false;
  };
  auto rom_in_target = [&](const VectorXd& xhat) {
    return xhat(0) >= prob.target_box.lo(0) &&
           xhat(0) <= prob.target_box.hi(0) &&
           xhat(1) >= prob.target_box.lo(1) && xhat(1) <= prob.target_box.hi(1);
  };

  const double h = ct ? prob.sample_time / substeps : 1.0;
  RomAbstraction geom;  // only the grid geometry is needed for lookup
  geom.state_box = ctrl.state_box;
  geom.nx = ctrl.nx;
  geom.ny = ctrl.ny;
  geom.hx = (ctrl.state_box.hi(0) - ctrl.state_box.lo(0)) / ctrl.nx;
  geom.hy = (ctrl.state_box.hi(1) - ctrl.state_box.lo(1)) / ctrl.ny;

  int col = 1;
  for (int k = 0; k < max_steps; ++k) {
    if (rom_in_target(xh)) {
      run.reached_target = true;
      break;
    }
    int ci = 0, cj = 0;
    if (!geom.locate(xh, &ci, &cj))
      throw Error(ErrorCode::Infeasible,
                  "reduced state left the synthesis box at step " +
                      std::to_string(k));
    const int32_t uidx = ctrl.input_of_cell[cj * ctrl.nx + ci];
    if (uidx < 0)
      throw Error(ErrorCode::Infeasible,
                  "controller has no action for cell (" + std::to_string(ci) +
                      "," + std::to_string(cj) + ") at step " +
                      std::to_string(k));
    const VectorXd uh = ctrl.inputs[uidx];
    run.uhat.col(k) = uh;
    run.uhat_sup = std::max(run.uhat_sup, uh.norm());

    if (ct) {
      for (int s = 0; s < substeps; ++s, ++col) {
        auto stage = [&](const VectorXd& xs, const VectorXd& xhs, VectorXd* dx,
                         VectorXd* dxh) {
          *dx = plant.rhs(xs, interface_input(red, xs, xhs, uh));
          *dxh = red.Ahat * xhs + red.Bhat * uh;
        };
        VectorXd k1x, k1h, k2x, k2h, k3x, k3h, k4x, k4h;
        stage(x, xh, &k1x, &k1h);
        stage(x + 0.5 * h * k1x, xh + 0.5 * h * k1h, &k2x, &k2h);
        stage(x + 0.5 * h * k2x, xh + 0.5 * h * k2h, &k3x, &k3h);
        stage(x + h * k3x, xh + h * k3h, &k4x, &k4h);
        x += (h / 6.0) * (k1x + 2 * k2x + 2 * k3x + k4x);
        xh += (h / 6.0) * (k1h + 2 * k2h + 2 * k3h + k4h);
        run.x.col(col) = x;
        run.xhat.col(col) = xh;
        run.deviation(col) = red.output_error(x, xh).norm();
        run.time(col) = col * h;
        if (in_true_obstacle(x)) run.hit_true_obstacle = true;
      }
    } else {
      x = plant.rhs(x, interface_input(red, x, xh, uh));
      xh = red.Ahat * xh + red.Bhat * uh;
      run.x.col(col) = x;
      run.xhat.col(col) = xh;
      run.deviation(col) = red.output_error(x, xh).norm();
      run.time(col) = col;
      if (in_true_obstacle(x)) run.hit_true_obstacle = true;
      ++col;
    }
    run.steps_taken = k + 1;
    if (!x.allFinite())
      throw Error(ErrorCode::Diverged, "refined run diverged");
  }
  if (!run.reached_target && rom_in_target(xh)) run.reached_target = true;

  run.x.conservativeResize(Eigen::NoChange, col);
  run.xhat.conservativeResize(Eigen::NoChange, col);
  run.uhat.conservativeResize(Eigen::NoChange, std::max(run.steps_taken, 1));
  run.deviation.conservativeResize(col);
  run.time.conservativeResize(col);
  run.max_deviation = run.deviation.maxCoeff();
  return run;
}

}  // namespace romkit
