#ifndef ROMKIT_LMI_HPP
#define ROMKIT_LMI_HPP

#include <map>
#include <string>

#include "romkit/experiment.hpp"
#include "romkit/types.hpp"

namespace romkit {
namespace lmi {

// Data-dependent feasibility program in the variables
//   Q2 : T x (d-n), H : T x n, Phi = P^{-1} : n x n symmetric,
// with the scalars fixed at assembly time. Equality families:
//   successor_annihilation   Xplus * Q2 == 0
//   nonlinear_selector       D * Q2 == [0; I]
//   state_selector           D * H == [Phi; 0]
// plus one matrix-inequality block per time kind:
//   ct  "decay":        H^T Xplus^T + Xplus H + kappa_hat * Phi <= 0
//   dt  "contraction":  [[Phi/(1+mu), Xplus*H], [*, kappa*Phi]] >= 0
// and the floor Phi >= phi_floor * I.
struct FeasibilityProblem {
  TimeKind time_kind = TimeKind::Continuous;
  int n = 0, d = 0, T = 0;
  MatrixXd D;      // d x T
  MatrixXd Xplus;  // n x T
  double kappa_hat = 0.0;  // ct
  double kappa = 0.0;      // dt, in (0,1)
  double mu = 0.0;         // dt, > 0
  double phi_floor = 1e-6;
  // Optional ct-only cap c on the P-metric closed-loop gain via
  //   [[c Phi, Xplus H], [*, c Phi]] >= 0,
  // which bounds every closed-loop eigenvalue magnitude by c and keeps
  // the refined loop integrable with explicit steps. 0 disables it.
  double ct_gain_cap = 0.0;
};

FeasibilityProblem assemble_ct(const TrajectoryBatch& excited,
                               double kappa_hat, double ct_gain_cap = 0.0);
FeasibilityProblem assemble_dt(const TrajectoryBatch& excited, double kappa,
                               double mu);

struct FeasibilitySolution {
  MatrixXd Q2;
  MatrixXd H;
  MatrixXd Phi;
  // Diagnostics below are recomputed from the returned values, never
  // taken from the solver state.
  std::map<std::string, double> equality_residuals;  // max-abs per family
  double lmi_margin = 0.0;   // min eigenvalue of the main block
  double phi_margin = 0.0;   // min eigenvalue of Phi - phi_floor*I
  std::string status;        // "interior" or "boundary"
  int newton_iterations = 0;
};

struct SolveOptions {
  double eq_tol = 1e-6;
  double lmi_margin_tol = -1e-7;
  double phi_condition_limit = 1e10;
  int max_newton_per_stage = 400;
  // Optional deviation-gain shaping. When both matrices are set, a
  // second objective pass minimizes t subject to the extra Schur block
  //   [[Phi, Bdata*Psi - R1Bhat], [*, t I]] >= 0
  // over (Phi, C, Psi, t); t upper-bounds the squared P-weighted input
  // mismatch that the deviation bound is built from.
  const MatrixXd* shape_bdata = nullptr;   // n x m
  const MatrixXd* shape_r1bhat = nullptr;  // n x mhat
};

// Solves the program or throws Error(Infeasible) naming the violated
// condition family. Equalities are eliminated structurally (least
// squares for Q2, a null-space parameterization for H), the inequality
// blocks are handled by a phase-I / centering barrier Newton method
// with the scale pinned by trace(Phi) = n.
FeasibilitySolution solve(const FeasibilityProblem& problem,
                          const SolveOptions& options = {});

// Recompute the per-family equality residuals and block margins for an
// arbitrary candidate (used by tests and by verification reports).
std::map<std::string, double> equality_residuals(
    const FeasibilityProblem& problem, const MatrixXd& Q2, const MatrixXd& H,
    const MatrixXd& Phi);
double block_margin(const FeasibilityProblem& problem, const MatrixXd& H,
                    const MatrixXd& Phi);

// Text dump of the raw program in sparse triplet form for cross-checks
// with external solvers.
void dump_problem(const FeasibilityProblem& problem, const std::string& path);

}  // namespace lmi
}  // namespace romkit

#endif  // ROMKIT_LMI_HPP
