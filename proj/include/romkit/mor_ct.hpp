#ifndef ROMKIT_MOR_CT_HPP
#define ROMKIT_MOR_CT_HPP

#include <functional>

#include "romkit/experiment.hpp"
#include "romkit/lmi.hpp"
#include "romkit/reduction.hpp"

namespace romkit {

// End-to-end continuous-time construction: right inverse of the
// zero-input data, feasibility solve, embedding equality, interface and
// certificate scalars. Throws on rank failure, infeasibility or an
// unsolvable embedding.
Reduction reduce_ct(const TrajectoryBatch& excited,
                    const TrajectoryBatch& zero, const DictionarySpec& spec,
                    const ReductionConfig& config);

// Pointwise check of the two similarity-function conditions on sampled
// (x, xhat, uhat) triples.
struct SfVerifyOptions {
  int samples = 10000;
  uint64_t seed = 1;
  Box x_box, xhat_box, uhat_box;
  enum class Source { DataForm, TruePlant } source = Source::DataForm;
  const PlantModel* plant = nullptr;  // required for TruePlant
  double tol = 1e-6;
};

// Half of the samples are uniform over the boxes; the other half sit
// near the matched set x = R1 xhat at log-spaced radii, where the
// decrease condition is tight. One extra deterministic probe evaluates
// the extremal direction of the decrease quadratic form, so a corrupted
// certificate is caught even when random samples miss the tight region.
struct SfVerification {
  int samples = 0;
  int bound_violations = 0;     // alpha |y - yhat|^2 <= S
  int decrease_violations = 0;  // the decrease / one-step condition
  double max_bound_violation = 0.0;
  double max_decrease_violation = 0.0;
  double extremal_gap = 0.0;  // max eigenvalue of the decrease form
  bool pass = false;
};

SfVerification verify_sf_ct(const Reduction& red,
                            const SfVerifyOptions& options);

// Closeness bound in the reported-arithmetic form
//   (1/alpha) S0 exp(-kappa t) + (rho / (alpha kappa)) uhat_inf.
double bound_ct_reported(double s0, double t, double alpha, double kappa,
                      double rho, double uhat_inf);

// Provable envelope for |y - yhat|(t) obtained by integrating the
// decrease condition:
//   sqrt((exp(-kappa t) S0 + (rho/kappa)(1 - exp(-kappa t)) uhat_inf^2)
//        / alpha).
double bound_ct_envelope(double s0, double t, double alpha, double kappa,
                         double rho, double uhat_inf);

// Coupled closed-loop run: the plant under the interface next to the
// reduced model, integrated with RK4 substeps while uhat is held over
// each control period.
struct ClosedLoopCt {
  MatrixXd x;           // n x (N+1) at the integration grid
  MatrixXd xhat;        // nhat x (N+1)
  MatrixXd uhat;        // mhat x N (held value at each substep)
  VectorXd deviation;   // |y - yhat| at each grid point
  VectorXd time;        // grid times
  double uhat_sup = 0;  // sup over the run of |uhat(t)|
};

ClosedLoopCt simulate_closed_loop_ct(
    const Reduction& red, const PlantModel* plant, const VectorXd& x0,
    const VectorXd& xhat0,
    const std::function<VectorXd(int, const VectorXd&)>& uhat_policy,
    double control_period, int control_steps, int substeps);

}  // namespace romkit

#endif  // ROMKIT_MOR_CT_HPP
