// Internal: shared sampling/probe machinery behind verify_sf_ct/dt.
#ifndef ROMKIT_VERIFY_COMMON_HPP
#define ROMKIT_VERIFY_COMMON_HPP

#include <Eigen/Eigenvalues>

#include "romkit/mor_ct.hpp"
#include "romkit/numeric.hpp"

namespace romkit {
namespace detail {

// One pointwise evaluation of both conditions; shared by the sampling
// loop and the extremal probe. lie_or_step returns the decrease left
// side already net of the kappa*S budget.
template <typename SuccessorFn>
void check_point(const Reduction& red, const SfVerifyOptions& opt,
                 const SuccessorFn& lie_or_step, const VectorXd& x,
                 const VectorXd& xh, const VectorXd& uh, SfVerification* rep) {
  const double sf = red.sf_value(x, xh);
  const double bound_gap =
      red.alpha * red.output_error(x, xh).squaredNorm() - sf;
  if (bound_gap > 1e-9) {
    ++rep->bound_violations;
    rep->max_bound_violation = std::max(rep->max_bound_violation, bound_gap);
  }
  const double lhs = lie_or_step(x, xh, uh, sf);
  const double budget = red.rho * uh.squaredNorm();
  const double scale = 1.0 + std::abs(sf) + uh.squaredNorm();
  const double gap = lhs - budget - opt.tol * scale;
  if (gap > 0) {
    ++rep->decrease_violations;
    rep->max_decrease_violation = std::max(rep->max_decrease_violation, gap);
  }
}

template <typename SuccessorFn>
SfVerification verify_sf_generic(const Reduction& red,
                                 const SfVerifyOptions& opt,
                                 const SuccessorFn& lie_or_step,
                                 const MatrixXd& decrease_form) {
  Rng rng(opt.seed);
  SfVerification rep;
  rep.samples = opt.samples;
  for (int s = 0; s < opt.samples; ++s) {
    const VectorXd xh = rng.uniform_vector(opt.xhat_box.lo, opt.xhat_box.hi);
    const VectorXd uh = rng.uniform_vector(opt.uhat_box.lo, opt.uhat_box.hi);
    VectorXd x;
    if (s % 2 == 0) {
      x = rng.uniform_vector(opt.x_box.lo, opt.x_box.hi);
    } else {
      // Near-matched stratum: log-spaced radii around R1 xhat, where the
      // decrease condition is tight.
      VectorXd dir = rng.normal_vector(red.n);
      if (dir.norm() > 0) dir /= dir.norm();
      const double radius = std::pow(10.0, rng.uniform(-4.0, 0.7));
      x = red.R1 * xh + radius * dir;
    }
    check_point(red, opt, lie_or_step, x, xh, uh, &rep);
  }

  // Extremal probe: the decrease condition reads
  // [e; uhat]' W [e; uhat] <= 0 for all pairs, so the top eigenvector of
  // W is the hardest point; evaluating it catches tampered certificates
  // that random samples would miss.
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetrize(decrease_form));
  rep.extremal_gap = es.eigenvalues().maxCoeff();
  const VectorXd top = es.eigenvectors().col(red.n + red.mhat - 1);
  const VectorXd xh0 = VectorXd::Zero(red.nhat);
  check_point(red, opt, lie_or_step, top.head(red.n), xh0, top.tail(red.mhat),
              &rep);
  ++rep.samples;

  rep.pass = rep.bound_violations == 0 && rep.decrease_violations == 0;
  return rep;
}

}  // namespace detail
}  // namespace romkit

#endif
