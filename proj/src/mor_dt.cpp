#include "romkit/mor_dt.hpp"

#include <cmath>

#include "romkit/numeric.hpp"
#include "build_reduction.hpp"
#include "numeric_impl.hpp"
#include "verify_common.hpp"

namespace romkit {

Reduction reduce_dt(const TrajectoryBatch& excited,
                    const TrajectoryBatch& zero, const DictionarySpec& spec,
                    const ReductionConfig& config) {
  require(config.kappa > 0 && config.kappa < 1, ErrorCode::InvalidInput,
          "kappa must lie in (0,1)");
  require(config.mu > 0, ErrorCode::InvalidInput, "mu must be positive");
  return build_reduction(excited, zero, spec, config, TimeKind::Discrete);
}

SfVerification verify_sf_dt(const Reduction& red, const SfVerifyOptions& opt) {
  require(red.time_kind == TimeKind::Discrete, ErrorCode::InvalidInput,
          "verify_sf_dt needs a discrete-time reduction");
  require(opt.source == SfVerifyOptions::Source::DataForm || opt.plant,
          ErrorCode::InvalidInput, "true-plant verification needs the plant");

  auto one_step = [&](const VectorXd& x, const VectorXd& xh,
                      const VectorXd& uh, double sf) {
    VectorXd xnext;
    if (opt.source == SfVerifyOptions::Source::TruePlant) {
      xnext = opt.plant->rhs(x, interface_input(red, x, xh, uh));
    } else {
      xnext = closed_loop_rhs_data(red, x, xh, uh);
    }
    const VectorXd xhnext = red.Ahat * xh + red.Bhat * uh;
    return red.sf_value(xnext, xhnext) - red.kappa * sf;
  };

  const MatrixXd a = red.XplusQ.leftCols(red.n);
  const MatrixXd m = red.Bdata * red.Psi - red.R1 * red.Bhat;
  MatrixXd w(red.n + red.mhat, red.n + red.mhat);
  w.topLeftCorner(red.n, red.n) =
      a.transpose() * red.P * a - red.kappa * red.P;
  w.topRightCorner(red.n, red.mhat) = a.transpose() * red.P * m;
  w.bottomLeftCorner(red.mhat, red.n) = m.transpose() * red.P * a;
  w.bottomRightCorner(red.mhat, red.mhat) =
      m.transpose() * red.P * m -
      red.rho * MatrixXd::Identity(red.mhat, red.mhat);
  return detail::verify_sf_generic(red, opt, one_step, w);
}

SimulationRelationCert relation_cert(const Reduction& red, double eta,
                                     double nu) {
  require(eta > 0 && eta < 1, ErrorCode::InvalidInput,
          "eta must lie in (0,1)");
  require(nu >= 0, ErrorCode::InvalidInput, "nu must be non-negative");
  require(red.kappa > 0 && red.kappa < 1, ErrorCode::InvalidInput,
          "relation certificate needs kappa in (0,1)");
  SimulationRelationCert cert;
  cert.eta = eta;
  cert.nu = nu;
  cert.rho_bar = red.rho * nu / ((1.0 - red.kappa) * eta);
  cert.epsilon = std::sqrt(cert.rho_bar / red.alpha);
  return cert;
}

RelationInvarianceReport check_relation_invariance(
    const Reduction& red, const SimulationRelationCert& cert,
    const SfVerifyOptions& opt) {
  require(red.time_kind == TimeKind::Discrete, ErrorCode::InvalidInput,
          "relation invariance is a discrete-time check");
  Rng rng(opt.seed);
  const MatrixXd p_sqrt = spd_sqrt(red.P);
  const MatrixXd p_sqrt_inv =
      p_sqrt.llt().solve(MatrixXd::Identity(red.n, red.n));

  RelationInvarianceReport rep;

  auto check_pair = [&](const VectorXd& x, const VectorXd& xh,
                        const VectorXd& uh) {
    const double sf = red.sf_value(x, xh);
    const double dev = red.output_error(x, xh).norm();
    if (dev > cert.epsilon + opt.tol) {
      ++rep.deviation_violations;
      rep.max_deviation_gap =
          std::max(rep.max_deviation_gap, dev - cert.epsilon);
    }
    VectorXd xnext;
    if (opt.source == SfVerifyOptions::Source::TruePlant && opt.plant) {
      xnext = opt.plant->rhs(x, interface_input(red, x, xh, uh));
    } else {
      xnext = closed_loop_rhs_data(red, x, xh, uh);
    }
    const VectorXd xhnext = red.Ahat * xh + red.Bhat * uh;
    const double sf_next = red.sf_value(xnext, xhnext);
    const double scale = 1.0 + std::abs(sf) + uh.squaredNorm();
    if (sf_next > cert.rho_bar + opt.tol * scale) {
      ++rep.escape_violations;
      rep.max_escape = std::max(rep.max_escape, sf_next - cert.rho_bar);
    }
  };

  rep.samples = opt.samples;
  for (int s = 0; s < opt.samples; ++s) {
    const VectorXd xh = rng.uniform_vector(opt.xhat_box.lo, opt.xhat_box.hi);
    VectorXd z = rng.normal_vector(red.n);
    if (z.norm() > 0) z /= z.norm();
    // Half the radii interior, half exactly on the relation boundary.
    const double radius =
        std::sqrt(cert.rho_bar) *
        (s % 2 == 0 ? std::sqrt(rng.uniform01()) : 1.0);
    const VectorXd x = red.R1 * xh + p_sqrt_inv * (radius * z);

    VectorXd uh = rng.uniform_vector(opt.uhat_box.lo, opt.uhat_box.hi);
    const double un = uh.norm();
    if (un > 0 && (s % 2 == 1 || un * un > cert.nu))
      uh *= std::sqrt(cert.nu) / un;  // project (or lift) onto |u|^2 = nu
    check_pair(x, xh, uh);
  }

  // Directed probe: ascend the successor value over the product of the
  // two constraint balls; a halved rho_bar is caught here even when the
  // random strata stay inside.
  if (cert.rho_bar > 0) {
    const MatrixXd a_tilde =
        p_sqrt * red.XplusQ.leftCols(red.n) * p_sqrt_inv;
    const MatrixXd m_tilde =
        p_sqrt * (red.Bdata * red.Psi - red.R1 * red.Bhat);
    VectorXd z = VectorXd::Ones(red.n).normalized();
    VectorXd uh = VectorXd::Ones(red.mhat).normalized();
    {
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(a_tilde.transpose() *
                                                 a_tilde);
      z = es.eigenvectors().col(red.n - 1);
    }
    const double zr = std::sqrt(cert.rho_bar);
    const double ur = std::sqrt(cert.nu);
    for (int it = 0; it < 60; ++it) {
      const VectorXd v = a_tilde * (zr * z) + m_tilde * (ur * uh);
      VectorXd gz = a_tilde.transpose() * v;
      VectorXd gu = m_tilde.transpose() * v;
      if (gz.norm() > 0) z = gz.normalized();
      if (gu.norm() > 0) uh = gu.normalized();
    }
    const VectorXd xh = VectorXd::Zero(red.nhat);
    check_pair(p_sqrt_inv * (zr * z), xh, ur * uh);
    ++rep.samples;
  }

  rep.pass = rep.escape_violations == 0 && rep.deviation_violations == 0;
  return rep;
}

}  // namespace romkit
