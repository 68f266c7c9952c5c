#include "romkit/mor_ct.hpp"

#include <cmath>

#include <Eigen/Cholesky>

#include "romkit/numeric.hpp"
#include "build_reduction.hpp"
#include "numeric_impl.hpp"
#include "verify_common.hpp"

namespace romkit {
namespace {

MatrixXd spd_inverse(const MatrixXd& m) {
  Eigen::LLT<MatrixXd> llt(symmetrize(m));
  require(llt.info() == Eigen::Success, ErrorCode::Infeasible,
          "matrix expected positive definite is not");
  return symmetrize(llt.solve(MatrixXd::Identity(m.rows(), m.cols())));
}

void check_batch_pair(const TrajectoryBatch& excited,
                      const TrajectoryBatch& zero, const DictionarySpec& spec,
                      TimeKind kind) {
  require(excited.time_kind == kind && zero.time_kind == kind,
          ErrorCode::InvalidInput, "batch time kind mismatch");
  require(excited.excitation == Excitation::Excited, ErrorCode::InvalidInput,
          "first batch must be the excited experiment");
  require(zero.excitation == Excitation::ZeroInput, ErrorCode::InvalidInput,
          "second batch must be the zero-input experiment");
  require(zero.U.cwiseAbs().maxCoeff() == 0.0, ErrorCode::InvalidInput,
          "zero-input batch has nonzero inputs");
  require(excited.T == zero.T, ErrorCode::InvalidInput,
          "both experiments need the same number of samples");
  require(excited.dict_dim() == spec.size() &&
              excited.state_dim() == spec.state_dim(),
          ErrorCode::InvalidInput, "batch does not match the dictionary");
}

}  // namespace

// Shared by reduce_ct and reduce_dt; the two differ only in the
// feasibility block and the rho formula.
Reduction build_reduction(const TrajectoryBatch& excited,
                          const TrajectoryBatch& zero,
                          const DictionarySpec& spec,
                          const ReductionConfig& config, TimeKind kind) {
  check_batch_pair(excited, zero, spec, kind);
  const int n = spec.state_dim();
  const int d = spec.size();
  require(config.nhat >= 1 && config.nhat <= n, ErrorCode::InvalidInput,
          "nhat must lie in [1, n]");

  Reduction red;
  red.time_kind = kind;
  red.dictionary = spec;
  red.n = n;
  red.m = excited.input_dim();
  red.d = d;
  red.nhat = config.nhat;
  red.mhat = config.nhat;
  red.T = excited.T;
  red.gamma = config.gamma;
  red.mu = config.mu;
  red.data_hash_excited = excited.data_hash();
  red.data_hash_zero = zero.data_hash();

  const QbarSolution qbar = solve_qbar(zero.D, n);
  red.Qbar = qbar.Qbar;

  lmi::FeasibilityProblem problem;
  if (kind == TimeKind::Continuous) {
    require(config.mu > 0 && config.mu < config.kappa_hat,
            ErrorCode::InvalidInput,
            "need 0 < mu < kappa_hat so the decay rate stays positive");
    problem = lmi::assemble_ct(excited, config.kappa_hat, config.ct_gain_cap);
    red.kappa_hat = config.kappa_hat;
    red.kappa = config.kappa_hat - config.mu;
  } else {
    problem = lmi::assemble_dt(excited, config.kappa, config.mu);
    red.kappa = config.kappa;
    red.eta = config.eta;
  }
  red.Bhat = config.gamma * MatrixXd::Identity(config.nhat, config.nhat);

  // Everything downstream of the feasibility solve; runs once, and once
  // more when the deviation-shaping pass replaces P.
  EmbeddingSolution emb;
  auto finish = [&](const lmi::FeasibilitySolution& fs) {
    red.P = spd_inverse(fs.Phi);
    red.H = fs.H;
    red.Q.resize(excited.T, d);
    red.Q.leftCols(n) = fs.H * red.P;
    red.Q.rightCols(d - n) = fs.Q2;
    red.G = excited.U * red.Q;

    red.XplusQ = excited.Xplus * red.Q;
    red.Aest = zero.Xplus * red.Qbar;

    MatrixXd g_pinv;
    try {
      g_pinv = right_pinv(red.G);
    } catch (const Error&) {
      throw Error(ErrorCode::RankDeficient,
                  "U*Q is row-rank deficient; the excitation does not span "
                  "the input space");
    }
    red.Bdata = (red.XplusQ - red.Aest) * g_pinv;

    emb = solve_rom_embedding(red.Aest.leftCols(n),
                              red.Aest.rightCols(d - n), red.Bdata, config);
    red.R1 = emb.R1;
    red.R2 = emb.R2;
    red.Xi = emb.Xi;
    red.Ahat = emb.Ahat;
    red.Chat = red.R1;
    return fs;
  };

  lmi::FeasibilitySolution fs = finish(lmi::solve(problem));
  if (config.shape_rho && fs.status == "interior") {
    const MatrixXd bdata0 = red.Bdata;
    const MatrixXd r1bhat0 = red.R1 * red.Bhat;
    lmi::SolveOptions shaped;
    shaped.shape_bdata = &bdata0;
    shaped.shape_r1bhat = &r1bhat0;
    fs = finish(lmi::solve(problem, shaped));
    red.notes.push_back("P reshaped to reduce the deviation gain rho");
  }

  std::string psi_note;
  red.Psi = compute_psi(red.P, red.Bdata, red.R1, red.Bhat, &psi_note);
  if (!psi_note.empty()) red.notes.push_back(psi_note);

  red.alpha = min_eigenvalue(red.P);
  const double mismatch =
      spectral_norm(spd_sqrt(red.P) * (red.Bdata * red.Psi - red.R1 * red.Bhat));
  red.rho = (kind == TimeKind::Continuous ? 1.0 / config.mu
                                          : 1.0 + 1.0 / config.mu) *
            mismatch * mismatch;

  red.residuals = fs.equality_residuals;
  red.residuals["rom_embedding"] = emb.residual;
  red.residuals["zero_data_right_inverse"] = qbar.residual;
  red.residuals["data_right_inverse"] =
      (excited.D * red.Q - MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff();
  red.lmi_margin = fs.lmi_margin;

  require(red.residuals["data_right_inverse"] < 1e-6, ErrorCode::Infeasible,
          "excited data right-inverse residual above tolerance");
  return red;
}

Reduction reduce_ct(const TrajectoryBatch& excited,
                    const TrajectoryBatch& zero, const DictionarySpec& spec,
                    const ReductionConfig& config) {
  return build_reduction(excited, zero, spec, config, TimeKind::Continuous);
}

SfVerification verify_sf_ct(const Reduction& red,
                            const SfVerifyOptions& opt) {
  require(red.time_kind == TimeKind::Continuous, ErrorCode::InvalidInput,
          "verify_sf_ct needs a continuous-time reduction");
  require(opt.source == SfVerifyOptions::Source::DataForm || opt.plant,
          ErrorCode::InvalidInput, "true-plant verification needs the plant");

  auto lie = [&](const VectorXd& x, const VectorXd& xh, const VectorXd& uh,
                 double sf) {
    VectorXd xdot;
    if (opt.source == SfVerifyOptions::Source::TruePlant) {
      xdot = opt.plant->rhs(x, interface_input(red, x, xh, uh));
    } else {
      xdot = closed_loop_rhs_data(red, x, xh, uh);
    }
    const VectorXd e = x - red.R1 * xh;
    const double lie_val = 2.0 * e.dot(red.P * (xdot - red.R1 * (red.Ahat * xh +
                                                                 red.Bhat * uh)));
    return lie_val + red.kappa * sf;
  };

  const MatrixXd a = red.XplusQ.leftCols(red.n);
  const MatrixXd m = red.Bdata * red.Psi - red.R1 * red.Bhat;
  MatrixXd w(red.n + red.mhat, red.n + red.mhat);
  w.topLeftCorner(red.n, red.n) =
      a.transpose() * red.P + red.P * a + red.kappa * red.P;
  w.topRightCorner(red.n, red.mhat) = red.P * m;
  w.bottomLeftCorner(red.mhat, red.n) = m.transpose() * red.P;
  w.bottomRightCorner(red.mhat, red.mhat) =
      -red.rho * MatrixXd::Identity(red.mhat, red.mhat);
  return detail::verify_sf_generic(red, opt, lie, w);
}

double bound_ct_reported(double s0, double t, double alpha, double kappa,
                      double rho, double uhat_inf) {
  return (1.0 / alpha) * s0 * std::exp(-kappa * t) +
         (rho / (alpha * kappa)) * uhat_inf;
}

double bound_ct_envelope(double s0, double t, double alpha, double kappa,
                         double rho, double uhat_inf) {
  const double decay = std::exp(-kappa * t);
  const double s =
      decay * s0 + (rho / kappa) * (1.0 - decay) * uhat_inf * uhat_inf;
  return std::sqrt(std::max(0.0, s) / alpha);
}

ClosedLoopCt simulate_closed_loop_ct(
    const Reduction& red, const PlantModel* plant, const VectorXd& x0,
    const VectorXd& xhat0,
    const std::function<VectorXd(int, const VectorXd&)>& uhat_policy,
    double control_period, int control_steps, int substeps) {
  require(control_period > 0 && control_steps >= 0 && substeps >= 1,
          ErrorCode::InvalidInput, "bad closed-loop discretization");
  const int total = control_steps * substeps;
  const double h = control_period / substeps;

  ClosedLoopCt run;
  run.x.resize(red.n, total + 1);
  run.xhat.resize(red.nhat, total + 1);
  run.uhat.resize(red.mhat, std::max(total, 1));
  run.deviation.resize(total + 1);
  run.time.resize(total + 1);

  VectorXd x = x0, xh = xhat0;
  run.x.col(0) = x;
  run.xhat.col(0) = xh;
  run.deviation(0) = red.output_error(x, xh).norm();
  run.time(0) = 0.0;

  // One coupled RK4 stage evaluates the interface at the stage point, so
  // the feedback is continuous while uhat is held.
  auto coupled = [&](const VectorXd& xs, const VectorXd& xhs,
                     const VectorXd& uh, VectorXd* dx, VectorXd* dxh) {
    const VectorXd u = interface_input(red, xs, xhs, uh);
    *dx = plant ? plant->rhs(xs, u) : closed_loop_rhs_data(red, xs, xhs, uh);
    *dxh = red.Ahat * xhs + red.Bhat * uh;
  };

  int col = 1;
  for (int k = 0; k < control_steps; ++k) {
    const VectorXd uh = uhat_policy(k, xh);
    run.uhat_sup = std::max(run.uhat_sup, uh.norm());
    for (int s = 0; s < substeps; ++s, ++col) {
      VectorXd k1x, k1h, k2x, k2h, k3x, k3h, k4x, k4h;
      coupled(x, xh, uh, &k1x, &k1h);
      coupled(x + 0.5 * h * k1x, xh + 0.5 * h * k1h, uh, &k2x, &k2h);
      coupled(x + 0.5 * h * k2x, xh + 0.5 * h * k2h, uh, &k3x, &k3h);
      coupled(x + h * k3x, xh + h * k3h, uh, &k4x, &k4h);
      x += (h / 6.0) * (k1x + 2 * k2x + 2 * k3x + k4x);
      xh += (h / 6.0) * (k1h + 2 * k2h + 2 * k3h + k4h);
      if (!x.allFinite() || x.cwiseAbs().maxCoeff() > kDivergenceLimit)
        throw Error(ErrorCode::Diverged, "closed-loop run diverged at step " +
                                             std::to_string(col));
      run.uhat.col(col - 1) = uh;
      run.x.col(col) = x;
      run.xhat.col(col) = xh;
      run.deviation(col) = red.output_error(x, xh).norm();
      run.time(col) = col * h;
    }
  }
  return run;
}

}  // namespace romkit
