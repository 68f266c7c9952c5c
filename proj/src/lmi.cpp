#include "romkit/lmi.hpp"

#include <cmath>
#include <fstream>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "romkit/numeric.hpp"
#include "numeric_impl.hpp"

namespace romkit {
namespace lmi {
namespace {

// ---------------------------------------------------------------------------
// Structural reduction.
//
// Q2 only appears in the two equality families, so it is solved first by
// stacked least squares. The remaining unknowns (H, Phi) satisfy
// D*H = [Phi; 0] exactly when H = W*Phi + Z*C with W the "state" columns
// of D^+ and Z a null-space basis of D, leaving the inequality blocks as
// an affine matrix family in (Phi, C). Both blocks are positively
// homogeneous in (Phi, C), so the scale is pinned by trace(Phi) = n and
// Phi is parameterized as I_n plus a traceless symmetric deviation.
// ---------------------------------------------------------------------------

struct Parameterization {
  int n = 0;
  int num_phi = 0;    // traceless symmetric basis size
  int num_c = 0;      // effective null-space directions
  MatrixXd W;         // T x n
  MatrixXd Znull;     // T x (T-d), orthonormal columns
  MatrixXd Ceffect;   // Znull * Vk, T x num_c_cols (reduced C directions)
  int c_rank = 0;     // rank of Xplus * Znull
  std::vector<MatrixXd> phi_basis;  // n x n symmetric traceless
};

MatrixXd phi_of(const Parameterization& par, const VectorXd& y) {
  MatrixXd phi = MatrixXd::Identity(par.n, par.n);
  for (int k = 0; k < par.num_phi; ++k) phi += y(k) * par.phi_basis[k];
  return phi;
}

MatrixXd cmat_of(const Parameterization& par, const VectorXd& y) {
  // C-tilde is (c_rank x n), stored column-major after the Phi variables.
  MatrixXd c = MatrixXd::Zero(par.c_rank, par.n);
  int idx = par.num_phi;
  for (int col = 0; col < par.n; ++col)
    for (int row = 0; row < par.c_rank; ++row) c(row, col) = y(idx++);
  return c;
}

MatrixXd h_of(const Parameterization& par, const VectorXd& y) {
  MatrixXd h = par.W * phi_of(par, y);
  if (par.c_rank > 0) h += par.Ceffect * cmat_of(par, y);
  return h;
}

Parameterization build_parameterization(const FeasibilityProblem& pb) {
  Parameterization par;
  par.n = pb.n;

  // Pseudoinverse and null space of the dictionary data matrix.
  Eigen::BDCSVD<MatrixXd> svd(pb.D, Eigen::ComputeFullV | Eigen::ComputeThinU);
  const VectorXd sv = svd.singularValues();
  const double thresh = 1e-8 * sv(0);
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > thresh) ++rank;
  require(rank == pb.d, ErrorCode::RankDeficient,
          "dictionary data matrix is not full row rank; at least d+1 samples "
          "are needed and T should be large enough for full row rank");

  MatrixXd dinv = svd.matrixV().leftCols(pb.d) *
                  sv.head(pb.d).cwiseInverse().asDiagonal() *
                  svd.matrixU().transpose();
  // Refinement keeps D * D^+ - I at machine precision.
  dinv += dinv * (MatrixXd::Identity(pb.d, pb.d) - pb.D * dinv);
  par.W = dinv.leftCols(pb.n);
  par.Znull = svd.matrixV().rightCols(pb.T - pb.d);

  // Only the null-space directions seen by Xplus influence the blocks;
  // the rest is dropped (a minimum-norm style choice).
  if (pb.T > pb.d) {
    const MatrixXd k = pb.Xplus * par.Znull;  // n x (T-d)
    Eigen::BDCSVD<MatrixXd> ksvd(k, Eigen::ComputeFullV);
    const VectorXd ksv = ksvd.singularValues();
    const double kthresh = ksv.size() ? 1e-12 * std::max(1.0, ksv(0)) : 0.0;
    int kr = 0;
    for (int i = 0; i < ksv.size(); ++i)
      if (ksv(i) > kthresh) ++kr;
    par.c_rank = kr;
    if (kr > 0) par.Ceffect = par.Znull * ksvd.matrixV().leftCols(kr);
  }

  // Traceless symmetric basis: off-diagonal pairs then diagonal
  // differences.
  for (int i = 0; i < par.n; ++i)
    for (int j = i + 1; j < par.n; ++j) {
      MatrixXd s = MatrixXd::Zero(par.n, par.n);
      s(i, j) = s(j, i) = 1.0;
      par.phi_basis.push_back(s);
    }
  for (int i = 0; i + 1 < par.n; ++i) {
    MatrixXd s = MatrixXd::Zero(par.n, par.n);
    s(i, i) = 1.0;
    s(i + 1, i + 1) = -1.0;
    par.phi_basis.push_back(s);
  }
  par.num_phi = static_cast<int>(par.phi_basis.size());
  par.num_c = par.c_rank * par.n;
  return par;
}

// Affine block family F_b(y) = F_b(0) + sum_v y_v dF_b[v].
struct BlockFamily {
  std::vector<MatrixXd> base;                // per block
  std::vector<std::vector<MatrixXd>> deriv;  // per block, per variable
  int num_vars = 0;
};

MatrixXd main_block(const FeasibilityProblem& pb, const MatrixXd& h,
                    const MatrixXd& phi) {
  const MatrixXd xh = pb.Xplus * h;
  if (pb.time_kind == TimeKind::Continuous)
    return -(xh + xh.transpose()) - pb.kappa_hat * phi;
  MatrixXd blk(2 * pb.n, 2 * pb.n);
  blk.topLeftCorner(pb.n, pb.n) = phi / (1.0 + pb.mu);
  blk.topRightCorner(pb.n, pb.n) = xh;
  blk.bottomLeftCorner(pb.n, pb.n) = xh.transpose();
  blk.bottomRightCorner(pb.n, pb.n) = pb.kappa * phi;
  return blk;
}

BlockFamily build_blocks(const FeasibilityProblem& pb,
                         const Parameterization& par) {
  BlockFamily fam;
  fam.num_vars = par.num_phi + par.num_c;
  const int p = fam.num_vars;

  const VectorXd zero = VectorXd::Zero(p);
  fam.base.push_back(main_block(pb, h_of(par, zero), phi_of(par, zero)));
  fam.base.push_back(MatrixXd::Identity(pb.n, pb.n) * (1.0 - pb.phi_floor));
  const bool capped =
      pb.time_kind == TimeKind::Continuous && pb.ct_gain_cap > 0;
  if (capped) {
    const MatrixXd xw = pb.Xplus * par.W;
    MatrixXd blk(2 * pb.n, 2 * pb.n);
    blk.topLeftCorner(pb.n, pb.n) =
        pb.ct_gain_cap * MatrixXd::Identity(pb.n, pb.n);
    blk.bottomRightCorner(pb.n, pb.n) = blk.topLeftCorner(pb.n, pb.n);
    blk.topRightCorner(pb.n, pb.n) = xw;
    blk.bottomLeftCorner(pb.n, pb.n) = xw.transpose();
    fam.base.push_back(blk);
  }

  fam.deriv.resize(capped ? 3 : 2);
  for (int v = 0; v < p; ++v) {
    MatrixXd dphi = MatrixXd::Zero(pb.n, pb.n);
    MatrixXd dh;
    if (v < par.num_phi) {
      dphi = par.phi_basis[v];
      dh = par.W * dphi;
    } else {
      const int flat = v - par.num_phi;
      const int col = flat / par.c_rank;
      const int row = flat % par.c_rank;
      dh = par.Ceffect.col(row) * VectorXd::Unit(pb.n, col).transpose();
    }
    const MatrixXd xdh = pb.Xplus * dh;
    if (pb.time_kind == TimeKind::Continuous) {
      fam.deriv[0].push_back(-(xdh + xdh.transpose()) - pb.kappa_hat * dphi);
    } else {
      MatrixXd blk = MatrixXd::Zero(2 * pb.n, 2 * pb.n);
      blk.topLeftCorner(pb.n, pb.n) = dphi / (1.0 + pb.mu);
      blk.topRightCorner(pb.n, pb.n) = xdh;
      blk.bottomLeftCorner(pb.n, pb.n) = xdh.transpose();
      blk.bottomRightCorner(pb.n, pb.n) = pb.kappa * dphi;
      fam.deriv[0].push_back(blk);
    }
    fam.deriv[1].push_back(dphi);
    if (capped) {
      MatrixXd blk = MatrixXd::Zero(2 * pb.n, 2 * pb.n);
      blk.topLeftCorner(pb.n, pb.n) = pb.ct_gain_cap * dphi;
      blk.bottomRightCorner(pb.n, pb.n) = pb.ct_gain_cap * dphi;
      blk.topRightCorner(pb.n, pb.n) = xdh;
      blk.bottomLeftCorner(pb.n, pb.n) = xdh.transpose();
      fam.deriv[2].push_back(blk);
    }
  }
  return fam;
}

std::vector<MatrixXd> eval_blocks(const BlockFamily& fam, const VectorXd& y) {
  std::vector<MatrixXd> out;
  for (size_t b = 0; b < fam.base.size(); ++b) {
    MatrixXd f = fam.base[b];
    for (int v = 0; v < fam.num_vars; ++v) f += y(v) * fam.deriv[b][v];
    out.push_back(symmetrize(f));
  }
  return out;
}

double min_block_eig(const std::vector<MatrixXd>& blocks) {
  double m = std::numeric_limits<double>::infinity();
  for (const MatrixXd& b : blocks) m = std::min(m, min_eigenvalue(b));
  return m;
}

// Barrier Newton machinery. Variables are (y, s) in phase I (blocks
// shifted by s*I, objective t*s) and y alone in the centering phase
// (objective sigma*|y|^2). Feasibility of iterates is maintained by the
// line search, so log det is always defined.
struct NewtonResult {
  VectorXd y;
  double s = 0.0;
  int iterations = 0;
};

class BarrierSolver {
 public:
  BarrierSolver(const BlockFamily& fam, const SolveOptions& opt)
      : fam_(fam), opt_(opt) {}

  // Phase I: minimize s subject to F_b(y) + s I > 0. Returns once s is
  // clearly negative, or once the path is exhausted.
  NewtonResult phase1(double s_exit) const {
    const int p = fam_.num_vars;
    VectorXd y = VectorXd::Zero(p);
    double s = 1.0 - min_block_eig(eval_blocks(fam_, y));
    int iters = 0;
    for (double t = 1.0; t <= 1e10; t *= 10.0) {
      for (int it = 0; it < opt_.max_newton_per_stage; ++it) {
        ++iters;
        VectorXd grad;
        MatrixXd hess;
        gradient_hessian(y, s, true, t, 0.0, &grad, &hess);
        const VectorXd step = solve_step(hess, grad);
        const double decrement = -0.5 * grad.dot(step);
        if (!line_search(&y, &s, step, true, t, 0.0)) break;
        if (s < s_exit) return {y, s, iters};
        if (decrement < 1e-10) break;
      }
      if (s < s_exit) break;
    }
    return {y, s, iters};
  }

  // Centering: minimize w*c'y + sigma*|y|^2 - sum log det F_b(y) from a
  // strictly feasible start. The quadratic term bounds the recession
  // directions the blocks cannot see; c is empty for pure centering.
  NewtonResult center(VectorXd y, double sigma, const VectorXd& c = VectorXd(),
                      double w = 0.0) const {
    int iters = 0;
    if (fam_.num_vars == 0) return {y, 0.0, 0};
    for (int it = 0; it < opt_.max_newton_per_stage; ++it) {
      ++iters;
      VectorXd grad;
      MatrixXd hess;
      gradient_hessian(y, 0.0, false, 0.0, sigma, &grad, &hess);
      if (c.size()) grad += w * c;
      const VectorXd step = solve_step(hess, grad);
      const double decrement = -0.5 * grad.dot(step);
      double s_dummy = 0.0;
      if (!line_search(&y, &s_dummy, step, false, 0.0, sigma, c, w)) break;
      if (decrement < 1e-9) break;
    }
    return {y, 0.0, iters};
  }

 private:
  double objective(const VectorXd& y, double s, bool phase1, double t,
                   double sigma, const VectorXd& c = VectorXd(),
                   double w = 0.0) const {
    std::vector<MatrixXd> blocks = eval_blocks(fam_, y);
    double obj = phase1 ? t * s : sigma * y.squaredNorm();
    if (c.size()) obj += w * c.dot(y);
    for (MatrixXd& b : blocks) {
      if (phase1) b.diagonal().array() += s;
      Eigen::LLT<MatrixXd> llt(b);
      if (llt.info() != Eigen::Success)
        return std::numeric_limits<double>::infinity();
      obj -= 2.0 * MatrixXd(llt.matrixL()).diagonal().array().log().sum();
    }
    return obj;
  }

  void gradient_hessian(const VectorXd& y, double s, bool phase1, double t,
                        double sigma, VectorXd* grad, MatrixXd* hess) const {
    const int p = fam_.num_vars;
    const int dim = phase1 ? p + 1 : p;
    *grad = VectorXd::Zero(dim);
    *hess = MatrixXd::Zero(dim, dim);
    if (phase1) {
      (*grad)(p) = t;
    } else {
      grad->head(p) = 2.0 * sigma * y;
      hess->diagonal().head(p).array() += 2.0 * sigma;
    }

    std::vector<MatrixXd> blocks = eval_blocks(fam_, y);
    for (size_t b = 0; b < blocks.size(); ++b) {
      MatrixXd f = blocks[b];
      if (phase1) f.diagonal().array() += s;
      const int bd = static_cast<int>(f.rows());
      Eigen::LLT<MatrixXd> llt(f);
      require(llt.info() == Eigen::Success, ErrorCode::Internal,
              "barrier iterate left the cone");
      const MatrixXd finv = llt.solve(MatrixXd::Identity(bd, bd));

      // Rows of flat are vec(F^{-1} dF_v); the Hessian block is then a
      // single GEMM because tr(A B) = vec(A).dot(vec(B^T)).
      MatrixXd flat(dim, bd * bd);
      MatrixXd flat_t(dim, bd * bd);
      for (int v = 0; v < dim; ++v) {
        MatrixXd m;
        if (v < p)
          m = finv * fam_.deriv[b][v];
        else
          m = finv;  // derivative of the s*I shift
        flat.row(v) = Eigen::Map<const VectorXd>(m.data(), m.size());
        MatrixXd mt = m.transpose();
        flat_t.row(v) = Eigen::Map<const VectorXd>(mt.data(), mt.size());
        (*grad)(v) -= m.trace();
      }
      hess->noalias() += flat * flat_t.transpose();
    }
  }

  static VectorXd solve_step(MatrixXd hess, const VectorXd& grad) {
    if (grad.size() == 0) return VectorXd();
    hess.diagonal().array() += 1e-12 * (1.0 + hess.diagonal().maxCoeff());
    Eigen::LDLT<MatrixXd> ldlt(hess);
    return -ldlt.solve(grad);
  }

  bool line_search(VectorXd* y, double* s, const VectorXd& step, bool phase1,
                   double t, double sigma, const VectorXd& c = VectorXd(),
                   double w = 0.0) const {
    const int p = fam_.num_vars;
    const double f0 = objective(*y, *s, phase1, t, sigma, c, w);
    double alpha = 1.0;
    for (int k = 0; k < 60; ++k, alpha *= 0.5) {
      VectorXd yn = *y + alpha * step.head(p);
      double sn = phase1 ? *s + alpha * step(p) : *s;
      const double f1 = objective(yn, sn, phase1, t, sigma, c, w);
      if (f1 < f0 - 1e-14 * std::abs(f0)) {
        *y = yn;
        *s = sn;
        return true;
      }
    }
    return false;
  }

  const BlockFamily& fam_;
  const SolveOptions& opt_;
};

MatrixXd solve_q2(const FeasibilityProblem& pb, const SolveOptions& opt) {
  const int dn = pb.d - pb.n;
  if (dn == 0) return MatrixXd::Zero(pb.T, 0);
  MatrixXd stacked(pb.d + pb.n, pb.T);
  stacked.topRows(pb.d) = pb.D;
  stacked.bottomRows(pb.n) = pb.Xplus;
  MatrixXd rhs = MatrixXd::Zero(pb.d + pb.n, dn);
  rhs.block(pb.n, 0, dn, dn).setIdentity();

  Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(stacked);
  MatrixXd q2 = cod.solve(rhs);
  q2 += cod.solve(rhs - stacked * q2);  // one refinement round

  const MatrixXd rd = pb.D * q2 - rhs.topRows(pb.d);
  const MatrixXd rx = pb.Xplus * q2;
  const double res_d = rd.size() ? rd.cwiseAbs().maxCoeff() : 0.0;
  const double res_x = rx.size() ? rx.cwiseAbs().maxCoeff() : 0.0;
  if (res_d > opt.eq_tol)
    throw Error(ErrorCode::RankDeficient,
                "nonlinear_selector equalities unsolvable (residual " +
                    format_double(res_d) +
                    "); the dictionary data is not rich enough");
  if (res_x > opt.eq_tol)
    throw Error(ErrorCode::Infeasible,
                "successor_annihilation equalities unsolvable (residual " +
                    format_double(res_x) +
                    "); nonlinear terms do not appear matched with the "
                    "input channels");
  return q2;
}

}  // namespace

FeasibilityProblem assemble_ct(const TrajectoryBatch& excited,
                               double kappa_hat, double ct_gain_cap) {
  require(excited.time_kind == TimeKind::Continuous, ErrorCode::InvalidInput,
          "assemble_ct needs a continuous-time batch");
  require(excited.excitation == Excitation::Excited, ErrorCode::InvalidInput,
          "assemble_ct needs the excited batch");
  require(kappa_hat > 0, ErrorCode::InvalidInput, "kappa_hat must be positive");
  FeasibilityProblem pb;
  pb.time_kind = TimeKind::Continuous;
  pb.n = excited.state_dim();
  pb.d = excited.dict_dim();
  pb.T = excited.T;
  pb.D = excited.D;
  pb.Xplus = excited.Xplus;
  pb.kappa_hat = kappa_hat;
  pb.ct_gain_cap = ct_gain_cap;
  return pb;
}

FeasibilityProblem assemble_dt(const TrajectoryBatch& excited, double kappa,
                               double mu) {
  require(excited.time_kind == TimeKind::Discrete, ErrorCode::InvalidInput,
          "assemble_dt needs a discrete-time batch");
  require(excited.excitation == Excitation::Excited, ErrorCode::InvalidInput,
          "assemble_dt needs the excited batch");
  require(kappa > 0 && kappa < 1, ErrorCode::InvalidInput,
          "kappa must lie in (0,1)");
  require(mu > 0, ErrorCode::InvalidInput, "mu must be positive");
  FeasibilityProblem pb;
  pb.time_kind = TimeKind::Discrete;
  pb.n = excited.state_dim();
  pb.d = excited.dict_dim();
  pb.T = excited.T;
  pb.D = excited.D;
  pb.Xplus = excited.Xplus;
  pb.kappa = kappa;
  pb.mu = mu;
  return pb;
}

std::map<std::string, double> equality_residuals(
    const FeasibilityProblem& pb, const MatrixXd& Q2, const MatrixXd& H,
    const MatrixXd& Phi) {
  std::map<std::string, double> res;
  const int dn = pb.d - pb.n;
  MatrixXd sel = MatrixXd::Zero(pb.d, dn);
  sel.bottomRows(dn).setIdentity();
  const MatrixXd ra = pb.Xplus * Q2;
  const MatrixXd rb = pb.D * Q2 - sel;
  res["successor_annihilation"] = ra.size() ? ra.cwiseAbs().maxCoeff() : 0.0;
  res["nonlinear_selector"] = rb.size() ? rb.cwiseAbs().maxCoeff() : 0.0;
  MatrixXd hsel(pb.d, pb.n);
  hsel.topRows(pb.n) = Phi;
  hsel.bottomRows(dn).setZero();
  res["state_selector"] = (pb.D * H - hsel).cwiseAbs().maxCoeff();
  return res;
}

double block_margin(const FeasibilityProblem& pb, const MatrixXd& H,
                    const MatrixXd& Phi) {
  return min_eigenvalue(main_block(pb, H, Phi));
}

FeasibilitySolution solve(const FeasibilityProblem& pb,
                          const SolveOptions& opt) {
  require(pb.n >= 1 && pb.d >= pb.n && pb.T >= 1, ErrorCode::InvalidInput,
          "malformed feasibility problem");
  require(pb.D.rows() == pb.d && pb.D.cols() == pb.T, ErrorCode::InvalidInput,
          "dictionary data has wrong shape");
  require(pb.Xplus.rows() == pb.n && pb.Xplus.cols() == pb.T,
          ErrorCode::InvalidInput, "successor data has wrong shape");

  FeasibilitySolution sol;
  sol.Q2 = solve_q2(pb, opt);

  const Parameterization par = build_parameterization(pb);
  const BlockFamily fam = build_blocks(pb, par);
  BarrierSolver solver(fam, opt);

  // Any margin clearly below zero is good enough to switch to centering.
  const double block_scale =
      1.0 + fam.base[0].cwiseAbs().maxCoeff();
  NewtonResult ph1 = solver.phase1(-1e-8);
  sol.newton_iterations = ph1.iterations;

  VectorXd y = ph1.y;
  if (ph1.s < -1e-8) {
    NewtonResult ph2 = solver.center(y, 1e-3);
    sol.newton_iterations += ph2.iterations;
    y = ph2.y;
    sol.status = "interior";

    if (opt.shape_bdata && opt.shape_r1bhat) {
      // Deviation-gain pass: extend the family with the Schur block over
      // (Phi, Psi, t) and follow a decreasing-t path.
      const MatrixXd& bd = *opt.shape_bdata;
      const MatrixXd& rb = *opt.shape_r1bhat;
      const int mdim = static_cast<int>(bd.cols());
      const int mh = static_cast<int>(rb.cols());
      const int p = fam.num_vars;
      const int pext = p + mdim * mh + 1;
      const int sd = pb.n + mh;
      const int nblocks = static_cast<int>(fam.base.size());

      BlockFamily ext;
      ext.num_vars = pext;
      ext.base = fam.base;
      ext.deriv.resize(nblocks + 1);
      for (int b = 0; b < nblocks; ++b) {
        ext.deriv[b] = fam.deriv[b];
        for (int v = p; v < pext; ++v)
          ext.deriv[b].push_back(
              MatrixXd::Zero(fam.base[b].rows(), fam.base[b].cols()));
      }
      MatrixXd sbase = MatrixXd::Zero(sd, sd);
      sbase.topLeftCorner(pb.n, pb.n).setIdentity();  // Phi at y = 0
      sbase.topRightCorner(pb.n, mh) = -rb;
      sbase.bottomLeftCorner(mh, pb.n) = -rb.transpose();
      ext.base.push_back(sbase);
      for (int v = 0; v < pext; ++v) {
        MatrixXd dblk = MatrixXd::Zero(sd, sd);
        if (v < par.num_phi) {
          dblk.topLeftCorner(pb.n, pb.n) = par.phi_basis[v];
        } else if (v >= p && v < pext - 1) {
          const int flat = v - p;
          const int col = flat / mdim;
          const int row = flat % mdim;
          dblk.topRightCorner(pb.n, mh) =
              bd.col(row) * VectorXd::Unit(mh, col).transpose();
          dblk.bottomLeftCorner(mh, pb.n) =
              dblk.topRightCorner(pb.n, mh).transpose();
        } else if (v == pext - 1) {
          dblk.bottomRightCorner(mh, mh).setIdentity();
        }
        ext.deriv[nblocks].push_back(dblk);
      }

      VectorXd yext = VectorXd::Zero(pext);
      yext.head(p) = y;
      MatrixXd phi0 = phi_of(par, y);
      yext(pext - 1) =
          1.5 * max_eigenvalue(rb.transpose() * phi0.llt().solve(rb)) + 1.0;
      VectorXd cobj = VectorXd::Zero(pext);
      cobj(pext - 1) = 1.0;

      BarrierSolver esolver(ext, opt);
      double prev_t = yext(pext - 1);
      for (double w = 1.0; w <= 1e6; w *= 10.0) {
        NewtonResult r = esolver.center(yext, 1e-3, cobj, w);
        yext = r.y;
        sol.newton_iterations += r.iterations;
        const double tcur = yext(pext - 1);
        if (w > 100 && prev_t - tcur < 1e-3 * std::max(1.0, prev_t)) break;
        prev_t = tcur;
      }
      y = yext.head(p);
    }
  } else if (ph1.s <= 1e-7 * block_scale + 1e-9) {
    // No strict interior, but the best point sits on the boundary within
    // tolerance; accept it as-is.
    sol.status = "boundary";
  } else {
    const std::vector<MatrixXd> blocks = eval_blocks(fam, y);
    const char* names[] = {pb.time_kind == TimeKind::Continuous
                               ? "decay (ct rate condition)"
                               : "contraction (dt block condition)",
                           "positive-definiteness floor on Phi",
                           "closed-loop gain cap"};
    const char* family = names[0];
    double worst = min_eigenvalue(blocks[0]);
    for (size_t b = 1; b < blocks.size(); ++b) {
      const double m = min_eigenvalue(blocks[b]);
      if (m < worst) {
        worst = m;
        family = names[b];
      }
    }
    throw Error(ErrorCode::Infeasible,
                std::string("feasibility program is infeasible; violated "
                            "family: ") +
                    family + " (best margin " + format_double(-ph1.s) + ")");
  }

  sol.Phi = symmetrize(phi_of(par, y));
  sol.H = h_of(par, y);

  sol.equality_residuals = equality_residuals(pb, sol.Q2, sol.H, sol.Phi);
  sol.lmi_margin = block_margin(pb, sol.H, sol.Phi);
  sol.phi_margin = min_eigenvalue(sol.Phi) - pb.phi_floor;

  for (const auto& [name, value] : sol.equality_residuals)
    if (value > opt.eq_tol)
      throw Error(ErrorCode::Infeasible,
                  "equality family '" + name + "' residual " +
                      format_double(value) + " exceeds tolerance");
  if (sol.lmi_margin < opt.lmi_margin_tol * block_scale)
    throw Error(ErrorCode::Infeasible,
                "matrix-inequality margin " + format_double(sol.lmi_margin) +
                    " below tolerance after solve");

  const double phi_min = min_eigenvalue(sol.Phi);
  const double phi_max = max_eigenvalue(sol.Phi);
  if (phi_min <= 0 || phi_max / phi_min > opt.phi_condition_limit)
    throw Error(ErrorCode::Infeasible,
                "Phi is ill-conditioned (condition " +
                    format_double(phi_max / std::max(phi_min, 1e-300)) + ")");
  return sol;
}

void dump_problem(const FeasibilityProblem& pb, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), ErrorCode::Io, "cannot write " + path);
  const int dn = pb.d - pb.n;
  // Variable ids: Q2 entries first (column-major), then H (column-major),
  // then Phi upper triangle (row-major by row then column).
  const int q2_base = 0;
  const int h_base = pb.T * dn;
  const int phi_base = h_base + pb.T * pb.n;
  auto phi_id = [&](int i, int j) {
    if (i > j) std::swap(i, j);
    return phi_base + i * pb.n - i * (i - 1) / 2 + (j - i);
  };

  out << "# romkit feasibility program, sparse triplets\n";
  out << "# vars q2 " << pb.T * dn << " h " << pb.T * pb.n << " phi "
      << pb.n * (pb.n + 1) / 2 << "\n";
  out << "# time_kind " << time_kind_name(pb.time_kind) << "\n";
  if (pb.time_kind == TimeKind::Continuous)
    out << "# kappa_hat " << format_double(pb.kappa_hat) << "\n";
  else
    out << "# kappa " << format_double(pb.kappa) << " mu "
        << format_double(pb.mu) << "\n";

  int cid = 0;
  // successor_annihilation: Xplus * Q2 == 0, entry (r, c).
  for (int c = 0; c < dn; ++c)
    for (int r = 0; r < pb.n; ++r) {
      for (int k = 0; k < pb.T; ++k)
        out << "eq " << cid << " " << q2_base + c * pb.T + k << " "
            << format_double(pb.Xplus(r, k)) << "\n";
      out << "rhs " << cid << " 0\n";
      ++cid;
    }
  // nonlinear_selector: D * Q2 == [0; I].
  for (int c = 0; c < dn; ++c)
    for (int r = 0; r < pb.d; ++r) {
      for (int k = 0; k < pb.T; ++k)
        out << "eq " << cid << " " << q2_base + c * pb.T + k << " "
            << format_double(pb.D(r, k)) << "\n";
      out << "rhs " << cid << " " << (r == pb.n + c ? 1 : 0) << "\n";
      ++cid;
    }
  // state_selector: D * H - [Phi; 0] == 0.
  for (int c = 0; c < pb.n; ++c)
    for (int r = 0; r < pb.d; ++r) {
      for (int k = 0; k < pb.T; ++k)
        out << "eq " << cid << " " << h_base + c * pb.T + k << " "
            << format_double(pb.D(r, k)) << "\n";
      if (r < pb.n) out << "eq " << cid << " " << phi_id(r, c) << " -1\n";
      out << "rhs " << cid << " 0\n";
      ++cid;
    }

  // Main inequality block, entry (i, j): affine in H and Phi.
  const int bd = pb.time_kind == TimeKind::Continuous ? pb.n : 2 * pb.n;
  out << "# lmi block 0 dim " << bd << " (semidefinite, >= 0)\n";
  auto emit = [&](int i, int j, int vid, double coeff) {
    out << "lmi 0 " << i << " " << j << " " << vid << " "
        << format_double(coeff) << "\n";
  };
  if (pb.time_kind == TimeKind::Continuous) {
    // -(Xplus H + (Xplus H)^T) - kappa_hat * Phi at entry (i, j).
    for (int i = 0; i < pb.n; ++i)
      for (int j = 0; j < pb.n; ++j) {
        for (int k = 0; k < pb.T; ++k) {
          emit(i, j, h_base + j * pb.T + k, -pb.Xplus(i, k));
          emit(i, j, h_base + i * pb.T + k, -pb.Xplus(j, k));
        }
        emit(i, j, phi_id(i, j), -pb.kappa_hat);
      }
  } else {
    for (int i = 0; i < pb.n; ++i)
      for (int j = 0; j < pb.n; ++j) {
        emit(i, j, phi_id(i, j), 1.0 / (1.0 + pb.mu));
        emit(pb.n + i, pb.n + j, phi_id(i, j), pb.kappa);
        for (int k = 0; k < pb.T; ++k) {
          emit(i, pb.n + j, h_base + j * pb.T + k, pb.Xplus(i, k));
          emit(pb.n + j, i, h_base + j * pb.T + k, pb.Xplus(i, k));
        }
      }
  }
  // Floor block: Phi - phi_floor * I >= 0.
  out << "# lmi block 1 dim " << pb.n << " (semidefinite, >= 0)\n";
  for (int i = 0; i < pb.n; ++i)
    for (int j = 0; j < pb.n; ++j)
      out << "lmi 1 " << i << " " << j << " " << phi_id(i, j) << " 1\n";
  for (int i = 0; i < pb.n; ++i)
    out << "lmi0 1 " << i << " " << i << " " << format_double(-pb.phi_floor)
        << "\n";
  require(out.good(), ErrorCode::Io, "write failed for " + path);
}

}  // namespace lmi
}  // namespace romkit
