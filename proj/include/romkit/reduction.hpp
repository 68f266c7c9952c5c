#ifndef ROMKIT_REDUCTION_HPP
#define ROMKIT_REDUCTION_HPP

#include <map>
#include <string>
#include <vector>

#include "romkit/dictionary.hpp"
#include "romkit/types.hpp"

namespace romkit {

// Everything the certificate produces. P defines the quadratic
// similarity function S(x, xhat) = (x - R1 xhat)' P (x - R1 xhat);
// (Ahat, Bhat, Chat) is the reduced model; (G, Xi, Psi, R) parameterize
// the interface u = G (D(x) - R xhat) + Xi xhat + Psi uhat; Aest and
// XplusQ are the data-based flow maps used by the closed-loop
// representation.
struct Reduction {
  TimeKind time_kind = TimeKind::Continuous;
  DictionarySpec dictionary;
  int n = 0, m = 0, d = 0, nhat = 0, mhat = 0, T = 0;

  MatrixXd P;       // n x n SPD
  MatrixXd H;       // T x n
  MatrixXd Q;       // T x d = [Q1 Q2], Q1 = H * P
  MatrixXd Qbar;    // T x d
  MatrixXd R1;      // n x nhat
  MatrixXd R2;      // (d-n) x nhat
  MatrixXd Ahat;    // nhat x nhat
  MatrixXd Bhat;    // nhat x mhat
  MatrixXd Chat;    // n x nhat (= R1)
  MatrixXd Xi;      // m x nhat
  MatrixXd Psi;     // m x mhat
  MatrixXd G;       // m x d (= U * Q)
  MatrixXd Bdata;   // n x m
  MatrixXd Aest;    // n x d (= Xbarplus * Qbar)
  MatrixXd XplusQ;  // n x d

  double alpha = 0.0;
  double kappa = 0.0;
  double rho = 0.0;
  double mu = 0.0;
  double kappa_hat = 0.0;  // ct only
  double gamma = 0.0;
  double eta = 0.0;        // dt only
  double nu = 0.0;         // dt only

  std::map<std::string, double> residuals;  // per condition family
  double lmi_margin = 0.0;
  std::string config_hash, data_hash_excited, data_hash_zero;
  std::vector<std::string> notes;

  MatrixXd reduction_matrix() const;  // [R1; R2], d x nhat
  double sf_value(const VectorXd& x, const VectorXd& xhat) const;
  VectorXd output_error(const VectorXd& x, const VectorXd& xhat) const;
};

// Interface function u = G (D(x) - R xhat) + Xi xhat + Psi uhat.
VectorXd interface_input(const Reduction& red, const VectorXd& x,
                         const VectorXd& xhat, const VectorXd& uhat);

// Data-based closed-loop right-hand side (xdot for ct, successor for
// dt): XplusQ D(x) - (XplusQ - Aest) R xhat + Bdata (Xi xhat + Psi uhat).
VectorXd closed_loop_rhs_data(const Reduction& red, const VectorXd& x,
                              const VectorXd& xhat, const VectorXd& uhat);

enum class EqualityMode { FixAhat, FixR1 };

struct ReductionConfig {
  int nhat = 2;
  double kappa_hat = 1.0;  // ct decay budget
  double kappa = 0.5;      // dt contraction factor
  double mu = 0.5;
  double gamma = 0.1;      // Bhat = gamma * I
  double eta = 0.99;       // dt certificate split
  EqualityMode equality_mode = EqualityMode::FixAhat;
  MatrixXd fixed;                // Ahat (nhat x nhat) or R1 (n x nhat)
  std::vector<int> pinned_rows;  // 1-based rows of R1 pinned to identity
                                 // under FixAhat; defaults to 1..nhat
  // Relative cost of the free R1 entries in the minimum-norm selection.
  // Values > 1 push slack into R2 and Xi, which do not enter rho, and
  // typically shrink the certified deviation bound.
  double r1_tail_weight = 1.0;
  // Second feasibility pass that reshapes P to reduce rho (and with it
  // the certified deviation bound). All conditions are re-verified on
  // the reshaped solution.
  bool shape_rho = true;
  // Cap on the P-metric closed-loop gain (ct only; 0 disables). Bounds
  // the interface aggressiveness so refined loops stay integrable.
  double ct_gain_cap = 0.0;
  double eq_tol = 1e-6;
};

struct EmbeddingSolution {
  MatrixXd R1, R2, Xi, Ahat;
  double residual = 0.0;
};

// Solves the linear embedding equality
//   M1 R1 + M2 R2 = R1 Ahat - Bdata Xi
// with either Ahat fixed (R1 partially pinned so the zero solution is
// excluded; minimum-norm completion) or R1 fixed (solving for Ahat).
EmbeddingSolution solve_rom_embedding(const MatrixXd& m1, const MatrixXd& m2,
                                      const MatrixXd& bdata,
                                      const ReductionConfig& config);

// Least-squares minimizer of |sqrt(P) (Bdata Psi - R1 Bhat)|; degenerate
// Bdata falls back to the pseudoinverse solution (noted in *note).
MatrixXd compute_psi(const MatrixXd& p, const MatrixXd& bdata,
                     const MatrixXd& r1, const MatrixXd& bhat,
                     std::string* note = nullptr);

// Archive round-trip (structured text, 17-significant-digit decimals).
void save_reduction(const Reduction& red, const std::string& path);
Reduction load_reduction(const std::string& path);

}  // namespace romkit

#endif  // ROMKIT_REDUCTION_HPP
