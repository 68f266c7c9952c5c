#ifndef ROMKIT_EXPERIMENT_HPP
#define ROMKIT_EXPERIMENT_HPP

#include <cstdint>
#include <string>

#include "romkit/dictionary.hpp"
#include "romkit/plant.hpp"
#include "romkit/types.hpp"

namespace romkit {

enum class DerivativeMode { ForwardDifference, Oracle };

// One experiment: inputs, states, successors (xdot samples for ct,
// shifted states for dt) and the dictionary matrix, all with T columns.
struct TrajectoryBatch {
  TimeKind time_kind = TimeKind::Continuous;
  Excitation excitation = Excitation::Excited;
  DerivativeMode derivative_mode = DerivativeMode::ForwardDifference;
  int T = 0;
  double tau = 0.0;  // ct only
  uint64_t seed = 0;
  int restart_every = 0;  // segment length; 0 = single trajectory
  MatrixXd U;        // m x T
  MatrixXd X;        // n x T
  MatrixXd Xplus;    // n x T
  MatrixXd D;        // d x T
  // Raw samples including each segment's trailing state, so exports lose
  // nothing: one block of (segment+1) columns per segment.
  MatrixXd raw_states;
  std::string dictionary_hash;

  int state_dim() const { return static_cast<int>(X.rows()); }
  int input_dim() const { return static_cast<int>(U.rows()); }
  int dict_dim() const { return static_cast<int>(D.rows()); }
  std::string data_hash() const;
};

enum class InputLaw { UniformRandom, Zero };

struct ExperimentConfig {
  int T = 0;
  double tau = 0.01;          // ct only
  InputLaw input_law = InputLaw::UniformRandom;
  VectorXd input_lo, input_hi;  // per-channel box for UniformRandom
  VectorXd x0_lo, x0_hi;        // initial-condition box
  bool x0_fixed = false;
  VectorXd x0;                  // used when x0_fixed
  uint64_t seed = 0;
  DerivativeMode derivative_mode = DerivativeMode::ForwardDifference;
  // Samples per experiment segment; 0 means one trajectory of length T.
  // Shorter segments restart from fresh random initial conditions, which
  // keeps the dictionary data well conditioned when free orbits decay.
  int restart_every = 0;
};

// Runs the plant and assembles all data matrices. For continuous plants
// one extra trailing sample is collected so forward differences yield
// exactly T successor columns. Bitwise reproducible from the seed.
TrajectoryBatch collect(const PlantModel& plant, const DictionarySpec& spec,
                        const ExperimentConfig& config);

struct RankReport {
  int rank = 0;
  bool full_row_rank = false;
  double condition = 0.0;  // sigma_max / sigma_min
  double sigma_max = 0.0;
  double sigma_min = 0.0;
};

// Rank from singular values with threshold 1e-8 * sigma_max.
RankReport rank_report(const MatrixXd& m);

// M^T (M M^T)^{-1} for full-row-rank M, via a rank-revealing
// factorization. Throws if the rank check fails.
MatrixXd right_pinv(const MatrixXd& m);

struct QbarSolution {
  MatrixXd Qbar;   // T x d, Dbar * Qbar == I_d
  MatrixXd Qbar1;  // T x n
  MatrixXd Qbar2;  // T x (d-n)
  double residual = 0.0;  // max-abs of Dbar*Qbar - I
};

QbarSolution solve_qbar(const MatrixXd& dbar, int state_dim);

// Trajectory CSV contract: header "t,x1..xn,u1..um", one row per raw
// sample (T+1 rows), 17-significant-digit decimals, plus a key=value
// metadata file at path + ".meta".
void export_batch_csv(const TrajectoryBatch& batch, const std::string& path);
TrajectoryBatch import_batch_csv(const std::string& path,
                                 const DictionarySpec& spec,
                                 const PlantModel* oracle_plant);

}  // namespace romkit

#endif  // ROMKIT_EXPERIMENT_HPP
