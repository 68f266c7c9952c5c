#ifndef ROMKIT_PLANT_HPP
#define ROMKIT_PLANT_HPP

#include <functional>
#include <optional>
#include <string>

#include "romkit/dictionary.hpp"
#include "romkit/types.hpp"

namespace romkit {

// Built-in ground-truth systems. They play the role of the "unknown"
// plant: data collection and oracle checks may query them, certificates
// never do.
enum class BenchmarkId { Ct10, Dt10, PendulumCt, PendulumDt };

const char* benchmark_name(BenchmarkId id);
std::optional<BenchmarkId> benchmark_from_name(const std::string& name);

struct BenchmarkInfo {
  BenchmarkId id;
  TimeKind time_kind;
  int state_dim;
  int input_dim;
  int dict_dim;
};

BenchmarkInfo benchmark_info(BenchmarkId id);

// The dictionary each benchmark is shipped with (deliberately larger
// than the terms actually present in the dynamics).
DictionarySpec benchmark_dictionary(BenchmarkId id);

// A plant is either one of the built-in closed-form benchmarks or a
// generic pair (A, B) over a dictionary.
class PlantModel {
 public:
  static PlantModel builtin(BenchmarkId id);
  static PlantModel linear_in_dictionary(TimeKind kind, MatrixXd a, MatrixXd b,
                                         DictionarySpec spec);

  TimeKind time_kind() const { return time_kind_; }
  int state_dim() const { return n_; }
  int input_dim() const { return m_; }

  // Continuous plants return xdot, discrete plants return the successor.
  VectorXd rhs(const VectorXd& x, const VectorXd& u) const;

 private:
  PlantModel() = default;

  TimeKind time_kind_ = TimeKind::Continuous;
  int n_ = 0;
  int m_ = 0;
  std::optional<BenchmarkId> builtin_;
  MatrixXd a_, b_;
  std::optional<DictionarySpec> spec_;
};

// Any state component beyond this magnitude aborts a simulation.
inline constexpr double kDivergenceLimit = 1e9;

// Classical fixed-step RK4 with the input held over each step.
// Column k of the result is the state at time k*tau (steps+1 columns).
MatrixXd simulate_ct(const PlantModel& plant, const VectorXd& x0,
                     const std::function<VectorXd(double)>& input_signal,
                     double tau, int steps);

// Exact recursion for discrete plants (steps+1 columns).
MatrixXd simulate_dt(const PlantModel& plant, const VectorXd& x0,
                     const std::function<VectorXd(int)>& input_signal,
                     int steps);

// Forward differences: input has T+1 columns, output has T. The
// estimation error scales linearly with tau.
MatrixXd estimate_derivatives(const MatrixXd& states, double tau);

}  // namespace romkit

#endif  // ROMKIT_PLANT_HPP
