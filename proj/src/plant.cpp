#include "romkit/plant.hpp"

#include <cmath>

#include "numeric_impl.hpp"

namespace romkit {
namespace {

constexpr double kGravity = 9.81;
constexpr double kPendulumDtStep = 0.05;

// 10-state continuous benchmark; inputs act on rows 1, 4, 8, 10 through
// the same channels as the nonlinear terms.
VectorXd ct10_rhs(const VectorXd& x, const VectorXd& u) {
  VectorXd f(10);
  f(0) = -2 * x(0) + x(1) + std::log1p(x(9) * x(9)) +
         x(0) / (1 + x(4) * x(4)) + u(0);
  f(1) = 4 * x(0) - 3 * x(1) - 4 * x(2);
  f(2) = -4 * x(2) + 8 * x(3);
  f(3) = 8 * x(2) - 5 * x(3) - 8 * x(4) + std::sin(x(7) * x(9)) + u(1);
  f(4) = -6 * x(3) - 6 * x(4) - 9 * x(5);
  f(5) = -x(4) - 7 * x(5) - 10 * x(6);
  f(6) = -x(5) - 8 * x(6) + 3 * x(7);
  f(7) = -5 * x(6) - 9 * x(7) + 4 * x(8) + x(0) / (1 + x(2) * x(2)) + u(2);
  f(8) = 2 * x(7) - 10 * x(8) - 10 * x(9);
  f(9) = x(8) - 11 * x(9) + std::log1p(x(9) * x(9)) + u(3);
  return f;
}

// 10-state discrete benchmark.
VectorXd dt10_rhs(const VectorXd& x, const VectorXd& u) {
  VectorXd f(10);
  f(0) = 0.7 * x(0) + 0.3 * x(1) + 0.15 * x(5) * x(6) +
         0.15 * x(3) * std::atan(x(3)) + 0.15 * u(0);
  f(1) = 0.15 * x(0) + 0.55 * x(1) + 0.3 * x(2);
  f(2) = 0.15 * x(1) + 0.4 * x(2) + 0.3 * x(3);
  f(3) = 0.15 * x(2) + 0.25 * x(3) + 0.3 * x(4) + 0.15 * x(8) * x(9) +
         0.15 * u(1);
  f(4) = 0.15 * x(3) + 0.1 * x(4) + 0.3 * x(5);
  f(5) = 0.15 * x(4) - 0.05 * x(5) + 0.3 * x(6);
  f(6) = 0.15 * x(5) - 0.2 * x(6) + 0.3 * x(7);
  f(7) = 0.15 * x(6) - 0.35 * x(7) + 0.3 * x(8) + 0.15 * std::sin(x(0)) +
         0.15 * u(2);
  f(8) = 0.15 * x(7) - 0.5 * x(8) + 0.3 * x(9);
  f(9) = 0.15 * x(8) - 0.65 * x(9) + x(4) * std::atan(x(4)) + 0.15 * u(3);
  return f;
}

// Double pendulum, angles and angular velocities interleaved.
VectorXd pendulum_ct_rhs(const VectorXd& x, const VectorXd& u) {
  VectorXd f(4);
  const double coupling = std::sin(x(0) - x(2));
  f(0) = x(1);
  f(1) = kGravity * std::sin(x(0)) - coupling * x(1) * x(1) + 30.0 * u(0);
  f(2) = x(3);
  f(3) = kGravity * std::sin(x(2)) - coupling * x(3) * x(3) + 39.0 * u(1);
  return f;
}

// Forward-Euler discretization of the pendulum at 0.05 s. Euler keeps
// the successor linear in the same dictionary, so the discrete system
// stays inside the model class.
VectorXd pendulum_dt_rhs(const VectorXd& x, const VectorXd& u) {
  return x + kPendulumDtStep * pendulum_ct_rhs(x, u);
}

void check_finite(const VectorXd& v, const char* what) {
  require(v.allFinite(), ErrorCode::InvalidInput,
          std::string(what) + " has non-finite entries");
}

}  // namespace

const char* benchmark_name(BenchmarkId id) {
  switch (id) {
    case BenchmarkId::Ct10: return "ct10";
    case BenchmarkId::Dt10: return "dt10";
    case BenchmarkId::PendulumCt: return "pendulum_ct";
    case BenchmarkId::PendulumDt: return "pendulum_dt";
  }
  return "?";
}

std::optional<BenchmarkId> benchmark_from_name(const std::string& name) {
  for (BenchmarkId id : {BenchmarkId::Ct10, BenchmarkId::Dt10,
                         BenchmarkId::PendulumCt, BenchmarkId::PendulumDt}) {
    if (name == benchmark_name(id)) return id;
  }
  return std::nullopt;
}

BenchmarkInfo benchmark_info(BenchmarkId id) {
  switch (id) {
    case BenchmarkId::Ct10:
      return {id, TimeKind::Continuous, 10, 4, 27};
    case BenchmarkId::Dt10:
      return {id, TimeKind::Discrete, 10, 4, 26};
    case BenchmarkId::PendulumCt:
      return {id, TimeKind::Continuous, 4, 2, 12};
    case BenchmarkId::PendulumDt:
      return {id, TimeKind::Discrete, 4, 2, 12};
  }
  throw Error(ErrorCode::Internal, "unknown benchmark");
}

DictionarySpec benchmark_dictionary(BenchmarkId id) {
  std::vector<BasisFunction> e;
  switch (id) {
    case BenchmarkId::Ct10: {
      for (int i = 1; i <= 10; ++i) e.push_back({BasisKind::Coordinate, i, 0});
      for (int i = 1; i <= 10; ++i) e.push_back({BasisKind::Log1pSquare, i, 0});
      for (int j = 1; j <= 5; ++j) e.push_back({BasisKind::Rational, 1, j});
      e.push_back({BasisKind::SineProduct, 8, 10});
      e.push_back({BasisKind::CosineProduct, 8, 10});
      return DictionarySpec(10, std::move(e));
    }
    case BenchmarkId::Dt10: {
      for (int i = 1; i <= 10; ++i) e.push_back({BasisKind::Coordinate, i, 0});
      for (int i = 1; i <= 5; ++i) e.push_back({BasisKind::ArctanWeighted, i, 0});
      for (int i = 5; i <= 9; ++i) e.push_back({BasisKind::Product, i, i + 1});
      e.push_back({BasisKind::Sine, 1, 0});
      e.push_back({BasisKind::Cosine, 10, 0});
      e.push_back({BasisKind::Sine, 2, 0});
      e.push_back({BasisKind::Cosine, 8, 0});
      e.push_back({BasisKind::Sine, 3, 0});
      e.push_back({BasisKind::Cosine, 6, 0});
      return DictionarySpec(10, std::move(e));
    }
    case BenchmarkId::PendulumCt:
    case BenchmarkId::PendulumDt: {
      for (int i = 1; i <= 4; ++i) e.push_back({BasisKind::Coordinate, i, 0});
      for (int i = 1; i <= 4; ++i) e.push_back({BasisKind::Sine, i, 0});
      for (int i = 1; i <= 4; ++i)
        e.push_back({BasisKind::PendulumCoupling, i, 0});
      return DictionarySpec(4, std::move(e));
    }
  }
  throw Error(ErrorCode::Internal, "unknown benchmark");
}

PlantModel PlantModel::builtin(BenchmarkId id) {
  const BenchmarkInfo info = benchmark_info(id);
  PlantModel p;
  p.time_kind_ = info.time_kind;
  p.n_ = info.state_dim;
  p.m_ = info.input_dim;
  p.builtin_ = id;
  return p;
}

PlantModel PlantModel::linear_in_dictionary(TimeKind kind, MatrixXd a,
                                            MatrixXd b, DictionarySpec spec) {
  require(a.rows() == spec.state_dim() && a.cols() == spec.size(),
          ErrorCode::InvalidInput, "A must be state_dim x dict_dim");
  require(b.rows() == spec.state_dim(), ErrorCode::InvalidInput,
          "B must have state_dim rows");
  PlantModel p;
  p.time_kind_ = kind;
  p.n_ = spec.state_dim();
  p.m_ = static_cast<int>(b.cols());
  p.a_ = std::move(a);
  p.b_ = std::move(b);
  p.spec_ = std::move(spec);
  return p;
}

VectorXd PlantModel::rhs(const VectorXd& x, const VectorXd& u) const {
  require(x.size() == n_, ErrorCode::InvalidInput, "state dimension mismatch");
  require(u.size() == m_, ErrorCode::InvalidInput, "input dimension mismatch");
  if (builtin_) {
    switch (*builtin_) {
      case BenchmarkId::Ct10: return ct10_rhs(x, u);
      case BenchmarkId::Dt10: return dt10_rhs(x, u);
      case BenchmarkId::PendulumCt: return pendulum_ct_rhs(x, u);
      case BenchmarkId::PendulumDt: return pendulum_dt_rhs(x, u);
    }
  }
  return a_ * spec_->evaluate(x) + b_ * u;
}

MatrixXd simulate_ct(const PlantModel& plant, const VectorXd& x0,
                     const std::function<VectorXd(double)>& input_signal,
                     double tau, int steps) {
  require(plant.time_kind() == TimeKind::Continuous, ErrorCode::InvalidInput,
          "simulate_ct needs a continuous plant");
  require(tau > 0, ErrorCode::InvalidInput, "tau must be positive");
  require(steps >= 0, ErrorCode::InvalidInput, "steps must be non-negative");
  check_finite(x0, "initial state");

  MatrixXd traj(plant.state_dim(), steps + 1);
  traj.col(0) = x0;
  VectorXd x = x0;
  for (int k = 0; k < steps; ++k) {
    const VectorXd u = input_signal(k * tau);
    const VectorXd k1 = plant.rhs(x, u);
    const VectorXd k2 = plant.rhs(x + 0.5 * tau * k1, u);
    const VectorXd k3 = plant.rhs(x + 0.5 * tau * k2, u);
    const VectorXd k4 = plant.rhs(x + tau * k3, u);
    x += (tau / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!x.allFinite() || x.cwiseAbs().maxCoeff() > kDivergenceLimit)
      throw Error(ErrorCode::Diverged,
                  "trajectory diverged at step " + std::to_string(k + 1));
    traj.col(k + 1) = x;
  }
  return traj;
}

MatrixXd simulate_dt(const PlantModel& plant, const VectorXd& x0,
                     const std::function<VectorXd(int)>& input_signal,
                     int steps) {
  require(plant.time_kind() == TimeKind::Discrete, ErrorCode::InvalidInput,
          "simulate_dt needs a discrete plant");
  require(steps >= 0, ErrorCode::InvalidInput, "steps must be non-negative");
  check_finite(x0, "initial state");

  MatrixXd traj(plant.state_dim(), steps + 1);
  traj.col(0) = x0;
  VectorXd x = x0;
  for (int k = 0; k < steps; ++k) {
    x = plant.rhs(x, input_signal(k));
    if (!x.allFinite() || x.cwiseAbs().maxCoeff() > kDivergenceLimit)
      throw Error(ErrorCode::Diverged,
                  "trajectory diverged at step " + std::to_string(k + 1));
    traj.col(k + 1) = x;
  }
  return traj;
}

MatrixXd estimate_derivatives(const MatrixXd& states, double tau) {
  require(states.cols() >= 2, ErrorCode::InvalidInput,
          "derivative estimation needs at least 2 samples");
  require(tau > 0, ErrorCode::InvalidInput, "tau must be positive");
  const auto T = states.cols() - 1;
  return (states.rightCols(T) - states.leftCols(T)) / tau;
}

}  // namespace romkit
