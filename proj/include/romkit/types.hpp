#ifndef ROMKIT_TYPES_HPP
#define ROMKIT_TYPES_HPP

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace romkit {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Eigen::VectorXi;

enum class TimeKind { Continuous, Discrete };

enum class Excitation { Excited, ZeroInput };

// Error taxonomy shared by the core, the C API and the CLI exit codes.
enum class ErrorCode {
  InvalidInput,   // bad dimensions, malformed config, bad arguments
  RankDeficient,  // data matrices not rich enough
  Infeasible,     // feasibility program has no solution / certificate failed
  Diverged,       // simulation blew up
  Io,             // file read/write problems
  Internal,       // should-not-happen
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

inline const char* time_kind_name(TimeKind k) {
  return k == TimeKind::Continuous ? "ct" : "dt";
}

// Axis-aligned box used for sampling and for synthesis regions.
struct Box {
  VectorXd lo, hi;
  int dim() const { return static_cast<int>(lo.size()); }
  bool contains(const VectorXd& x, double slack = 0.0) const {
    for (int i = 0; i < lo.size(); ++i)
      if (x(i) < lo(i) - slack || x(i) > hi(i) + slack) return false;
    return true;
  }
};

}  // namespace romkit

#endif  // ROMKIT_TYPES_HPP
