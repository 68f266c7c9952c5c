#ifndef ROMKIT_DICTIONARY_HPP
#define ROMKIT_DICTIONARY_HPP

#include <string>
#include <vector>

#include "romkit/types.hpp"

namespace romkit {

// Closed enumeration of basis functions. Index arguments are 1-based
// state indices; unused slots are 0.
enum class BasisKind {
  Coordinate,       // x_i
  Log1pSquare,      // ln(1 + x_i^2)
  Rational,         // x_i / (1 + x_j^2)
  SineProduct,      // sin(x_i * x_j)
  CosineProduct,    // cos(x_i * x_j)
  Sine,             // sin(x_i)
  Cosine,           // cos(x_i)
  ArctanWeighted,   // x_i * atan(x_i)
  Product,          // x_i * x_j
  PendulumCoupling, // sin(x_1 - x_3) * x_i^2
};

struct BasisFunction {
  BasisKind kind;
  int i = 0;
  int j = 0;

  double eval(const VectorXd& x) const;
  int arity() const;  // number of index arguments used
};

const char* basis_kind_name(BasisKind k);
BasisKind basis_kind_from_name(const std::string& name);

// Ordered basis list; the first n entries are always the state
// coordinates, the remaining d-n entries are nonlinear.
class DictionarySpec {
 public:
  DictionarySpec() = default;
  DictionarySpec(int state_dim, std::vector<BasisFunction> entries);

  // Convenience: coordinates only (d == n).
  static DictionarySpec coordinates(int state_dim);

  int state_dim() const { return state_dim_; }
  int size() const { return static_cast<int>(entries_.size()); }
  const std::vector<BasisFunction>& entries() const { return entries_; }

  VectorXd evaluate(const VectorXd& state) const;
  MatrixXd build_data_matrix(const MatrixXd& states) const;

  // Content fingerprint for metadata files.
  std::string hash() const;

 private:
  void validate() const;

  int state_dim_ = 0;
  std::vector<BasisFunction> entries_;
};

}  // namespace romkit

#endif  // ROMKIT_DICTIONARY_HPP
