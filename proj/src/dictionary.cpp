#include "romkit/dictionary.hpp"

#include <cmath>

#include "romkit/numeric.hpp"
#include "numeric_impl.hpp"

namespace romkit {

double BasisFunction::eval(const VectorXd& x) const {
  const auto xi = [&](int k) { return x(k - 1); };
  switch (kind) {
    case BasisKind::Coordinate:
      return xi(i);
    case BasisKind::Log1pSquare:
      return std::log1p(xi(i) * xi(i));
    case BasisKind::Rational:
      return xi(i) / (1.0 + xi(j) * xi(j));
    case BasisKind::SineProduct:
      return std::sin(xi(i) * xi(j));
    case BasisKind::CosineProduct:
      return std::cos(xi(i) * xi(j));
    case BasisKind::Sine:
      return std::sin(xi(i));
    case BasisKind::Cosine:
      return std::cos(xi(i));
    case BasisKind::ArctanWeighted:
      return xi(i) * std::atan(xi(i));
    case BasisKind::Product:
      return xi(i) * xi(j);
    case BasisKind::PendulumCoupling:
      return std::sin(x(0) - x(2)) * xi(i) * xi(i);
  }
  throw Error(ErrorCode::Internal, "unknown basis kind");
}

int BasisFunction::arity() const {
  switch (kind) {
    case BasisKind::Rational:
    case BasisKind::SineProduct:
    case BasisKind::CosineProduct:
    case BasisKind::Product:
      return 2;
    default:
      return 1;
  }
}

const char* basis_kind_name(BasisKind k) {
  switch (k) {
    case BasisKind::Coordinate: return "coordinate";
    case BasisKind::Log1pSquare: return "log1p_square";
    case BasisKind::Rational: return "rational";
    case BasisKind::SineProduct: return "sine_product";
    case BasisKind::CosineProduct: return "cosine_product";
    case BasisKind::Sine: return "sine";
    case BasisKind::Cosine: return "cosine";
    case BasisKind::ArctanWeighted: return "arctan_weighted";
    case BasisKind::Product: return "product";
    case BasisKind::PendulumCoupling: return "pendulum_coupling";
  }
  return "?";
}

BasisKind basis_kind_from_name(const std::string& name) {
  for (BasisKind k :
       {BasisKind::Coordinate, BasisKind::Log1pSquare, BasisKind::Rational,
        BasisKind::SineProduct, BasisKind::CosineProduct, BasisKind::Sine,
        BasisKind::Cosine, BasisKind::ArctanWeighted, BasisKind::Product,
        BasisKind::PendulumCoupling}) {
    if (name == basis_kind_name(k)) return k;
  }
  throw Error(ErrorCode::InvalidInput, "unknown basis kind '" + name + "'");
}

DictionarySpec::DictionarySpec(int state_dim, std::vector<BasisFunction> entries)
    : state_dim_(state_dim), entries_(std::move(entries)) {
  validate();
}

DictionarySpec DictionarySpec::coordinates(int state_dim) {
  std::vector<BasisFunction> entries;
  entries.reserve(state_dim);
  for (int i = 1; i <= state_dim; ++i)
    entries.push_back({BasisKind::Coordinate, i, 0});
  return DictionarySpec(state_dim, std::move(entries));
}

void DictionarySpec::validate() const {
  const int n = state_dim_;
  const int d = size();
  require(n >= 1, ErrorCode::InvalidInput, "state dimension must be positive");
  require(d >= n, ErrorCode::InvalidInput,
          "dictionary must have at least one entry per state coordinate");
  for (int k = 0; k < d; ++k) {
    const BasisFunction& b = entries_[k];
    require(b.i >= 1 && b.i <= n, ErrorCode::InvalidInput,
            "basis index out of range");
    if (b.arity() == 2)
      require(b.j >= 1 && b.j <= n, ErrorCode::InvalidInput,
              "basis index out of range");
    if (b.kind == BasisKind::PendulumCoupling)
      require(n >= 3, ErrorCode::InvalidInput,
              "pendulum_coupling needs at least 3 states");
    if (k < n) {
      require(b.kind == BasisKind::Coordinate && b.i == k + 1,
              ErrorCode::InvalidInput,
              "entries 1..n must be coordinate(1)..coordinate(n) in order");
    } else {
      require(b.kind != BasisKind::Coordinate, ErrorCode::InvalidInput,
              "coordinate entries are not allowed in the nonlinear block");
    }
  }
}

VectorXd DictionarySpec::evaluate(const VectorXd& state) const {
  require(state.size() == state_dim_, ErrorCode::InvalidInput,
          "state length does not match dictionary state dimension");
  require(state.allFinite(), ErrorCode::InvalidInput, "state is not finite");
  VectorXd out(size());
  out.head(state_dim_) = state;  // coordinate prefix, copied verbatim
  for (int k = state_dim_; k < size(); ++k) out(k) = entries_[k].eval(state);
  return out;
}

MatrixXd DictionarySpec::build_data_matrix(const MatrixXd& states) const {
  require(states.rows() == state_dim_, ErrorCode::InvalidInput,
          "state matrix row count does not match dictionary");
  require(states.cols() >= 1, ErrorCode::InvalidInput,
          "state matrix needs at least one column");
  MatrixXd out(size(), states.cols());
  for (int k = 0; k < states.cols(); ++k) out.col(k) = evaluate(states.col(k));
  return out;
}

std::string DictionarySpec::hash() const {
  Fnv1a h;
  h.update("dict");
  int n = state_dim_;
  h.update(&n, sizeof n);
  for (const BasisFunction& b : entries_) {
    h.update(std::string(basis_kind_name(b.kind)));
    h.update(&b.i, sizeof b.i);
    h.update(&b.j, sizeof b.j);
  }
  return h.hex();
}

}  // namespace romkit
