#ifndef ROMKIT_NUMERIC_HPP
#define ROMKIT_NUMERIC_HPP

#include <cstdint>
#include <random>
#include <string>

#include "romkit/types.hpp"

namespace romkit {

// Round-trip-exact decimal text for doubles (17 significant digits).
std::string format_double(double v);

// FNV-1a over bytes; used to fingerprint configs and data files.
class Fnv1a {
 public:
  void update(const void* data, size_t len);
  void update(const std::string& s) { update(s.data(), s.size()); }
  std::string hex() const;
  uint64_t value() const { return h_; }

 private:
  uint64_t h_ = 1469598103934665603ull;
};

std::string fnv1a_hex(const std::string& s);

// Deterministic RNG. mt19937_64 is pinned by the standard; the uniform
// mappings below avoid the implementation-defined std distributions so
// streams are reproducible across toolchains.
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  double uniform01() {  // in [0, 1)
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  VectorXd uniform_vector(const VectorXd& lo, const VectorXd& hi);
  // Standard normal via Box-Muller on the deterministic uniform stream.
  double normal();
  VectorXd normal_vector(int n);
  uint64_t raw() { return eng_(); }

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Symmetric positive (semi)definite helpers.
MatrixXd spd_sqrt(const MatrixXd& m);              // principal square root
double min_eigenvalue(const MatrixXd& sym);        // of 0.5*(M+M^T)
double max_eigenvalue(const MatrixXd& sym);
MatrixXd symmetrize(const MatrixXd& m);

// Spectral norm (largest singular value).
double spectral_norm(const MatrixXd& m);

}  // namespace romkit

#endif  // ROMKIT_NUMERIC_HPP
