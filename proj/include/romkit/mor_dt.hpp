#ifndef ROMKIT_MOR_DT_HPP
#define ROMKIT_MOR_DT_HPP

#include "romkit/experiment.hpp"
#include "romkit/mor_ct.hpp"
#include "romkit/reduction.hpp"

namespace romkit {

// Discrete-time construction; the feasibility block is the 2n x 2n
// contraction condition and rho carries the (1 + 1/mu) factor.
Reduction reduce_dt(const TrajectoryBatch& excited,
                    const TrajectoryBatch& zero, const DictionarySpec& spec,
                    const ReductionConfig& config);

// One-step check of the two discrete conditions on sampled triples.
SfVerification verify_sf_dt(const Reduction& red,
                            const SfVerifyOptions& options);

// The set { S(x, xhat) <= rho_bar } is forward invariant under matched
// inputs and the output deviation on it never exceeds epsilon.
struct SimulationRelationCert {
  double rho_bar = 0.0;  // rho * nu / ((1 - kappa) * eta)
  double epsilon = 0.0;  // sqrt(rho_bar / alpha)
  double eta = 0.0;
  double nu = 0.0;
};

SimulationRelationCert relation_cert(const Reduction& red, double eta,
                                     double nu);

struct RelationInvarianceReport {
  int samples = 0;
  int escape_violations = 0;    // successor left S <= rho_bar
  int deviation_violations = 0; // |x - Chat xhat| > epsilon inside the set
  double max_escape = 0.0;
  double max_deviation_gap = 0.0;
  bool pass = false;
};

// Samples pairs inside the relation with |uhat|^2 <= nu and checks
// invariance of the sublevel set plus the deviation bound.
RelationInvarianceReport check_relation_invariance(
    const Reduction& red, const SimulationRelationCert& cert,
    const SfVerifyOptions& options);

}  // namespace romkit

#endif  // ROMKIT_MOR_DT_HPP
