#ifndef ROMKIT_PIPELINE_HPP
#define ROMKIT_PIPELINE_HPP

#include <string>

#include "romkit/config.hpp"
#include "romkit/mor_ct.hpp"
#include "romkit/mor_dt.hpp"
#include "romkit/synthesis.hpp"

namespace romkit {

// Stage orchestration over a fixed artifact layout inside out_dir:
//   config.json            resolved configuration (canonical form)
//   excited.csv(.meta)     first experiment
//   zero.csv(.meta)        zero-input experiment
//   reduction.txt          certificate archive
//   lmi_problem.txt        optional raw-program dump
//   *_report.txt           per-stage plain-text reports
//   controller.csv         synthesized table
//   run_<k>_*.csv          refined trajectories and deviations
// Later stages read the files earlier stages wrote; nothing is
// recomputed across stage boundaries.
class Pipeline {
 public:
  explicit Pipeline(PipelineConfig config);

  const PipelineConfig& config() const { return cfg_; }
  std::string path(const std::string& name) const;

  void collect(bool dump_lmi = false);
  Reduction reduce(bool dump_lmi = false);

  struct VerifySummary {
    bool residuals_ok = false;
    bool margin_ok = false;
    SfVerification sf;
    RelationInvarianceReport invariance;  // dt only
    SimulationRelationCert cert;          // dt only
    bool pass = false;
  };
  VerifySummary verify();

  struct BoundSummary {
    double uhat_inf = 0.0;     // vector-norm sup over the input box
    double reported_form = 0.0;  // ct reported-arithmetic value (t -> inf)
    double envelope_inf = 0.0; // ct provable envelope limit
    double epsilon = 0.0;      // dt relation bound
    double nu = 0.0;           // dt input-energy constant
  };
  BoundSummary bound();

  struct SynthSummary {
    bool initial_covered = false;
    int winning_cells = 0;
    int sweeps = 0;
    double epsilon = 0.0;
    int runs = 0;
    int runs_reached = 0;
    int runs_safe = 0;
    int runs_within_bound = 0;
    bool pass = false;
  };
  SynthSummary synthesize_stage();

  // collect -> reduce -> verify -> bound -> (synthesize when enabled),
  // then a combined report. Returns false when a certificate-style check
  // failed (the demo still writes everything it produced).
  bool demo(bool dump_lmi = false);

 private:
  PipelineConfig cfg_;
};

// Convenience wrapper used by the CLI and the C API.
bool run_demo(BenchmarkId id, const std::string& out_dir, uint64_t seed_offset,
              std::string* error);

}  // namespace romkit

#endif  // ROMKIT_PIPELINE_HPP
