#ifndef ROMKIT_CONFIG_HPP
#define ROMKIT_CONFIG_HPP

#include <optional>
#include <string>

#include "romkit/experiment.hpp"
#include "romkit/plant.hpp"
#include "romkit/reduction.hpp"
#include "romkit/synthesis.hpp"

namespace romkit {

struct VerificationConfig {
  int samples = 10000;
  uint64_t seed = 1;
  Box x_box, xhat_box, uhat_box;
  bool use_true_plant = false;  // default checks the data-based form
  double tol = 1e-6;
};

struct SynthesisConfig {
  ReachAvoidProblem problem;
  int runs = 10;        // refined trajectories from random starts
  int max_steps = 200;  // per run
  int substeps = 10;    // RK4 substeps per control period (ct)
  uint64_t seed = 1;
  bool enabled = false;
};

// One config file drives a full pipeline run. CLI flags override
// individual fields before the stages execute.
struct PipelineConfig {
  std::optional<BenchmarkId> benchmark;
  // Custom plants: matrices over the dictionary (used when benchmark is
  // not set).
  std::optional<TimeKind> plant_time_kind;
  MatrixXd plant_a, plant_b;

  DictionarySpec dictionary;
  ExperimentConfig experiment;        // excited run; seed_zero for the other
  uint64_t seed_zero = 0;
  VectorXd x0_zero_lo, x0_zero_hi;    // zero-input initial box
  int restart_every_zero = 0;         // segment length of the zero batch
  ReductionConfig reduction;
  VerificationConfig verification;
  SynthesisConfig synthesis;
  std::string out_dir = "out";

  PlantModel make_plant() const;
  std::string hash() const;  // over the canonical serialized form
};

PipelineConfig load_config(const std::string& path);
void save_config(const PipelineConfig& config, const std::string& path);
std::string serialize_config(const PipelineConfig& config);

// Paper-benchmark defaults: hyperparameters, the shipped dictionary and
// a reach-while-avoid scenario for the 10-state systems.
PipelineConfig demo_config(BenchmarkId id);

// Dotted-path override, e.g. set_config_value(&c, "experiment.seed", "7").
void set_config_value(PipelineConfig* config, const std::string& key,
                      const std::string& value);

inline constexpr const char* kToolVersion = "romkit 0.1.0";

}  // namespace romkit

#endif  // ROMKIT_CONFIG_HPP
