#include "romkit/pipeline.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "romkit/lmi.hpp"
#include "romkit/numeric.hpp"

#include <Eigen/Cholesky>
#include "numeric_impl.hpp"

namespace romkit {
namespace {

double box_norm_sup(const Box& b) {
  // sup of |u| over the box: the corner with the largest per-axis
  // magnitude.
  double s = 0.0;
  for (int i = 0; i < b.dim(); ++i) {
    const double m = std::max(std::abs(b.lo(i)), std::abs(b.hi(i)));
    s += m * m;
  }
  return std::sqrt(s);
}

void write_deviation_csv(const std::string& path, const VectorXd& time,
                         const VectorXd& deviation) {
  std::ofstream out(path);
  require(out.good(), ErrorCode::Io, "cannot write " + path);
  out << "t,deviation\n";
  for (int k = 0; k < time.size(); ++k)
    out << format_double(time(k)) << "," << format_double(deviation(k))
        << "\n";
}

void write_traj_csv(const std::string& path, const VectorXd& time,
                    const MatrixXd& states, const char* prefix) {
  std::ofstream out(path);
  require(out.good(), ErrorCode::Io, "cannot write " + path);
  out << "t";
  for (int i = 1; i <= states.rows(); ++i) out << "," << prefix << i;
  out << "\n";
  for (int k = 0; k < states.cols(); ++k) {
    out << format_double(time(k));
    for (int i = 0; i < states.rows(); ++i)
      out << "," << format_double(states(i, k));
    out << "\n";
  }
}

}  // namespace

Pipeline::Pipeline(PipelineConfig config) : cfg_(std::move(config)) {
  std::filesystem::create_directories(cfg_.out_dir);
}

std::string Pipeline::path(const std::string& name) const {
  return (std::filesystem::path(cfg_.out_dir) / name).string();
}

void Pipeline::collect(bool) {
  save_config(cfg_, path("config.json"));
  const PlantModel plant = cfg_.make_plant();

  ExperimentConfig exc = cfg_.experiment;
  TrajectoryBatch excited = romkit::collect(plant, cfg_.dictionary, exc);

  ExperimentConfig zc = cfg_.experiment;
  zc.input_law = InputLaw::Zero;
  zc.seed = cfg_.seed_zero;
  zc.x0_lo = cfg_.x0_zero_lo;
  zc.x0_hi = cfg_.x0_zero_hi;
  zc.restart_every = cfg_.restart_every_zero;
  TrajectoryBatch zero = romkit::collect(plant, cfg_.dictionary, zc);

  export_batch_csv(excited, path("excited.csv"));
  export_batch_csv(zero, path("zero.csv"));

  const RankReport re = rank_report(excited.D);
  const RankReport rz = rank_report(zero.D);
  std::ofstream rep(path("collect_report.txt"));
  require(rep.good(), ErrorCode::Io, "cannot write collect report");
  rep << "stage: collect\n";
  rep << "tool_version: " << kToolVersion << "\n";
  rep << "config_hash: " << cfg_.hash() << "\n";
  rep << "T: " << cfg_.experiment.T << "\n";
  rep << "dict_dim: " << cfg_.dictionary.size() << "\n";
  if (cfg_.experiment.T < cfg_.dictionary.size() + 1)
    rep << "warning: T < d+1; at least d+1 samples are required for full "
           "row rank\n";
  rep << "excited_full_row_rank: " << (re.full_row_rank ? "yes" : "no")
      << "\n";
  rep << "excited_rank: " << re.rank << "\n";
  rep << "excited_condition: " << format_double(re.condition) << "\n";
  rep << "zero_full_row_rank: " << (rz.full_row_rank ? "yes" : "no") << "\n";
  rep << "zero_rank: " << rz.rank << "\n";
  rep << "zero_condition: " << format_double(rz.condition) << "\n";
  rep << "excited_data_hash: " << excited.data_hash() << "\n";
  rep << "zero_data_hash: " << zero.data_hash() << "\n";
  rep << "derivatives: "
      << (excited.derivative_mode == DerivativeMode::Oracle
              ? "oracle"
              : "forward_difference")
      << "\n";
}

Reduction Pipeline::reduce(bool dump_lmi) {
  const PlantModel plant = cfg_.make_plant();
  TrajectoryBatch excited =
      import_batch_csv(path("excited.csv"), cfg_.dictionary, &plant);
  TrajectoryBatch zero =
      import_batch_csv(path("zero.csv"), cfg_.dictionary, &plant);

  if (dump_lmi) {
    const auto problem =
        plant.time_kind() == TimeKind::Continuous
            ? lmi::assemble_ct(excited, cfg_.reduction.kappa_hat,
                               cfg_.reduction.ct_gain_cap)
            : lmi::assemble_dt(excited, cfg_.reduction.kappa,
                               cfg_.reduction.mu);
    lmi::dump_problem(problem, path("lmi_problem.txt"));
  }

  Reduction red = plant.time_kind() == TimeKind::Continuous
                      ? reduce_ct(excited, zero, cfg_.dictionary, cfg_.reduction)
                      : reduce_dt(excited, zero, cfg_.dictionary,
                                  cfg_.reduction);
  red.config_hash = cfg_.hash();
  if (plant.time_kind() == TimeKind::Discrete) {
    red.nu = box_norm_sup(cfg_.verification.uhat_box);
    red.nu *= red.nu;
  }
  save_reduction(red, path("reduction.txt"));

  std::ofstream rep(path("reduce_report.txt"));
  require(rep.good(), ErrorCode::Io, "cannot write reduce report");
  rep << "stage: reduce\n";
  rep << "tool_version: " << kToolVersion << "\n";
  rep << "config_hash: " << red.config_hash << "\n";
  rep << "data_hash_excited: " << red.data_hash_excited << "\n";
  rep << "data_hash_zero: " << red.data_hash_zero << "\n";
  rep << "time_kind: " << time_kind_name(red.time_kind) << "\n";
  rep << "nhat: " << red.nhat << "\n";
  if (red.time_kind == TimeKind::Continuous) {
    rep << "kappa_hat: " << format_double(red.kappa_hat) << "\n";
  } else {
    rep << "eta: " << format_double(red.eta) << "\n";
  }
  rep << "mu: " << format_double(red.mu) << "\n";
  rep << "gamma: " << format_double(red.gamma) << "\n";
  rep << "alpha: " << format_double(red.alpha) << "\n";
  rep << "kappa: " << format_double(red.kappa) << "\n";
  rep << "rho: " << format_double(red.rho) << "\n";
  rep << "lmi_margin: " << format_double(red.lmi_margin) << "\n";
  rep << "equality_tolerance: 1e-06\n";
  rep << "lmi_margin_tolerance: -1e-07\n";
  for (const auto& [name, value] : red.residuals)
    rep << "residual_" << name << ": " << format_double(value) << "\n";
  for (const std::string& note : red.notes) rep << "note: " << note << "\n";
  return red;
}

Pipeline::VerifySummary Pipeline::verify() {
  const PlantModel plant = cfg_.make_plant();
  Reduction red = load_reduction(path("reduction.txt"));
  TrajectoryBatch excited =
      import_batch_csv(path("excited.csv"), cfg_.dictionary, &plant);
  TrajectoryBatch zero =
      import_batch_csv(path("zero.csv"), cfg_.dictionary, &plant);

  VerifySummary sum;

  // Recompute every condition family from the archive and the data, so
  // a tampered archive cannot pass on its stored diagnostics.
  const auto problem =
      red.time_kind == TimeKind::Continuous
          ? lmi::assemble_ct(excited, red.kappa_hat)
          : lmi::assemble_dt(excited, red.kappa, red.mu);
  MatrixXd phi = red.P.llt().solve(MatrixXd::Identity(red.n, red.n));
  auto residuals =
      lmi::equality_residuals(problem, red.Q.rightCols(red.d - red.n), red.H,
                              symmetrize(phi));
  residuals["rom_embedding"] =
      (red.Aest.leftCols(red.n) * red.R1 +
       red.Aest.rightCols(red.d - red.n) * red.R2 -
       (red.R1 * red.Ahat - red.Bdata * red.Xi))
          .cwiseAbs()
          .maxCoeff();
  residuals["data_right_inverse"] =
      (excited.D * red.Q - MatrixXd::Identity(red.d, red.d))
          .cwiseAbs()
          .maxCoeff();
  residuals["zero_data_right_inverse"] =
      (zero.D * red.Qbar - MatrixXd::Identity(red.d, red.d))
          .cwiseAbs()
          .maxCoeff();
  sum.residuals_ok = true;
  for (const auto& [name, value] : residuals)
    if (value > 1e-6) sum.residuals_ok = false;

  const double margin =
      lmi::block_margin(problem, red.H, symmetrize(phi));
  const double block_scale = 1.0 + red.P.cwiseAbs().maxCoeff();
  sum.margin_ok = margin >= -1e-7 * block_scale;

  SfVerifyOptions opt;
  opt.samples = cfg_.verification.samples;
  opt.seed = cfg_.verification.seed;
  opt.x_box = cfg_.verification.x_box;
  opt.xhat_box = cfg_.verification.xhat_box;
  opt.uhat_box = cfg_.verification.uhat_box;
  opt.tol = cfg_.verification.tol;
  opt.source = cfg_.verification.use_true_plant
                   ? SfVerifyOptions::Source::TruePlant
                   : SfVerifyOptions::Source::DataForm;
  opt.plant = &plant;

  if (red.time_kind == TimeKind::Continuous) {
    sum.sf = verify_sf_ct(red, opt);
  } else {
    sum.sf = verify_sf_dt(red, opt);
    const double nu = red.nu > 0 ? red.nu
                                 : std::pow(box_norm_sup(opt.uhat_box), 2);
    sum.cert = relation_cert(red, red.eta, nu);
    sum.invariance = check_relation_invariance(red, sum.cert, opt);
  }
  sum.pass = sum.residuals_ok && sum.margin_ok && sum.sf.pass &&
             (red.time_kind == TimeKind::Continuous || sum.invariance.pass);

  std::ofstream rep(path("verify_report.txt"));
  require(rep.good(), ErrorCode::Io, "cannot write verify report");
  rep << "stage: verify\n";
  rep << "tool_version: " << kToolVersion << "\n";
  rep << "config_hash: " << cfg_.hash() << "\n";
  rep << "archive_config_hash: " << red.config_hash << "\n";
  rep << "samples: " << opt.samples << "\n";
  rep << "seed: " << opt.seed << "\n";
  rep << "source: " << (opt.source == SfVerifyOptions::Source::TruePlant
                            ? "true_plant"
                            : "data_form")
      << "\n";
  rep << "tolerance: " << format_double(opt.tol) << "\n";
  for (const auto& [name, value] : residuals)
    rep << "residual_" << name << ": " << format_double(value) << "\n";
  rep << "residuals_ok: " << (sum.residuals_ok ? "yes" : "no") << "\n";
  rep << "lmi_margin: " << format_double(margin) << "\n";
  rep << "margin_ok: " << (sum.margin_ok ? "yes" : "no") << "\n";
  rep << "bound_violations: " << sum.sf.bound_violations << "\n";
  rep << "decrease_violations: " << sum.sf.decrease_violations << "\n";
  rep << "max_bound_violation: " << format_double(sum.sf.max_bound_violation)
      << "\n";
  rep << "max_decrease_violation: "
      << format_double(sum.sf.max_decrease_violation) << "\n";
  if (red.time_kind == TimeKind::Discrete) {
    rep << "relation_rho_bar: " << format_double(sum.cert.rho_bar) << "\n";
    rep << "relation_epsilon: " << format_double(sum.cert.epsilon) << "\n";
    rep << "relation_nu: " << format_double(sum.cert.nu) << "\n";
    rep << "relation_nu_source: computed_from_input_box\n";
    rep << "invariance_escapes: " << sum.invariance.escape_violations << "\n";
    rep << "invariance_deviation_violations: "
        << sum.invariance.deviation_violations << "\n";
  }
  rep << "verdict: " << (sum.pass ? "pass" : "FAIL") << "\n";
  return sum;
}

Pipeline::BoundSummary Pipeline::bound() {
  Reduction red = load_reduction(path("reduction.txt"));
  BoundSummary sum;
  sum.uhat_inf = box_norm_sup(cfg_.verification.uhat_box);

  std::ofstream rep(path("bound_report.txt"));
  require(rep.good(), ErrorCode::Io, "cannot write bound report");
  rep << "stage: bound\n";
  rep << "tool_version: " << kToolVersion << "\n";
  rep << "config_hash: " << cfg_.hash() << "\n";
  rep << "alpha: " << format_double(red.alpha) << "\n";
  rep << "kappa: " << format_double(red.kappa) << "\n";
  rep << "rho: " << format_double(red.rho) << "\n";
  rep << "uhat_inf: " << format_double(sum.uhat_inf)
      << " (vector-norm sup over the input box)\n";
  if (red.time_kind == TimeKind::Continuous) {
    sum.reported_form =
        bound_ct_reported(0.0, 1e9, red.alpha, red.kappa, red.rho, sum.uhat_inf);
    sum.envelope_inf = bound_ct_envelope(0.0, 1e9, red.alpha, red.kappa,
                                         red.rho, sum.uhat_inf);
    rep << "bound_reported_arithmetic: " << format_double(sum.reported_form)
        << "\n";
    rep << "bound_envelope_limit: " << format_double(sum.envelope_inf) << "\n";
    rep << "note: both variants printed; the envelope form is the one "
           "guaranteed by the decrease condition\n";
  } else {
    sum.nu = red.nu > 0 ? red.nu : sum.uhat_inf * sum.uhat_inf;
    const auto cert = relation_cert(red, red.eta, sum.nu);
    sum.epsilon = cert.epsilon;
    rep << "eta: " << format_double(red.eta) << "\n";
    rep << "nu: " << format_double(sum.nu)
        << " (computed from the input box)\n";
    rep << "rho_bar: " << format_double(cert.rho_bar) << "\n";
    rep << "epsilon: " << format_double(cert.epsilon) << "\n";
  }
  return sum;
}

Pipeline::SynthSummary Pipeline::synthesize_stage() {
  require(cfg_.synthesis.enabled, ErrorCode::InvalidInput,
          "synthesis is not configured for this run");
  const PlantModel plant = cfg_.make_plant();
  Reduction red = load_reduction(path("reduction.txt"));
  const ReachAvoidProblem& prob = cfg_.synthesis.problem;

  SynthSummary sum;
  const double uhat_sup = box_norm_sup(prob.input_box);
  if (red.time_kind == TimeKind::Continuous) {
    sum.epsilon =
        bound_ct_envelope(0.0, 1e9, red.alpha, red.kappa, red.rho, uhat_sup);
  } else {
    sum.epsilon = relation_cert(red, red.eta, uhat_sup * uhat_sup).epsilon;
  }

  int substeps = cfg_.synthesis.substeps;
  if (red.time_kind == TimeKind::Continuous) {
    // Explicit integration needs steps below the closed-loop stiffness;
    // the data identities make the loop essentially linear with matrix
    // XplusQ1, so its spectral norm sets the step.
    const double gain = spectral_norm(red.XplusQ.leftCols(red.n));
    substeps = std::max(
        substeps, static_cast<int>(std::ceil(prob.sample_time * gain / 1.5)));
  }

  const RomAbstraction abs = abstract_rom(red, prob);
  ControllerTable ctrl = synthesize(abs, prob, sum.epsilon);
  save_controller(ctrl, path("controller.csv"));
  sum.initial_covered = ctrl.initial_covered;
  sum.winning_cells = ctrl.winning_count;
  sum.sweeps = ctrl.sweeps;

  Rng rng(cfg_.synthesis.seed);
  sum.runs = cfg_.synthesis.runs;
  for (int k = 0; k < cfg_.synthesis.runs; ++k) {
    const VectorXd xhat0 =
        rng.uniform_vector(prob.initial_box.lo, prob.initial_box.hi);
    RefineRun run = refine_and_run(red, ctrl, plant, prob, xhat0,
                                   cfg_.synthesis.max_steps, substeps);
    if (run.reached_target) ++sum.runs_reached;
    if (!run.hit_true_obstacle) ++sum.runs_safe;
    // Certified deviation bound evaluated at the input magnitude the run
    // actually used.
    double bound;
    if (red.time_kind == TimeKind::Continuous) {
      bound = bound_ct_envelope(0.0, 1e9, red.alpha, red.kappa, red.rho,
                                run.uhat_sup);
    } else {
      bound = relation_cert(red, red.eta, run.uhat_sup * run.uhat_sup).epsilon;
    }
    if (run.max_deviation <= bound + 1e-3) ++sum.runs_within_bound;
    const std::string tag = "run_" + std::to_string(k);
    write_traj_csv(path(tag + "_full.csv"), run.time, run.x, "x");
    write_traj_csv(path(tag + "_rom.csv"), run.time, run.xhat, "xhat");
    write_deviation_csv(path(tag + "_deviation.csv"), run.time, run.deviation);
  }
  sum.pass = sum.initial_covered && sum.runs_safe == sum.runs &&
             sum.runs_reached == sum.runs && sum.runs_within_bound == sum.runs;

  std::ofstream rep(path("synth_report.txt"));
  require(rep.good(), ErrorCode::Io, "cannot write synthesis report");
  rep << "stage: synthesize\n";
  rep << "tool_version: " << kToolVersion << "\n";
  rep << "config_hash: " << cfg_.hash() << "\n";
  rep << "epsilon_inflation: " << format_double(sum.epsilon) << "\n";
  rep << "grid: " << prob.state_cells[0] << "x" << prob.state_cells[1] << "\n";
  rep << "input_grid: " << prob.input_cells[0] << "x" << prob.input_cells[1]
      << "\n";
  rep << "cell_inflation: " << format_double(prob.cell_inflation) << "\n";
  rep << "winning_cells: " << sum.winning_cells << "\n";
  rep << "sweeps: " << sum.sweeps << "\n";
  rep << "initial_covered: " << (sum.initial_covered ? "yes" : "no") << "\n";
  rep << "runs: " << sum.runs << "\n";
  rep << "runs_reached_target: " << sum.runs_reached << "\n";
  rep << "runs_avoiding_true_obstacles: " << sum.runs_safe << "\n";
  rep << "runs_within_certified_bound: " << sum.runs_within_bound << "\n";
  rep << "verdict: " << (sum.pass ? "pass" : "FAIL") << "\n";
  return sum;
}

bool Pipeline::demo(bool dump_lmi) {
  collect();
  Reduction red = reduce(dump_lmi);
  VerifySummary v = verify();
  BoundSummary b = bound();
  bool pass = v.pass;
  SynthSummary s;
  if (cfg_.synthesis.enabled) {
    s = synthesize_stage();
    pass = pass && s.pass;
  }

  std::ofstream rep(path("demo_report.txt"));
  require(rep.good(), ErrorCode::Io, "cannot write demo report");
  rep << "stage: demo\n";
  rep << "tool_version: " << kToolVersion << "\n";
  rep << "config_hash: " << cfg_.hash() << "\n";
  rep << "benchmark: "
      << (cfg_.benchmark ? benchmark_name(*cfg_.benchmark) : "custom") << "\n";
  rep << "time_kind: " << time_kind_name(red.time_kind) << "\n";
  rep << "derivatives: "
      << (cfg_.experiment.derivative_mode == DerivativeMode::Oracle
              ? "oracle"
              : "forward_difference")
      << "\n";
  rep << "alpha: " << format_double(red.alpha) << "\n";
  rep << "kappa: " << format_double(red.kappa) << "\n";
  rep << "rho: " << format_double(red.rho) << "\n";
  rep << "verify: " << (v.pass ? "pass" : "FAIL") << "\n";
  if (red.time_kind == TimeKind::Continuous) {
    rep << "bound_reported_arithmetic: " << format_double(b.reported_form) << "\n";
    rep << "bound_envelope_limit: " << format_double(b.envelope_inf) << "\n";
  } else {
    rep << "epsilon: " << format_double(b.epsilon) << "\n";
    rep << "nu: " << format_double(b.nu) << " (computed from the input box)\n";
  }
  if (cfg_.synthesis.enabled) {
    rep << "synthesis_initial_covered: " << (s.initial_covered ? "yes" : "no")
        << "\n";
    rep << "synthesis_runs_safe: " << s.runs_safe << "/" << s.runs << "\n";
    rep << "synthesis_runs_reached: " << s.runs_reached << "/" << s.runs
        << "\n";
    rep << "synthesis: " << (s.pass ? "pass" : "FAIL") << "\n";
  }
  rep << "verdict: " << (pass ? "pass" : "FAIL") << "\n";
  return pass;
}

bool run_demo(BenchmarkId id, const std::string& out_dir, uint64_t seed_offset,
              std::string* error) {
  try {
    PipelineConfig cfg = demo_config(id);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    cfg.experiment.seed += seed_offset;
    cfg.seed_zero += seed_offset;
    Pipeline pipe(std::move(cfg));
    return pipe.demo();
  } catch (const std::exception& e) {
    if (error) *error = e.what();
    return false;
  }
}

}  // namespace romkit
