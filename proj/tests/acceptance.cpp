// Acceptance suite: one line per criterion, nonzero exit on any failure.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "romkit/config.hpp"
#include "romkit/mor_ct.hpp"
#include "romkit/mor_dt.hpp"
#include "romkit/pipeline.hpp"
#include "romkit/synthesis.hpp"
#include "romkit/numeric.hpp"

using namespace romkit;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& what,
            const std::string& detail = "") {
  std::printf("[criterion %d] %s  %s%s%s\n", criterion,
              pass ? "PASS" : "FAIL", what.c_str(),
              detail.empty() ? "" : " -- ", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

struct BenchmarkRun {
  PipelineConfig cfg;
  PlantModel plant;
  TrajectoryBatch excited, zero;
  Reduction red;
  double solve_seconds = 0;
};

BenchmarkRun run_benchmark(BenchmarkId id) {
  BenchmarkRun out{demo_config(id), PlantModel::builtin(id), {}, {}, {}};
  out.excited = collect(out.plant, out.cfg.dictionary, out.cfg.experiment);
  ExperimentConfig zc = out.cfg.experiment;
  zc.input_law = InputLaw::Zero;
  zc.seed = out.cfg.seed_zero;
  zc.x0_lo = out.cfg.x0_zero_lo;
  zc.x0_hi = out.cfg.x0_zero_hi;
  zc.restart_every = out.cfg.restart_every_zero;
  out.zero = collect(out.plant, out.cfg.dictionary, zc);
  const auto t0 = std::chrono::steady_clock::now();
  out.red = out.plant.time_kind() == TimeKind::Continuous
                ? reduce_ct(out.excited, out.zero, out.cfg.dictionary,
                            out.cfg.reduction)
                : reduce_dt(out.excited, out.zero, out.cfg.dictionary,
                            out.cfg.reduction);
  out.solve_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return out;
}

SfVerifyOptions verify_options(const BenchmarkRun& run) {
  SfVerifyOptions opt;
  opt.samples = 10000;
  opt.seed = run.cfg.verification.seed;
  opt.x_box = run.cfg.verification.x_box;
  opt.xhat_box = run.cfg.verification.xhat_box;
  opt.uhat_box = run.cfg.verification.uhat_box;
  return opt;
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

double box_sup_norm(const Box& b) {
  double s = 0;
  for (int i = 0; i < b.dim(); ++i) {
    const double m = std::max(std::abs(b.lo(i)), std::abs(b.hi(i)));
    s += m * m;
  }
  return std::sqrt(s);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool dirs_equal(const std::string& a, const std::string& b,
                std::string*差 = nullptr) {
  namespace fs = std::filesystem;
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(a))
    names.push_back(e.path().filename().string());
  for (const std::string& name : names) {
    if (slurp(a + "/" + name) != slurp(b + "/" + name)) {
      if (差) *差 = name;
      return false;
    }
  }
  return true;
}

// ---- criterion 1: bound-formula reproduction ---------------------------

void criterion_1() {
  const double ct10 = bound_ct_reported(0, 1e9, 1.2048, 0.5, 0.0812, 6.0);
  const double pend = bound_ct_reported(0, 1e9, 0.8114, 1.0, 0.1118, 1.0);
  Reduction dt;
  dt.time_kind = TimeKind::Discrete;
  dt.rho = 0.00032;
  dt.kappa = 0.45;
  dt.alpha = 0.0056;
  const double pend_dt = relation_cert(dt, 0.99, 1.0).epsilon;
  dt.rho = 0.0022;
  dt.kappa = 0.5;
  dt.alpha = 0.3578;
  const double nu_inferred = 36.0;  // inferred, not stated alongside 0.66
  const double dt10 = relation_cert(dt, 0.99, nu_inferred).epsilon;

  char detail[256];
  std::snprintf(detail, sizeof detail,
                "ct10 %.4f (0.81+-0.005), pendulum_ct %.4f (0.14+-0.005), "
                "pendulum_dt %.4f (0.33+-0.01), dt10 %.4f (0.66+-0.02, "
                "nu=36 INFERRED)",
                ct10, pend, pend_dt, dt10);
  const bool pass = std::abs(ct10 - 0.81) <= 0.005 &&
                    std::abs(pend - 0.14) <= 0.005 &&
                    std::abs(pend_dt - 0.33) <= 0.01 &&
                    std::abs(dt10 - 0.66) <= 0.02;
  report(1, pass, "bound-formula reproduction", detail);
}

// ---- criterion 2: data-based closed-loop equivalence --------------------

void criterion_2() {
  const auto t0 = std::chrono::steady_clock::now();
  const int n = 3, m = 2;
  std::vector<BasisFunction> entries;
  for (int i = 1; i <= n; ++i) entries.push_back({BasisKind::Coordinate, i, 0});
  entries.push_back({BasisKind::Sine, 1, 0});
  entries.push_back({BasisKind::Product, 2, 3});
  entries.push_back({BasisKind::Log1pSquare, 2, 0});
  const DictionarySpec spec(n, entries);
  const int d = spec.size();

  Rng rng(2024);
  MatrixXd a(n, d), b(n, m);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < d; ++c) a(r, c) = rng.uniform(-1, 1);
    for (int c = 0; c < m; ++c) b(r, c) = rng.uniform(-1, 1);
  }
  a.leftCols(n) -= 2.0 * MatrixXd::Identity(n, n);  // keep orbits tame
  const PlantModel plant =
      PlantModel::linear_in_dictionary(TimeKind::Continuous, a, b, spec);

  auto assemble = [&](DerivativeMode mode, double tau) {
    ExperimentConfig cfg;
    cfg.T = 20;
    cfg.tau = tau;
    cfg.seed = 91;
    cfg.derivative_mode = mode;
    cfg.input_lo = VectorXd::Constant(m, -1);
    cfg.input_hi = VectorXd::Constant(m, 1);
    cfg.x0_lo = VectorXd::Constant(n, -1);
    cfg.x0_hi = VectorXd::Constant(n, 1);
    cfg.restart_every = 4;
    const TrajectoryBatch exc = collect(plant, spec, cfg);
    cfg.input_law = InputLaw::Zero;
    cfg.seed = 92;
    cfg.restart_every = 2;
    const TrajectoryBatch zero = collect(plant, spec, cfg);

    Reduction red;
    red.time_kind = TimeKind::Continuous;
    red.dictionary = spec;
    red.n = n;
    red.m = m;
    red.d = d;
    red.nhat = 2;
    red.mhat = 2;
    red.T = exc.T;
    const MatrixXd q = right_pinv(exc.D);
    red.Qbar = right_pinv(zero.D);
    red.Q = q;
    red.G = exc.U * q;
    red.XplusQ = exc.Xplus * q;
    red.Aest = zero.Xplus * red.Qbar;
    red.Bdata = (red.XplusQ - red.Aest) * right_pinv(red.G);
    Rng mats(7);
    red.R1 = MatrixXd::Zero(n, 2);
    red.R2 = MatrixXd::Zero(d - n, 2);
    red.Xi = MatrixXd::Zero(m, 2);
    red.Psi = MatrixXd::Zero(m, 2);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < 2; ++c) red.R1(r, c) = mats.uniform(-1, 1);
    for (int r = 0; r < d - n; ++r)
      for (int c = 0; c < 2; ++c) red.R2(r, c) = mats.uniform(-1, 1);
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < 2; ++c) {
        red.Xi(r, c) = mats.uniform(-1, 1);
        red.Psi(r, c) = mats.uniform(-1, 1);
      }
    red.Chat = red.R1;
    return red;
  };

  auto worst_error = [&](const Reduction& red) {
    Rng samples(55);
    double worst = 0;
    for (int k = 0; k < 1000; ++k) {
      const VectorXd x = samples.uniform_vector(VectorXd::Constant(n, -2),
                                                VectorXd::Constant(n, 2));
      const VectorXd xh = samples.uniform_vector(VectorXd::Constant(2, -2),
                                                 VectorXd::Constant(2, 2));
      const VectorXd uh = samples.uniform_vector(VectorXd::Constant(2, -1),
                                                 VectorXd::Constant(2, 1));
      const VectorXd truth = plant.rhs(x, interface_input(red, x, xh, uh));
      const VectorXd data = closed_loop_rhs_data(red, x, xh, uh);
      worst = std::max(worst, (truth - data).norm() / (1.0 + truth.norm()));
    }
    return worst;
  };

  const double exact = worst_error(assemble(DerivativeMode::Oracle, 1e-3));
  const double fwd =
      worst_error(assemble(DerivativeMode::ForwardDifference, 1e-3));
  const double sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  char detail[160];
  std::snprintf(detail, sizeof detail,
                "oracle rel err %.2e (<=1e-6), forward-difference %.2e "
                "(<=5e-2), %.1fs (<10s)",
                exact, fwd, sec);
  report(2, exact <= 1e-6 && fwd <= 5e-2 && sec < 10.0,
         "data-based closed-loop representation", detail);
}

// ---- criteria 3, 4, 6, 7 over the four cached reductions ----------------

void criteria_3_4_6_7(const std::map<BenchmarkId, BenchmarkRun>& runs) {
  bool c3 = true, c4 = true, c7 = true;
  std::string d3, d4, d7;
  for (const auto& [id, run] : runs) {
    const Reduction& red = run.red;
    double worst = 0;
    for (const auto& [name, value] : red.residuals)
      worst = std::max(worst, value);
    const bool ok = worst <= 1e-6 && red.lmi_margin >= -1e-7 &&
                    run.solve_seconds < 60.0 && red.T <= 60;
    if (!ok) c3 = false;
    d3 += std::string(benchmark_name(id)) + " res " + sci(worst) +
          " margin " + sci(red.lmi_margin) + " " +
          format_double(run.solve_seconds).substr(0, 4) + "s; ";

    SfVerifyOptions opt = verify_options(run);
    const bool ct = red.time_kind == TimeKind::Continuous;
    const SfVerification good =
        ct ? verify_sf_ct(red, opt) : verify_sf_dt(red, opt);
    Reduction corrupt = red;
    corrupt.rho = 0.01 * red.rho;
    const SfVerification bad =
        ct ? verify_sf_ct(corrupt, opt) : verify_sf_dt(corrupt, opt);
    const bool ok4 = good.pass && !bad.pass;
    if (!ok4) c4 = false;
    d4 += std::string(benchmark_name(id)) + " " +
          std::to_string(good.bound_violations + good.decrease_violations) +
          "/" + std::to_string(good.samples) + " viol, corrupted " +
          std::to_string(bad.decrease_violations) + "; ";

    // criterion 7: Eq-form Psi beats 100 random alternatives.
    const MatrixXd sp = spd_sqrt(red.P);
    const double base =
        spectral_norm(sp * (red.Bdata * red.Psi - red.R1 * red.Bhat));
    Rng rng(909);
    int better = 0;
    for (int k = 0; k < 100; ++k) {
      MatrixXd alt(red.m, red.mhat);
      for (int r = 0; r < red.m; ++r)
        for (int c = 0; c < red.mhat; ++c)
          alt(r, c) = red.Psi(r, c) + 0.2 * rng.normal();
      if (spectral_norm(sp * (red.Bdata * alt - red.R1 * red.Bhat)) <
          base - 1e-12)
        ++better;
    }
    if (better > 0) c7 = false;
    d7 += std::string(benchmark_name(id)) + " 0/" + std::to_string(100) +
          " better; ";
  }
  report(3, c3, "certificate residual suite", d3);
  report(4, c4, "pointwise verification with falsification control", d4);

  // criterion 6: one-step invariance of the relation sublevel set.
  const BenchmarkRun& dt10 = runs.at(BenchmarkId::Dt10);
  SfVerifyOptions opt = verify_options(dt10);
  const double nu = std::pow(box_sup_norm(opt.uhat_box), 2);
  const SimulationRelationCert cert =
      relation_cert(dt10.red, dt10.red.eta, nu);
  const RelationInvarianceReport inv =
      check_relation_invariance(dt10.red, cert, opt);
  SimulationRelationCert half = cert;
  half.rho_bar *= 0.5;
  half.epsilon = std::sqrt(half.rho_bar / dt10.red.alpha);
  const RelationInvarianceReport broken =
      check_relation_invariance(dt10.red, half, opt);
  char d6[160];
  std::snprintf(d6, sizeof d6,
                "dt10: %d/%d escapes, %d deviation violations; halved set "
                "escapes %d (must be > 0)",
                inv.escape_violations, inv.samples, inv.deviation_violations,
                broken.escape_violations);
  report(6, inv.pass && broken.escape_violations > 0,
         "relation invariance", d6);
  report(7, c7, "input-matching gain minimality", d7);
}

// ---- criterion 5: trajectory envelopes ----------------------------------

void criterion_5(const std::map<BenchmarkId, BenchmarkRun>& runs) {
  bool pass = true;
  std::string detail;

  {  // ct10: 20 s of closed loop under bounded reduced inputs.
    const BenchmarkRun& run = runs.at(BenchmarkId::Ct10);
    const Reduction& red = run.red;
    const double period = 0.5;
    const int steps = 40;  // 20 s
    const int substeps = std::max(
        10, static_cast<int>(std::ceil(
                period * spectral_norm(red.XplusQ.leftCols(red.n)) / 1.5)));
    Rng rng(606);
    double worst_gap = -1e9;
    for (int trial = 0; trial < 10; ++trial) {
      VectorXd xh0(2);
      xh0 << rng.uniform(0, 1), rng.uniform(0, 1);
      std::vector<VectorXd> uh;
      for (int k = 0; k < steps; ++k)
        uh.push_back(rng.uniform_vector(VectorXd::Constant(2, -6),
                                        VectorXd::Constant(2, 6)));
      const ClosedLoopCt out = simulate_closed_loop_ct(
          red, &run.plant, red.R1 * xh0, xh0,
          [&](int k, const VectorXd&) { return uh[k]; }, period, steps,
          substeps);
      for (int c = 0; c < out.deviation.size(); ++c) {
        const double env = bound_ct_envelope(0, out.time(c), red.alpha,
                                             red.kappa, red.rho, out.uhat_sup);
        worst_gap = std::max(worst_gap, out.deviation(c) - env);
        if (out.deviation(c) > env + 1e-3) pass = false;
      }
    }
    detail += "ct10 worst dev-env gap " + sci(worst_gap) + " (<=1e-3); ";
  }

  {  // dt10: 20 starts inside the relation, per-step deviation <= epsilon.
    const BenchmarkRun& run = runs.at(BenchmarkId::Dt10);
    const Reduction& red = run.red;
    const double nu = 72.0;  // sup |uhat|^2 over [-6,6]^2
    const SimulationRelationCert cert = relation_cert(red, red.eta, nu);
    const MatrixXd p_sqrt_inv = spd_sqrt(red.P).llt().solve(
        MatrixXd::Identity(red.n, red.n));
    Rng rng(707);
    double worst = 0;
    for (int trial = 0; trial < 20; ++trial) {
      VectorXd xh(2);
      xh << rng.uniform(-9, -8), rng.uniform(9, 10);
      VectorXd dir = rng.normal_vector(red.n);
      if (dir.norm() > 0) dir /= dir.norm();
      const double radius = std::sqrt(cert.rho_bar * rng.uniform01());
      VectorXd x = red.R1 * xh + p_sqrt_inv * (radius * dir);
      for (int k = 0; k < 100; ++k) {
        VectorXd uh = rng.uniform_vector(VectorXd::Constant(2, -6),
                                         VectorXd::Constant(2, 6));
        worst = std::max(worst, red.output_error(x, xh).norm());
        if (red.output_error(x, xh).norm() > cert.epsilon + 1e-9) pass = false;
        x = run.plant.rhs(x, interface_input(red, x, xh, uh));
        xh = red.Ahat * xh + red.Bhat * uh;
      }
    }
    detail += "dt10 worst dev " + sci(worst) + " <= eps " +
              sci(cert.epsilon);
  }
  report(5, pass, "trajectory envelopes", detail);
}

// ---- criteria 8, 9: demos and determinism --------------------------------

void criteria_8_9() {
  namespace fs = std::filesystem;
  const std::string base = "acceptance_out";
  fs::remove_all(base);
  fs::create_directories(base);

  bool c8 = true;
  std::string d8;
  for (BenchmarkId id : {BenchmarkId::Ct10, BenchmarkId::Dt10}) {
    PipelineConfig cfg = demo_config(id);
    cfg.out_dir = base + "/demo_" + benchmark_name(id);
    const auto t0 = std::chrono::steady_clock::now();
    Pipeline pipe(cfg);
    pipe.collect();
    pipe.reduce();
    pipe.verify();
    pipe.bound();
    const auto summary = pipe.synthesize_stage();
    const double sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    const bool ok = summary.initial_covered &&
                    summary.runs_safe == summary.runs &&
                    summary.runs_reached == summary.runs && sec < 600.0;
    if (!ok) c8 = false;
    d8 += std::string(benchmark_name(id)) + " covered=" +
          (summary.initial_covered ? "y" : "n") + " safe " +
          std::to_string(summary.runs_safe) + "/" +
          std::to_string(summary.runs) + " reached " +
          std::to_string(summary.runs_reached) + "/" +
          std::to_string(summary.runs) + " in " +
          format_double(sec).substr(0, 4) + "s; ";
  }
  report(8, c8, "reach-while-avoid demos", d8);

  bool c9 = true;
  std::string d9;
  for (BenchmarkId id : {BenchmarkId::Ct10, BenchmarkId::Dt10,
                         BenchmarkId::PendulumCt, BenchmarkId::PendulumDt}) {
    std::string diff;
    PipelineConfig cfg = demo_config(id);
    cfg.out_dir = base + "/rep1_" + benchmark_name(id);
    Pipeline(cfg).demo();
    cfg.out_dir = base + "/rep2_" + benchmark_name(id);
    Pipeline(cfg).demo();
    // out_dir differs inside config.json, so compare all other files.
    namespace fs = std::filesystem;
    const std::string d1 = base + "/rep1_" + benchmark_name(id);
    const std::string d2 = base + "/rep2_" + benchmark_name(id);
    for (const auto& e : fs::directory_iterator(d1)) {
      const std::string name = e.path().filename().string();
      if (name == "config.json") continue;  // embeds out_dir by design
      if (slurp(d1 + "/" + name) != slurp(d2 + "/" + name)) {
        c9 = false;
        diff = name;
        break;
      }
    }
    d9 += std::string(benchmark_name(id)) +
          (diff.empty() ? " identical; " : (" differs in " + diff + "; "));
  }
  report(9, c9, "determinism of repeated demos", d9);
}

}  // namespace

int main() {
  std::printf("romkit acceptance suite (%s)\n", kToolVersion);
  criterion_1();
  criterion_2();

  std::map<BenchmarkId, BenchmarkRun> runs;
  for (BenchmarkId id : {BenchmarkId::Ct10, BenchmarkId::Dt10,
                         BenchmarkId::PendulumCt, BenchmarkId::PendulumDt})
    runs.emplace(id, run_benchmark(id));

  criteria_3_4_6_7(runs);
  criterion_5(runs);
  criteria_8_9();

  std::printf("%s (%d failing criteria)\n",
              g_failures == 0 ? "ALL CRITERIA PASS" : "FAILURES PRESENT",
              g_failures);
  return g_failures == 0 ? 0 : 1;
}
