// Command-line front end; everything goes through the shared C API.
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "romkit.h"

namespace {

// Exit codes: 0 success, 2 infeasible / failed certificate,
// 3 input or rank error, 4 internal.
int exit_code(romkit_status status) {
  switch (status) {
    case ROMKIT_OK: return 0;
    case ROMKIT_ERR_INFEASIBLE: return 2;
    case ROMKIT_ERR_INVALID:
    case ROMKIT_ERR_RANK:
    case ROMKIT_ERR_IO: return 3;
    default: return 4;
  }
}

int fail(romkit_status status) {
  std::fprintf(stderr, "error: %s\n", romkit_last_error());
  return exit_code(status);
}

struct ConfigArgs {
  std::string config_path;
  std::string benchmark;
  std::string out_dir;
  long long seed = -1;
  bool oracle_derivatives = false;
  std::vector<std::string> overrides;  // key=value
};

void add_config_options(CLI::App* cmd, ConfigArgs* args) {
  cmd->add_option("--config", args->config_path, "pipeline config file (JSON)");
  cmd->add_option("--benchmark", args->benchmark,
                  "built-in benchmark: ct10, dt10, pendulum_ct, pendulum_dt");
  cmd->add_option("--out", args->out_dir, "artifact directory override");
  cmd->add_option("--seed", args->seed, "experiment seed override");
  cmd->add_flag("--oracle-derivatives", args->oracle_derivatives,
                "use exact derivative samples instead of forward differences");
  cmd->add_option("--set", args->overrides,
                  "config override as key=value (repeatable)");
}

romkit_config_t* make_config(const ConfigArgs& args, romkit_status* status) {
  romkit_config_t* cfg = nullptr;
  if (!args.config_path.empty()) {
    cfg = romkit_config_load(args.config_path.c_str());
  } else if (!args.benchmark.empty()) {
    cfg = romkit_config_demo(args.benchmark.c_str());
  } else {
    std::fprintf(stderr, "error: pass --config FILE or --benchmark NAME\n");
    *status = ROMKIT_ERR_INVALID;
    return nullptr;
  }
  if (!cfg) {
    *status = ROMKIT_ERR_INVALID;
    return nullptr;
  }
  romkit_status rc = ROMKIT_OK;
  if (args.seed >= 0) {
    rc = romkit_config_set(cfg, "experiment.seed",
                           std::to_string(args.seed).c_str());
    if (rc == ROMKIT_OK)
      rc = romkit_config_set(
          cfg, "experiment.seed_zero",
          std::to_string(args.seed + 1000000).c_str());
  }
  if (rc == ROMKIT_OK && !args.out_dir.empty())
    rc = romkit_config_set(cfg, "out_dir", args.out_dir.c_str());
  if (rc == ROMKIT_OK && args.oracle_derivatives)
    rc = romkit_config_set(cfg, "experiment.oracle_derivatives", "true");
  for (const std::string& kv : args.overrides) {
    if (rc != ROMKIT_OK) break;
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "error: --set expects key=value, got '%s'\n",
                   kv.c_str());
      rc = ROMKIT_ERR_INVALID;
      break;
    }
    rc = romkit_config_set(cfg, kv.substr(0, eq).c_str(),
                           kv.substr(eq + 1).c_str());
  }
  if (rc != ROMKIT_OK) {
    romkit_config_destroy(cfg);
    *status = rc;
    return nullptr;
  }
  *status = ROMKIT_OK;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"romkit: data-driven reduced-order models with certificates"};
  app.require_subcommand(1);
  app.set_version_flag("--version", romkit_version());

  ConfigArgs args;
  bool dump_lmi = false;

  auto* demo = app.add_subcommand(
      "demo", "collect, reduce, verify, bound and (for the 10-state "
              "benchmarks) synthesize in one run");
  add_config_options(demo, &args);
  demo->add_flag("--dump-lmi", dump_lmi,
                 "also write the raw feasibility program as triplets");

  auto* collect = app.add_subcommand("collect", "run the two experiments");
  add_config_options(collect, &args);

  auto* reduce =
      app.add_subcommand("reduce", "build the certified reduced model");
  add_config_options(reduce, &args);
  reduce->add_flag("--dump-lmi", dump_lmi);

  auto* verify = app.add_subcommand(
      "verify", "re-check every condition of a stored reduction");
  add_config_options(verify, &args);

  auto* bound = app.add_subcommand(
      "bound", "evaluate the closeness bounds (from a run or from scalars)");
  add_config_options(bound, &args);
  double b_alpha = 0, b_rho = 0, b_kappa = 0, b_uhat = 0, b_s0 = 0,
         b_t = 1e9, b_eta = 0.99, b_nu = -1;
  bool nu_inferred = false;
  std::string b_kind;
  bound->add_option("--time-kind", b_kind, "ct or dt (scalar mode)");
  bound->add_option("--alpha", b_alpha);
  bound->add_option("--rho", b_rho);
  bound->add_option("--kappa", b_kappa);
  bound->add_option("--uhat-inf", b_uhat, "input magnitude (ct)");
  bound->add_option("--s0", b_s0, "initial similarity value (ct)");
  bound->add_option("--t", b_t, "time at which to evaluate (ct)");
  bound->add_option("--eta", b_eta, "relation split (dt)");
  bound->add_option("--nu", b_nu, "squared input bound (dt)");
  bound->add_flag("--nu-inferred", nu_inferred,
                  "mark nu as inferred rather than measured");

  auto* synth = app.add_subcommand(
      "synthesize", "grid synthesis on the reduced model plus refined runs");
  add_config_options(synth, &args);

  CLI11_PARSE(app, argc, argv);

  // Scalar bound arithmetic works without any config.
  if (bound->parsed() && !b_kind.empty()) {
    if (b_kind == "ct") {
      const double reported = romkit_bound_ct_reported(b_s0, b_t, b_alpha,
                                                       b_kappa, b_rho, b_uhat);
      const double envelope = romkit_bound_ct_envelope(b_s0, b_t, b_alpha,
                                                       b_kappa, b_rho, b_uhat);
      std::printf("bound_reported_arithmetic: %.6g\n", reported);
      std::printf("bound_envelope: %.6g\n", envelope);
    } else if (b_kind == "dt") {
      if (b_nu < 0) {
        std::fprintf(stderr, "error: dt bound needs --nu\n");
        return 3;
      }
      const double eps =
          romkit_relation_epsilon(b_rho, b_kappa, b_eta, b_alpha, b_nu);
      std::printf("nu: %.6g%s\n", b_nu,
                  nu_inferred ? " (inferred, not taken from a run)" : "");
      std::printf("epsilon: %.6g\n", eps);
    } else {
      std::fprintf(stderr, "error: --time-kind must be ct or dt\n");
      return 3;
    }
    return 0;
  }

  romkit_status status = ROMKIT_OK;
  romkit_config_t* cfg = make_config(args, &status);
  if (!cfg) {
    if (status != ROMKIT_ERR_INVALID || args.config_path.empty() == false ||
        !args.benchmark.empty())
      std::fprintf(stderr, "error: %s\n", romkit_last_error());
    return exit_code(status);
  }

  int pass = 1;
  if (demo->parsed()) {
    status = romkit_run_demo(cfg, &pass);
  } else if (collect->parsed()) {
    status = romkit_run_collect(cfg);
  } else if (reduce->parsed()) {
    status = romkit_run_reduce(cfg, dump_lmi ? 1 : 0);
  } else if (verify->parsed()) {
    status = romkit_run_verify(cfg, &pass);
  } else if (bound->parsed()) {
    status = romkit_run_bound(cfg);
  } else if (synth->parsed()) {
    status = romkit_run_synthesize(cfg, &pass);
  }
  romkit_config_destroy(cfg);

  if (status != ROMKIT_OK) return fail(status);
  if (!pass) {
    std::fprintf(stderr, "certificate checks FAILED; see the stage report\n");
    return 2;
  }
  return 0;
}
