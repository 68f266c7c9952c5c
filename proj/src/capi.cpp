#include "romkit.h"

#include <cmath>
#include <cstring>
#include <string>

#include "romkit/config.hpp"
#include "romkit/mor_ct.hpp"
#include "romkit/mor_dt.hpp"
#include "romkit/pipeline.hpp"
#include "romkit/reduction.hpp"

using namespace romkit;

struct romkit_config_t {
  PipelineConfig cfg;
};
struct romkit_reduction_t {
  Reduction red;
};

namespace {

thread_local std::string g_last_error;

romkit_status status_of(const Error& e) {
  g_last_error = e.what();
  switch (e.code()) {
    case ErrorCode::InvalidInput: return ROMKIT_ERR_INVALID;
    case ErrorCode::RankDeficient: return ROMKIT_ERR_RANK;
    case ErrorCode::Infeasible: return ROMKIT_ERR_INFEASIBLE;
    case ErrorCode::Diverged: return ROMKIT_ERR_DIVERGED;
    case ErrorCode::Io: return ROMKIT_ERR_IO;
    case ErrorCode::Internal: return ROMKIT_ERR_INTERNAL;
  }
  return ROMKIT_ERR_INTERNAL;
}

template <typename Fn>
romkit_status guarded(Fn&& fn) {
  try {
    fn();
    return ROMKIT_OK;
  } catch (const Error& e) {
    return status_of(e);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return ROMKIT_ERR_INTERNAL;
  }
}

}  // namespace

extern "C" {

const char* romkit_version(void) { return kToolVersion; }

const char* romkit_last_error(void) { return g_last_error.c_str(); }

romkit_config_t* romkit_config_load(const char* path) {
  if (!path) {
    g_last_error = "path is null";
    return nullptr;
  }
  try {
    return new romkit_config_t{load_config(path)};
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return nullptr;
  }
}

romkit_config_t* romkit_config_demo(const char* benchmark) {
  if (!benchmark) {
    g_last_error = "benchmark name is null";
    return nullptr;
  }
  const auto id = benchmark_from_name(benchmark);
  if (!id) {
    g_last_error = std::string("unknown benchmark '") + benchmark + "'";
    return nullptr;
  }
  return new romkit_config_t{demo_config(*id)};
}

romkit_status romkit_config_set(romkit_config_t* config, const char* key,
                                const char* value) {
  if (!config || !key || !value) {
    g_last_error = "null argument";
    return ROMKIT_ERR_INVALID;
  }
  return guarded([&] { set_config_value(&config->cfg, key, value); });
}

romkit_status romkit_config_save(const romkit_config_t* config,
                                 const char* path) {
  if (!config || !path) {
    g_last_error = "null argument";
    return ROMKIT_ERR_INVALID;
  }
  return guarded([&] { save_config(config->cfg, path); });
}

void romkit_config_destroy(romkit_config_t* config) { delete config; }

romkit_status romkit_run_collect(const romkit_config_t* config) {
  if (!config) return ROMKIT_ERR_INVALID;
  return guarded([&] { Pipeline(config->cfg).collect(); });
}

romkit_status romkit_run_reduce(const romkit_config_t* config, int dump_lmi) {
  if (!config) return ROMKIT_ERR_INVALID;
  return guarded([&] { Pipeline(config->cfg).reduce(dump_lmi != 0); });
}

romkit_status romkit_run_verify(const romkit_config_t* config, int* pass) {
  if (!config) return ROMKIT_ERR_INVALID;
  return guarded([&] {
    const auto summary = Pipeline(config->cfg).verify();
    if (pass) *pass = summary.pass ? 1 : 0;
  });
}

romkit_status romkit_run_bound(const romkit_config_t* config) {
  if (!config) return ROMKIT_ERR_INVALID;
  return guarded([&] { Pipeline(config->cfg).bound(); });
}

romkit_status romkit_run_synthesize(const romkit_config_t* config, int* pass) {
  if (!config) return ROMKIT_ERR_INVALID;
  return guarded([&] {
    const auto summary = Pipeline(config->cfg).synthesize_stage();
    if (pass) *pass = summary.pass ? 1 : 0;
  });
}

romkit_status romkit_run_demo(const romkit_config_t* config, int* pass) {
  if (!config) return ROMKIT_ERR_INVALID;
  return guarded([&] {
    const bool ok = Pipeline(config->cfg).demo();
    if (pass) *pass = ok ? 1 : 0;
  });
}

romkit_reduction_t* romkit_reduction_load(const char* path) {
  if (!path) {
    g_last_error = "path is null";
    return nullptr;
  }
  try {
    return new romkit_reduction_t{load_reduction(path)};
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return nullptr;
  }
}

void romkit_reduction_destroy(romkit_reduction_t* reduction) {
  delete reduction;
}

romkit_status romkit_reduction_dims(const romkit_reduction_t* reduction,
                                    int* n, int* m, int* d, int* nhat) {
  if (!reduction) return ROMKIT_ERR_INVALID;
  if (n) *n = reduction->red.n;
  if (m) *m = reduction->red.m;
  if (d) *d = reduction->red.d;
  if (nhat) *nhat = reduction->red.nhat;
  return ROMKIT_OK;
}

double romkit_reduction_scalar(const romkit_reduction_t* reduction,
                               const char* name) {
  if (!reduction || !name) return std::nan("");
  const Reduction& r = reduction->red;
  const std::string key = name;
  if (key == "alpha") return r.alpha;
  if (key == "kappa") return r.kappa;
  if (key == "rho") return r.rho;
  if (key == "mu") return r.mu;
  if (key == "kappa_hat") return r.kappa_hat;
  if (key == "gamma") return r.gamma;
  if (key == "eta") return r.eta;
  if (key == "nu") return r.nu;
  if (key == "lmi_margin") return r.lmi_margin;
  return std::nan("");
}

romkit_status romkit_reduction_matrix(const romkit_reduction_t* reduction,
                                      const char* name, double* values,
                                      int* rows, int* cols) {
  if (!reduction || !name) return ROMKIT_ERR_INVALID;
  const Reduction& r = reduction->red;
  const std::string key = name;
  const MatrixXd* m = nullptr;
  if (key == "P") m = &r.P;
  else if (key == "H") m = &r.H;
  else if (key == "Q") m = &r.Q;
  else if (key == "Qbar") m = &r.Qbar;
  else if (key == "R1") m = &r.R1;
  else if (key == "R2") m = &r.R2;
  else if (key == "Ahat") m = &r.Ahat;
  else if (key == "Bhat") m = &r.Bhat;
  else if (key == "Chat") m = &r.Chat;
  else if (key == "Xi") m = &r.Xi;
  else if (key == "Psi") m = &r.Psi;
  else if (key == "G") m = &r.G;
  else if (key == "Bdata") m = &r.Bdata;
  else if (key == "Aest") m = &r.Aest;
  else if (key == "XplusQ") m = &r.XplusQ;
  if (!m) {
    g_last_error = "unknown matrix '" + key + "'";
    return ROMKIT_ERR_INVALID;
  }
  if (rows) *rows = static_cast<int>(m->rows());
  if (cols) *cols = static_cast<int>(m->cols());
  if (values) {
    for (int r_ = 0; r_ < m->rows(); ++r_)
      for (int c = 0; c < m->cols(); ++c)
        values[r_ * m->cols() + c] = (*m)(r_, c);
  }
  return ROMKIT_OK;
}

romkit_status romkit_interface_input(const romkit_reduction_t* reduction,
                                     const double* x, const double* xhat,
                                     const double* uhat, double* u) {
  if (!reduction || !x || !xhat || !uhat || !u) return ROMKIT_ERR_INVALID;
  return guarded([&] {
    const Reduction& r = reduction->red;
    const VectorXd xv = Eigen::Map<const VectorXd>(x, r.n);
    const VectorXd xhv = Eigen::Map<const VectorXd>(xhat, r.nhat);
    const VectorXd uhv = Eigen::Map<const VectorXd>(uhat, r.mhat);
    const VectorXd uv = interface_input(r, xv, xhv, uhv);
    Eigen::Map<VectorXd>(u, r.m) = uv;
  });
}

double romkit_bound_ct_reported(double s0, double t, double alpha,
                                double kappa, double rho, double uhat_inf) {
  return bound_ct_reported(s0, t, alpha, kappa, rho, uhat_inf);
}

double romkit_bound_ct_envelope(double s0, double t, double alpha,
                                double kappa, double rho, double uhat_inf) {
  return bound_ct_envelope(s0, t, alpha, kappa, rho, uhat_inf);
}

double romkit_relation_epsilon(double rho, double kappa, double eta,
                               double alpha, double nu) {
  return std::sqrt(rho * nu / ((1.0 - kappa) * eta) / alpha);
}

}  // extern "C"
