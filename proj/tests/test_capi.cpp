#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <string>

#include "romkit.h"

TEST_CASE("version and error reporting") {
  CHECK(std::string(romkit_version()).rfind("romkit", 0) == 0);
  CHECK(romkit_config_load("/nonexistent/config.json") == nullptr);
  CHECK(std::string(romkit_last_error()).size() > 0);
  CHECK(romkit_config_demo("not_a_benchmark") == nullptr);
}

TEST_CASE("bound arithmetic") {
  CHECK(romkit_bound_ct_reported(0, 1e9, 1.2048, 0.5, 0.0812, 6.0) ==
        doctest::Approx(0.81).epsilon(0.01));
  CHECK(romkit_relation_epsilon(0.0022, 0.5, 0.99, 0.3578, 36.0) ==
        doctest::Approx(0.66).epsilon(0.03));
  CHECK(romkit_bound_ct_envelope(0, 1e9, 1.0, 0.5, 0.125, 2.0) ==
        doctest::Approx(1.0));
}

TEST_CASE("config overrides and save/load round-trip") {
  romkit_config_t* cfg = romkit_config_demo("pendulum_dt");
  REQUIRE(cfg != nullptr);
  CHECK(romkit_config_set(cfg, "experiment.seed", "123") == ROMKIT_OK);
  CHECK(romkit_config_set(cfg, "out_dir", "capi_cfg_dir") == ROMKIT_OK);
  CHECK(romkit_config_set(cfg, "bogus.key", "1") == ROMKIT_ERR_INVALID);

  CHECK(romkit_config_save(cfg, "capi_cfg.json") == ROMKIT_OK);
  romkit_config_t* back = romkit_config_load("capi_cfg.json");
  REQUIRE(back != nullptr);
  romkit_config_destroy(back);
  romkit_config_destroy(cfg);
  std::remove("capi_cfg.json");
}

TEST_CASE("stage calls produce a loadable certified reduction") {
  romkit_config_t* cfg = romkit_config_demo("pendulum_dt");
  REQUIRE(cfg != nullptr);
  REQUIRE(romkit_config_set(cfg, "out_dir", "capi_run") == ROMKIT_OK);
  REQUIRE(romkit_config_set(cfg, "verification.samples", "500") == ROMKIT_OK);

  CHECK(romkit_run_collect(cfg) == ROMKIT_OK);
  CHECK(romkit_run_reduce(cfg, 0) == ROMKIT_OK);
  int pass = 0;
  CHECK(romkit_run_verify(cfg, &pass) == ROMKIT_OK);
  CHECK(pass == 1);
  CHECK(romkit_run_bound(cfg) == ROMKIT_OK);

  romkit_reduction_t* red = romkit_reduction_load("capi_run/reduction.txt");
  REQUIRE(red != nullptr);
  int n = 0, m = 0, d = 0, nhat = 0;
  CHECK(romkit_reduction_dims(red, &n, &m, &d, &nhat) == ROMKIT_OK);
  CHECK(n == 4);
  CHECK(m == 2);
  CHECK(d == 12);
  CHECK(nhat == 2);
  CHECK(romkit_reduction_scalar(red, "alpha") > 0);
  CHECK(romkit_reduction_scalar(red, "kappa") == doctest::Approx(0.45));
  CHECK(std::isnan(romkit_reduction_scalar(red, "nope")));

  int rows = 0, cols = 0;
  CHECK(romkit_reduction_matrix(red, "R1", nullptr, &rows, &cols) == ROMKIT_OK);
  CHECK(rows == 4);
  CHECK(cols == 2);
  double r1[8];
  CHECK(romkit_reduction_matrix(red, "R1", r1, &rows, &cols) == ROMKIT_OK);
  CHECK(r1[0] == 1.0);  // pinned first row
  CHECK(romkit_reduction_matrix(red, "nope", nullptr, &rows, &cols) ==
        ROMKIT_ERR_INVALID);

  // Interface refinement at a matched pair with zero input.
  const double x[4] = {0, 0, 0, 0};
  const double xhat[2] = {0, 0};
  const double uhat[2] = {0, 0};
  double u[2] = {99, 99};
  CHECK(romkit_interface_input(red, x, xhat, uhat, u) == ROMKIT_OK);
  CHECK(std::abs(u[0]) < 1e-9);
  CHECK(std::abs(u[1]) < 1e-9);

  romkit_reduction_destroy(red);
  romkit_config_destroy(cfg);
}
