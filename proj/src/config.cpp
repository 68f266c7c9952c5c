#include "romkit/config.hpp"

#include <fstream>

#include <json.hpp>

#include "romkit/numeric.hpp"
#include "numeric_impl.hpp"

namespace romkit {
namespace {

using Json = nlohmann::ordered_json;

Json vec_to_json(const VectorXd& v) {
  Json a = Json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

VectorXd vec_from_json(const Json& a) {
  VectorXd v(a.size());
  for (size_t i = 0; i < a.size(); ++i) v(i) = a[i].get<double>();
  return v;
}

Json mat_to_json(const MatrixXd& m) {
  Json rows = Json::array();
  for (int r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

MatrixXd mat_from_json(const Json& rows) {
  if (rows.empty()) return MatrixXd();
  MatrixXd m(rows.size(), rows[0].size());
  for (size_t r = 0; r < rows.size(); ++r)
    for (size_t c = 0; c < rows[r].size(); ++c)
      m(r, c) = rows[r][c].get<double>();
  return m;
}

Json dict_to_json(const DictionarySpec& spec) {
  Json j;
  j["state_dim"] = spec.state_dim();
  Json entries = Json::array();
  for (const BasisFunction& b : spec.entries()) {
    Json e;
    e["kind"] = basis_kind_name(b.kind);
    Json args = Json::array();
    args.push_back(b.i);
    if (b.arity() == 2) args.push_back(b.j);
    e["args"] = args;
    entries.push_back(e);
  }
  j["entries"] = entries;
  return j;
}

DictionarySpec dict_from_json(const Json& j) {
  std::vector<BasisFunction> entries;
  for (const Json& e : j.at("entries")) {
    BasisFunction b{};
    b.kind = basis_kind_from_name(e.at("kind").get<std::string>());
    const Json& args = e.at("args");
    require(!args.empty(), ErrorCode::InvalidInput,
            "dictionary entry needs at least one index");
    b.i = args[0].get<int>();
    if (args.size() > 1) b.j = args[1].get<int>();
    entries.push_back(b);
  }
  return DictionarySpec(j.at("state_dim").get<int>(), std::move(entries));
}

Json box_to_json(const Box& b) {
  Json j;
  j["lo"] = vec_to_json(b.lo);
  j["hi"] = vec_to_json(b.hi);
  return j;
}

Box box_from_json(const Json& j) {
  return Box{vec_from_json(j.at("lo")), vec_from_json(j.at("hi"))};
}

Json config_to_json(const PipelineConfig& c) {
  Json j;
  if (c.benchmark) j["benchmark"] = benchmark_name(*c.benchmark);
  if (!c.benchmark && c.plant_time_kind) {
    Json p;
    p["time_kind"] = time_kind_name(*c.plant_time_kind);
    p["A"] = mat_to_json(c.plant_a);
    p["B"] = mat_to_json(c.plant_b);
    j["plant"] = p;
  }
  j["dictionary"] = dict_to_json(c.dictionary);

  Json e;
  e["T"] = c.experiment.T;
  e["tau"] = c.experiment.tau;
  e["seed"] = c.experiment.seed;
  e["seed_zero"] = c.seed_zero;
  e["input_law"] = c.experiment.input_law == InputLaw::Zero ? "zero"
                                                            : "uniform_random";
  e["input_lo"] = vec_to_json(c.experiment.input_lo);
  e["input_hi"] = vec_to_json(c.experiment.input_hi);
  e["x0_lo"] = vec_to_json(c.experiment.x0_lo);
  e["x0_hi"] = vec_to_json(c.experiment.x0_hi);
  e["x0_zero_lo"] = vec_to_json(c.x0_zero_lo);
  e["x0_zero_hi"] = vec_to_json(c.x0_zero_hi);
  e["restart_every"] = c.experiment.restart_every;
  e["restart_every_zero"] = c.restart_every_zero;
  e["oracle_derivatives"] =
      c.experiment.derivative_mode == DerivativeMode::Oracle;
  j["experiment"] = e;

  Json r;
  r["nhat"] = c.reduction.nhat;
  r["kappa_hat"] = c.reduction.kappa_hat;
  r["kappa"] = c.reduction.kappa;
  r["mu"] = c.reduction.mu;
  r["eta"] = c.reduction.eta;
  r["gamma"] = c.reduction.gamma;
  r["equality_mode"] = c.reduction.equality_mode == EqualityMode::FixAhat
                           ? "fix_ahat"
                           : "fix_r1";
  r["fixed"] = mat_to_json(c.reduction.fixed);
  r["pinned_rows"] = c.reduction.pinned_rows;
  r["r1_tail_weight"] = c.reduction.r1_tail_weight;
  r["shape_rho"] = c.reduction.shape_rho;
  r["ct_gain_cap"] = c.reduction.ct_gain_cap;
  j["reduction"] = r;

  Json v;
  v["samples"] = c.verification.samples;
  v["seed"] = c.verification.seed;
  v["x_box"] = box_to_json(c.verification.x_box);
  v["xhat_box"] = box_to_json(c.verification.xhat_box);
  v["uhat_box"] = box_to_json(c.verification.uhat_box);
  v["source"] = c.verification.use_true_plant ? "plant" : "data";
  j["verification"] = v;

  Json s;
  s["enabled"] = c.synthesis.enabled;
  if (c.synthesis.enabled) {
    const ReachAvoidProblem& p = c.synthesis.problem;
    s["state_box"] = box_to_json(p.state_box);
    s["initial_box"] = box_to_json(p.initial_box);
    s["target_box"] = box_to_json(p.target_box);
    Json obs = Json::array();
    for (const Box& b : p.obstacle_boxes) obs.push_back(box_to_json(b));
    s["obstacles"] = obs;
    s["input_box"] = box_to_json(p.input_box);
    s["state_cells"] = {p.state_cells[0], p.state_cells[1]};
    s["input_cells"] = {p.input_cells[0], p.input_cells[1]};
    s["horizon"] = p.horizon;
    s["sample_time"] = p.sample_time;
    s["cell_inflation"] = p.cell_inflation;
    s["coords"] = {p.coord_i + 1, p.coord_j + 1};  // 1-based in the file
    s["runs"] = c.synthesis.runs;
    s["max_steps"] = c.synthesis.max_steps;
    s["substeps"] = c.synthesis.substeps;
    s["seed"] = c.synthesis.seed;
  }
  j["synthesis"] = s;
  j["out_dir"] = c.out_dir;
  return j;
}

PipelineConfig config_from_json(const Json& j) {
  PipelineConfig c;
  if (j.contains("benchmark")) {
    const auto id = benchmark_from_name(j.at("benchmark").get<std::string>());
    require(id.has_value(), ErrorCode::InvalidInput,
            "unknown benchmark in config");
    c.benchmark = id;
  } else if (j.contains("plant")) {
    const Json& p = j.at("plant");
    c.plant_time_kind = p.at("time_kind").get<std::string>() == "ct"
                            ? TimeKind::Continuous
                            : TimeKind::Discrete;
    c.plant_a = mat_from_json(p.at("A"));
    c.plant_b = mat_from_json(p.at("B"));
  } else {
    throw Error(ErrorCode::InvalidInput,
                "config needs either a benchmark or a plant section");
  }
  c.dictionary = dict_from_json(j.at("dictionary"));

  const Json& e = j.at("experiment");
  c.experiment.T = e.at("T").get<int>();
  c.experiment.tau = e.value("tau", 0.01);
  c.experiment.seed = e.at("seed").get<uint64_t>();
  c.seed_zero = e.value("seed_zero", c.experiment.seed + 1);
  c.experiment.input_law = e.value("input_law", std::string("uniform_random")) ==
                                   "zero"
                               ? InputLaw::Zero
                               : InputLaw::UniformRandom;
  c.experiment.input_lo = vec_from_json(e.at("input_lo"));
  c.experiment.input_hi = vec_from_json(e.at("input_hi"));
  c.experiment.x0_lo = vec_from_json(e.at("x0_lo"));
  c.experiment.x0_hi = vec_from_json(e.at("x0_hi"));
  c.x0_zero_lo = vec_from_json(e.at("x0_zero_lo"));
  c.x0_zero_hi = vec_from_json(e.at("x0_zero_hi"));
  c.experiment.restart_every = e.value("restart_every", 0);
  c.restart_every_zero = e.value("restart_every_zero", 0);
  c.experiment.derivative_mode = e.value("oracle_derivatives", false)
                                     ? DerivativeMode::Oracle
                                     : DerivativeMode::ForwardDifference;

  const Json& r = j.at("reduction");
  c.reduction.nhat = r.at("nhat").get<int>();
  c.reduction.kappa_hat = r.value("kappa_hat", 1.0);
  c.reduction.kappa = r.value("kappa", 0.5);
  c.reduction.mu = r.at("mu").get<double>();
  c.reduction.eta = r.value("eta", 0.99);
  c.reduction.gamma = r.at("gamma").get<double>();
  c.reduction.equality_mode =
      r.value("equality_mode", std::string("fix_ahat")) == "fix_r1"
          ? EqualityMode::FixR1
          : EqualityMode::FixAhat;
  c.reduction.fixed = mat_from_json(r.at("fixed"));
  c.reduction.pinned_rows = r.value("pinned_rows", std::vector<int>{});
  c.reduction.r1_tail_weight = r.value("r1_tail_weight", 1.0);
  c.reduction.shape_rho = r.value("shape_rho", true);
  c.reduction.ct_gain_cap = r.value("ct_gain_cap", 0.0);

  const Json& v = j.at("verification");
  c.verification.samples = v.at("samples").get<int>();
  c.verification.seed = v.at("seed").get<uint64_t>();
  c.verification.x_box = box_from_json(v.at("x_box"));
  c.verification.xhat_box = box_from_json(v.at("xhat_box"));
  c.verification.uhat_box = box_from_json(v.at("uhat_box"));
  c.verification.use_true_plant =
      v.value("source", std::string("data")) == "plant";

  const Json& s = j.at("synthesis");
  c.synthesis.enabled = s.value("enabled", false);
  if (c.synthesis.enabled) {
    ReachAvoidProblem& p = c.synthesis.problem;
    p.state_box = box_from_json(s.at("state_box"));
    p.initial_box = box_from_json(s.at("initial_box"));
    p.target_box = box_from_json(s.at("target_box"));
    for (const Json& ob : s.at("obstacles"))
      p.obstacle_boxes.push_back(box_from_json(ob));
    p.input_box = box_from_json(s.at("input_box"));
    p.state_cells[0] = s.at("state_cells")[0].get<int>();
    p.state_cells[1] = s.at("state_cells")[1].get<int>();
    p.input_cells[0] = s.at("input_cells")[0].get<int>();
    p.input_cells[1] = s.at("input_cells")[1].get<int>();
    p.horizon = s.value("horizon", 2000);
    p.sample_time = s.value("sample_time", 0.1);
    p.cell_inflation = s.value("cell_inflation", 0.5);
    p.coord_i = s.at("coords")[0].get<int>() - 1;
    p.coord_j = s.at("coords")[1].get<int>() - 1;
    c.synthesis.runs = s.value("runs", 10);
    c.synthesis.max_steps = s.value("max_steps", 200);
    c.synthesis.substeps = s.value("substeps", 10);
    c.synthesis.seed = s.value("seed", uint64_t{1});
  }
  c.out_dir = j.value("out_dir", std::string("out"));
  return c;
}

}  // namespace

PlantModel PipelineConfig::make_plant() const {
  if (benchmark) return PlantModel::builtin(*benchmark);
  require(plant_time_kind.has_value(), ErrorCode::InvalidInput,
          "config has neither benchmark nor plant matrices");
  return PlantModel::linear_in_dictionary(*plant_time_kind, plant_a, plant_b,
                                          dictionary);
}

std::string PipelineConfig::hash() const {
  // The artifact directory is environmental, not semantic; leaving it
  // out keeps replicate runs byte-identical wherever they land.
  PipelineConfig canon = *this;
  canon.out_dir.clear();
  return fnv1a_hex(serialize_config(canon));
}

std::string serialize_config(const PipelineConfig& config) {
  return config_to_json(config).dump(2) + "\n";
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::Io, "cannot read config " + path);
  Json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::InvalidInput,
                std::string("config parse error: ") + e.what());
  }
  try {
    return config_from_json(j);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::InvalidInput,
                std::string("config field error: ") + e.what());
  }
}

void save_config(const PipelineConfig& config, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), ErrorCode::Io, "cannot write " + path);
  out << serialize_config(config);
}

void set_config_value(PipelineConfig* c, const std::string& key,
                      const std::string& value) {
  auto as_u64 = [&] { return std::stoull(value); };
  auto as_int = [&] { return std::stoi(value); };
  auto as_dbl = [&] { return std::stod(value); };
  if (key == "experiment.seed") {
    c->experiment.seed = as_u64();
  } else if (key == "experiment.seed_zero") {
    c->seed_zero = as_u64();
  } else if (key == "experiment.T") {
    c->experiment.T = as_int();
  } else if (key == "experiment.tau") {
    c->experiment.tau = as_dbl();
  } else if (key == "experiment.oracle_derivatives") {
    c->experiment.derivative_mode = (value == "true" || value == "1")
                                        ? DerivativeMode::Oracle
                                        : DerivativeMode::ForwardDifference;
  } else if (key == "reduction.nhat") {
    c->reduction.nhat = as_int();
  } else if (key == "reduction.kappa_hat") {
    c->reduction.kappa_hat = as_dbl();
  } else if (key == "reduction.kappa") {
    c->reduction.kappa = as_dbl();
  } else if (key == "reduction.mu") {
    c->reduction.mu = as_dbl();
  } else if (key == "reduction.eta") {
    c->reduction.eta = as_dbl();
  } else if (key == "reduction.gamma") {
    c->reduction.gamma = as_dbl();
  } else if (key == "verification.samples") {
    c->verification.samples = as_int();
  } else if (key == "verification.seed") {
    c->verification.seed = as_u64();
  } else if (key == "verification.source") {
    c->verification.use_true_plant = value == "plant";
  } else if (key == "synthesis.runs") {
    c->synthesis.runs = as_int();
  } else if (key == "synthesis.seed") {
    c->synthesis.seed = as_u64();
  } else if (key == "synthesis.max_steps") {
    c->synthesis.max_steps = as_int();
  } else if (key == "out_dir") {
    c->out_dir = value;
  } else {
    throw Error(ErrorCode::InvalidInput, "unknown config key '" + key + "'");
  }
}

namespace {

VectorXd const_vec(int n, double v) { return VectorXd::Constant(n, v); }

Box box2(double lx, double ly, double hx, double hy) {
  Box b;
  b.lo = VectorXd(2);
  b.hi = VectorXd(2);
  b.lo << lx, ly;
  b.hi << hx, hy;
  return b;
}

}  // namespace

PipelineConfig demo_config(BenchmarkId id) {
  const BenchmarkInfo info = benchmark_info(id);
  PipelineConfig c;
  c.benchmark = id;
  c.dictionary = benchmark_dictionary(id);
  const int n = info.state_dim;
  const int m = info.input_dim;

  c.experiment.seed = 1001;
  c.seed_zero = 2002;
  c.experiment.input_law = InputLaw::UniformRandom;
  c.verification.samples = 10000;
  c.verification.seed = 42;

  switch (id) {
    case BenchmarkId::Ct10: {
      c.experiment.T = 59;
      c.experiment.tau = 0.01;
      c.experiment.input_lo = const_vec(m, -5);
      c.experiment.input_hi = const_vec(m, 5);
      c.experiment.x0_lo = const_vec(n, -1);
      c.experiment.x0_hi = const_vec(n, 1);
      c.x0_zero_lo = const_vec(n, -2);
      c.x0_zero_hi = const_vec(n, 2);
      c.restart_every_zero = 1;
      // The demo certifies against exact derivative data; forward
      // differences remain available through the collect stage.
      c.experiment.derivative_mode = DerivativeMode::Oracle;
      c.reduction.nhat = 2;
      c.reduction.kappa_hat = 1.0;
      c.reduction.mu = 0.5;
      c.reduction.gamma = 0.1;
      c.reduction.equality_mode = EqualityMode::FixAhat;
      c.reduction.fixed = -1e-4 * MatrixXd::Identity(2, 2);
      c.reduction.pinned_rows = {1, 2};
      c.reduction.r1_tail_weight = 10.0;
      c.reduction.ct_gain_cap = 40.0;
      c.verification.x_box = {const_vec(n, -5), const_vec(n, 5)};
      c.verification.xhat_box = {const_vec(2, -10), const_vec(2, 10)};
      c.verification.uhat_box = {const_vec(2, -6), const_vec(2, 6)};
      c.synthesis.enabled = true;
      ReachAvoidProblem& p = c.synthesis.problem;
      p.state_box = box2(-0.5, -0.5, 10.5, 10.5);
      p.initial_box = box2(0, 0, 1, 1);
      p.target_box = box2(9, 9, 10, 10);
      p.obstacle_boxes = {box2(4.6, -0.5, 5.4, 4.5)};
      p.input_box = box2(-6, -6, 6, 6);
      p.state_cells[0] = p.state_cells[1] = 110;
      p.input_cells[0] = p.input_cells[1] = 7;
      p.sample_time = 0.5;
      p.horizon = 600;
      p.coord_i = 0;
      p.coord_j = 1;
      c.synthesis.runs = 10;
      c.synthesis.max_steps = 100;
      c.synthesis.substeps = 10;
      break;
    }
    case BenchmarkId::Dt10: {
      c.experiment.T = 40;
      c.experiment.input_lo = const_vec(m, -5);
      c.experiment.input_hi = const_vec(m, 5);
      c.experiment.x0_lo = const_vec(n, -2);
      c.experiment.x0_hi = const_vec(n, 2);
      c.x0_zero_lo = const_vec(n, -3);
      c.x0_zero_hi = const_vec(n, 3);
      c.restart_every_zero = 1;
      c.reduction.nhat = 2;
      c.reduction.kappa = 0.5;
      c.reduction.mu = 1.0;
      c.reduction.eta = 0.99;
      c.reduction.gamma = 0.015;
      c.reduction.equality_mode = EqualityMode::FixAhat;
      c.reduction.fixed = MatrixXd(2, 2);
      c.reduction.fixed << 1.0, -1.5e-5, -1.5e-5, 1.0;
      c.reduction.pinned_rows = {1, 2};
      c.verification.x_box = {const_vec(n, -5), const_vec(n, 5)};
      c.verification.xhat_box = {const_vec(2, -10), const_vec(2, 10)};
      c.verification.uhat_box = {const_vec(2, -6), const_vec(2, 6)};
      c.synthesis.enabled = true;
      ReachAvoidProblem& p = c.synthesis.problem;
      p.state_box = box2(-10, -1.5, 5.5, 10.5);
      p.initial_box = box2(-9, 9, -8, 10);
      p.target_box = box2(3.5, -0.5, 4.5, 0.5);
      p.obstacle_boxes = {box2(-3.5, 3.0, -2.5, 10.5),
                          box2(1.5, -1.5, 2.5, 5.0)};
      p.input_box = box2(-6, -6, 6, 6);
      p.state_cells[0] = 280;
      p.state_cells[1] = 216;
      p.input_cells[0] = p.input_cells[1] = 7;
      p.horizon = 2000;
      p.coord_i = 0;
      p.coord_j = 1;
      c.synthesis.runs = 20;
      c.synthesis.max_steps = 700;
      c.synthesis.substeps = 1;
      break;
    }
    case BenchmarkId::PendulumCt: {
      c.experiment.T = 15;
      c.experiment.tau = 0.05;
      c.experiment.input_lo = const_vec(m, -1);
      c.experiment.input_hi = const_vec(m, 1);
      c.experiment.x0_lo = const_vec(n, -1);
      c.experiment.x0_hi = const_vec(n, 1);
      c.x0_zero_lo = const_vec(n, -1);
      c.x0_zero_hi = const_vec(n, 1);
      c.restart_every_zero = 5;
      c.experiment.derivative_mode = DerivativeMode::Oracle;
      c.reduction.nhat = 2;
      c.reduction.kappa_hat = 1.5;
      c.reduction.mu = 0.5;
      c.reduction.gamma = 0.1;
      c.reduction.equality_mode = EqualityMode::FixAhat;
      c.reduction.fixed = MatrixXd(2, 2);
      c.reduction.fixed << 0.0005, 0.0003, 0.0044, 0.0046;
      c.reduction.pinned_rows = {1, 3};
      c.verification.x_box = {const_vec(n, -2), const_vec(n, 2)};
      c.verification.xhat_box = {const_vec(2, -2), const_vec(2, 2)};
      c.verification.uhat_box = {const_vec(2, -1), const_vec(2, 1)};
      break;
    }
    case BenchmarkId::PendulumDt: {
      c.experiment.T = 15;
      c.experiment.input_lo = const_vec(m, -1);
      c.experiment.input_hi = const_vec(m, 1);
      c.experiment.x0_lo = const_vec(n, -1);
      c.experiment.x0_hi = const_vec(n, 1);
      c.x0_zero_lo = const_vec(n, -1);
      c.x0_zero_hi = const_vec(n, 1);
      c.restart_every_zero = 5;
      c.reduction.nhat = 2;
      c.reduction.kappa = 0.45;
      c.reduction.mu = 0.9;
      c.reduction.eta = 0.99;
      c.reduction.gamma = 0.1;
      c.reduction.equality_mode = EqualityMode::FixAhat;
      c.reduction.fixed = MatrixXd(2, 2);
      c.reduction.fixed << 0.0018, 0.0003, 0.0018, 0.0004;
      c.reduction.pinned_rows = {1, 3};
      c.verification.x_box = {const_vec(n, -2), const_vec(n, 2)};
      c.verification.xhat_box = {const_vec(2, -2), const_vec(2, 2)};
      c.verification.uhat_box = {const_vec(2, -1), const_vec(2, 1)};
      break;
    }
  }
  c.out_dir = std::string("out_") + benchmark_name(id);
  return c;
}

}  // namespace romkit
