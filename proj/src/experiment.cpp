#include "romkit/experiment.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "romkit/numeric.hpp"
#include "numeric_impl.hpp"

namespace romkit {

std::string TrajectoryBatch::data_hash() const {
  Fnv1a h;
  h.update("batch");
  auto feed = [&h](const MatrixXd& m) {
    for (int c = 0; c < m.cols(); ++c)
      for (int r = 0; r < m.rows(); ++r) {
        const double v = m(r, c);
        h.update(&v, sizeof v);
      }
  };
  feed(U);
  feed(raw_states);
  h.update(&tau, sizeof tau);
  h.update(&restart_every, sizeof restart_every);
  return h.hex();
}

namespace {

// Segment lengths covering T samples: restart_every == 0 keeps one
// trajectory.
std::vector<int> segment_lengths(int T, int restart_every) {
  const int seg = restart_every > 0 ? std::min(restart_every, T) : T;
  std::vector<int> lens(T / seg, seg);
  if (T % seg) lens.push_back(T % seg);
  return lens;
}

}  // namespace

TrajectoryBatch collect(const PlantModel& plant, const DictionarySpec& spec,
                        const ExperimentConfig& config) {
  const int n = plant.state_dim();
  const int m = plant.input_dim();
  require(spec.state_dim() == n, ErrorCode::InvalidInput,
          "dictionary state dimension does not match the plant");
  require(config.T >= 1, ErrorCode::InvalidInput, "T must be at least 1");

  const std::vector<int> lens = segment_lengths(config.T, config.restart_every);
  require(lens.size() == 1 || !config.x0_fixed, ErrorCode::InvalidInput,
          "restarted collection draws initial conditions from the x0 box");
  const bool ct = plant.time_kind() == TimeKind::Continuous;
  if (ct)
    require(config.tau > 0, ErrorCode::InvalidInput, "tau must be positive");
  if (config.input_law == InputLaw::UniformRandom)
    require(config.input_lo.size() == m && config.input_hi.size() == m,
            ErrorCode::InvalidInput, "input box has wrong dimension");

  Rng rng(config.seed);
  TrajectoryBatch batch;
  batch.time_kind = plant.time_kind();
  batch.excitation = config.input_law == InputLaw::Zero ? Excitation::ZeroInput
                                                        : Excitation::Excited;
  batch.derivative_mode =
      ct ? config.derivative_mode : DerivativeMode::Oracle;  // dt is exact
  batch.T = config.T;
  batch.tau = ct ? config.tau : 0.0;
  batch.seed = config.seed;
  batch.restart_every = config.restart_every;
  batch.dictionary_hash = spec.hash();

  batch.U.resize(m, config.T);
  batch.X.resize(n, config.T);
  batch.Xplus.resize(n, config.T);
  batch.raw_states.resize(n, config.T + static_cast<int>(lens.size()));

  int col = 0, raw_col = 0;
  for (const int len : lens) {
    VectorXd x0;
    if (config.x0_fixed) {
      require(config.x0.size() == n, ErrorCode::InvalidInput,
              "fixed x0 has wrong dimension");
      x0 = config.x0;
    } else {
      require(config.x0_lo.size() == n && config.x0_hi.size() == n,
              ErrorCode::InvalidInput, "x0 box has wrong dimension");
      x0 = rng.uniform_vector(config.x0_lo, config.x0_hi);
    }
    MatrixXd u = MatrixXd::Zero(m, len);
    if (config.input_law == InputLaw::UniformRandom)
      for (int k = 0; k < len; ++k)
        u.col(k) = rng.uniform_vector(config.input_lo, config.input_hi);

    MatrixXd traj;
    if (ct) {
      auto input_at = [&](double t) -> VectorXd {
        int k = static_cast<int>(t / config.tau + 0.5);
        if (k >= len) k = len - 1;
        return u.col(k);
      };
      traj = simulate_ct(plant, x0, input_at, config.tau, len);
    } else {
      traj = simulate_dt(plant, x0, [&](int k) { return u.col(k); }, len);
    }

    batch.U.middleCols(col, len) = u;
    batch.X.middleCols(col, len) = traj.leftCols(len);
    if (!ct) {
      batch.Xplus.middleCols(col, len) = traj.rightCols(len);
    } else if (config.derivative_mode == DerivativeMode::Oracle) {
      for (int k = 0; k < len; ++k)
        batch.Xplus.col(col + k) = plant.rhs(traj.col(k), u.col(k));
    } else {
      batch.Xplus.middleCols(col, len) =
          estimate_derivatives(traj, config.tau);
    }
    batch.raw_states.middleCols(raw_col, len + 1) = traj;
    col += len;
    raw_col += len + 1;
  }
  batch.D = spec.build_data_matrix(batch.X);
  return batch;
}

RankReport rank_report(const MatrixXd& m) {
  RankReport rep;
  if (m.size() == 0) return rep;
  Eigen::BDCSVD<MatrixXd> svd(m);
  const VectorXd sv = svd.singularValues();
  rep.sigma_max = sv(0);
  rep.sigma_min = sv(sv.size() - 1);
  const double thresh = 1e-8 * rep.sigma_max;
  rep.rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > thresh) ++rep.rank;
  rep.full_row_rank = rep.rank == m.rows();
  rep.condition = rep.sigma_min > 0
                      ? rep.sigma_max / rep.sigma_min
                      : std::numeric_limits<double>::infinity();
  return rep;
}

MatrixXd right_pinv(const MatrixXd& m) {
  require(m.rows() <= m.cols(), ErrorCode::InvalidInput,
          "right pseudoinverse needs a wide matrix");
  const RankReport rep = rank_report(m);
  if (!rep.full_row_rank)
    throw Error(ErrorCode::RankDeficient,
                "matrix is row-rank deficient (rank " +
                    std::to_string(rep.rank) + " of " +
                    std::to_string(m.rows()) +
                    "); collect richer data: at least d+1 samples are needed "
                    "and T should be large enough for full row rank");
  // QR of M^T: M^T = Q R, so M^+ = Q R^{-T}.
  Eigen::HouseholderQR<MatrixXd> qr(m.transpose());
  MatrixXd q = qr.householderQ() * MatrixXd::Identity(m.cols(), m.rows());
  MatrixXd r = qr.matrixQR().topRows(m.rows()).triangularView<Eigen::Upper>();
  MatrixXd x = q * r.transpose()
                       .triangularView<Eigen::Lower>()
                       .solve(MatrixXd::Identity(m.rows(), m.rows()));
  // One refinement step squares the right-inverse residual, which keeps
  // M * M^+ - I near machine precision on ill-conditioned data.
  x += x * (MatrixXd::Identity(m.rows(), m.rows()) - m * x);
  return x;
}

QbarSolution solve_qbar(const MatrixXd& dbar, int state_dim) {
  const int d = static_cast<int>(dbar.rows());
  require(state_dim >= 1 && state_dim <= d, ErrorCode::InvalidInput,
          "state_dim out of range");
  QbarSolution sol;
  sol.Qbar = right_pinv(dbar);
  sol.Qbar1 = sol.Qbar.leftCols(state_dim);
  sol.Qbar2 = sol.Qbar.rightCols(d - state_dim);
  sol.residual =
      (dbar * sol.Qbar - MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff();
  return sol;
}

void export_batch_csv(const TrajectoryBatch& batch, const std::string& path) {
  const int n = batch.state_dim();
  const int m = batch.input_dim();
  std::ofstream out(path);
  require(out.good(), ErrorCode::Io, "cannot write " + path);
  out << "t";
  for (int i = 1; i <= n; ++i) out << ",x" << i;
  for (int i = 1; i <= m; ++i) out << ",u" << i;
  out << "\n";
  const bool ct = batch.time_kind == TimeKind::Continuous;
  const std::vector<int> lens =
      segment_lengths(batch.T, batch.restart_every);
  int col = 0, raw_col = 0;
  for (const int len : lens) {
    for (int k = 0; k <= len; ++k) {
      out << format_double(ct ? k * batch.tau : static_cast<double>(k));
      for (int i = 0; i < n; ++i)
        out << "," << format_double(batch.raw_states(i, raw_col + k));
      for (int i = 0; i < m; ++i)
        out << "," << format_double(k < len ? batch.U(i, col + k) : 0.0);
      out << "\n";
    }
    col += len;
    raw_col += len + 1;
  }
  require(out.good(), ErrorCode::Io, "write failed for " + path);

  std::ofstream meta(path + ".meta");
  require(meta.good(), ErrorCode::Io, "cannot write " + path + ".meta");
  meta << "time_kind=" << time_kind_name(batch.time_kind) << "\n";
  meta << "tau=" << format_double(batch.tau) << "\n";
  meta << "T=" << batch.T << "\n";
  meta << "restart_every=" << batch.restart_every << "\n";
  meta << "seed=" << batch.seed << "\n";
  meta << "dictionary_hash=" << batch.dictionary_hash << "\n";
  meta << "excitation="
       << (batch.excitation == Excitation::ZeroInput ? "zero_input" : "excited")
       << "\n";
  meta << "derivatives="
       << (batch.derivative_mode == DerivativeMode::Oracle
               ? "oracle"
               : "forward_difference")
       << "\n";
  meta << "data_hash=" << batch.data_hash() << "\n";
}

namespace {

std::map<std::string, std::string> read_meta(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::Io, "cannot read " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

}  // namespace

TrajectoryBatch import_batch_csv(const std::string& path,
                                 const DictionarySpec& spec,
                                 const PlantModel* oracle_plant) {
  const auto meta = read_meta(path + ".meta");
  auto need = [&](const std::string& key) -> const std::string& {
    auto it = meta.find(key);
    require(it != meta.end(), ErrorCode::Io,
            "metadata key '" + key + "' missing in " + path + ".meta");
    return it->second;
  };

  TrajectoryBatch batch;
  batch.time_kind =
      need("time_kind") == "ct" ? TimeKind::Continuous : TimeKind::Discrete;
  batch.tau = std::stod(need("tau"));
  batch.T = std::stoi(need("T"));
  batch.restart_every =
      meta.count("restart_every") ? std::stoi(meta.at("restart_every")) : 0;
  batch.seed = std::stoull(need("seed"));
  batch.dictionary_hash = need("dictionary_hash");
  batch.excitation = need("excitation") == "zero_input" ? Excitation::ZeroInput
                                                        : Excitation::Excited;
  batch.derivative_mode = need("derivatives") == "oracle"
                              ? DerivativeMode::Oracle
                              : DerivativeMode::ForwardDifference;
  require(batch.dictionary_hash == spec.hash(), ErrorCode::InvalidInput,
          "trajectory was collected with a different dictionary");

  std::ifstream in(path);
  require(in.good(), ErrorCode::Io, "cannot read " + path);
  std::string header;
  std::getline(in, header);
  int n = 0, m = 0;
  {
    std::stringstream ss(header);
    std::string col;
    while (std::getline(ss, col, ',')) {
      if (col.size() > 1 && col[0] == 'x') ++n;
      if (col.size() > 1 && col[0] == 'u') ++m;
    }
  }
  require(n == spec.state_dim(), ErrorCode::InvalidInput,
          "CSV state dimension does not match the dictionary");

  const std::vector<int> lens = segment_lengths(batch.T, batch.restart_every);
  batch.raw_states.resize(n, batch.T + static_cast<int>(lens.size()));
  batch.U.resize(m, batch.T);
  batch.X.resize(n, batch.T);
  batch.Xplus.resize(n, batch.T);

  std::string line;
  auto read_row = [&](int raw_col, int u_col) {
    require(static_cast<bool>(std::getline(in, line)), ErrorCode::Io,
            "trajectory CSV has fewer rows than the metadata promises");
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');  // t column
    for (int i = 0; i < n; ++i) {
      require(static_cast<bool>(std::getline(ss, cell, ',')), ErrorCode::Io,
              "short CSV row");
      batch.raw_states(i, raw_col) = std::stod(cell);
    }
    for (int i = 0; i < m; ++i) {
      require(static_cast<bool>(std::getline(ss, cell, ',')), ErrorCode::Io,
              "short CSV row");
      if (u_col >= 0) batch.U(i, u_col) = std::stod(cell);
    }
  };

  int col = 0, raw_col = 0;
  for (const int len : lens) {
    for (int k = 0; k <= len; ++k)
      read_row(raw_col + k, k < len ? col + k : -1);
    const auto seg = batch.raw_states.middleCols(raw_col, len + 1);
    batch.X.middleCols(col, len) = seg.leftCols(len);
    if (batch.time_kind == TimeKind::Discrete) {
      batch.Xplus.middleCols(col, len) = seg.rightCols(len);
    } else if (batch.derivative_mode == DerivativeMode::Oracle) {
      require(oracle_plant != nullptr, ErrorCode::InvalidInput,
              "batch was collected with oracle derivatives; the plant is "
              "needed to rebuild them");
      for (int k = 0; k < len; ++k)
        batch.Xplus.col(col + k) =
            oracle_plant->rhs(seg.col(k), batch.U.col(col + k));
    } else {
      batch.Xplus.middleCols(col, len) =
          estimate_derivatives(seg, batch.tau);
    }
    col += len;
    raw_col += len + 1;
  }
  batch.D = spec.build_data_matrix(batch.X);
  return batch;
}

}  // namespace romkit
