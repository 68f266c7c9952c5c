#include "romkit/reduction.hpp"

#include <fstream>
#include <sstream>

#include <Eigen/QR>

#include "romkit/numeric.hpp"
#include "numeric_impl.hpp"

namespace romkit {

MatrixXd Reduction::reduction_matrix() const {
  MatrixXd r(d, nhat);
  r.topRows(n) = R1;
  r.bottomRows(d - n) = R2;
  return r;
}

double Reduction::sf_value(const VectorXd& x, const VectorXd& xhat) const {
  const VectorXd e = x - R1 * xhat;
  return e.dot(P * e);
}

VectorXd Reduction::output_error(const VectorXd& x,
                                 const VectorXd& xhat) const {
  return x - Chat * xhat;
}

VectorXd interface_input(const Reduction& red, const VectorXd& x,
                         const VectorXd& xhat, const VectorXd& uhat) {
  require(x.size() == red.n && xhat.size() == red.nhat &&
              uhat.size() == red.mhat,
          ErrorCode::InvalidInput, "interface argument dimension mismatch");
  const VectorXd dx = red.dictionary.evaluate(x);
  return red.G * (dx - red.reduction_matrix() * xhat) + red.Xi * xhat +
         red.Psi * uhat;
}

VectorXd closed_loop_rhs_data(const Reduction& red, const VectorXd& x,
                              const VectorXd& xhat, const VectorXd& uhat) {
  const VectorXd dx = red.dictionary.evaluate(x);
  return red.XplusQ * dx -
         (red.XplusQ - red.Aest) * (red.reduction_matrix() * xhat) +
         red.Bdata * (red.Xi * xhat + red.Psi * uhat);
}

EmbeddingSolution solve_rom_embedding(const MatrixXd& m1, const MatrixXd& m2,
                                      const MatrixXd& bdata,
                                      const ReductionConfig& config) {
  const int n = static_cast<int>(m1.rows());
  const int dn = static_cast<int>(m2.cols());
  const int m = static_cast<int>(bdata.cols());
  const int nhat = config.nhat;
  require(m1.cols() == n, ErrorCode::InvalidInput, "M1 must be n x n");
  require(m2.rows() == n, ErrorCode::InvalidInput, "M2 must have n rows");
  require(bdata.rows() == n, ErrorCode::InvalidInput, "Bdata must have n rows");

  const int rows = n * nhat;
  auto vec_index = [&](int r, int c) { return c * n + r; };

  EmbeddingSolution sol;
  MatrixXd k;      // rows x unknowns, residual operator
  VectorXd rhs = VectorXd::Zero(rows);
  std::vector<std::pair<int, int>> r1_free;  // (row, col) of free R1 entries

  if (config.equality_mode == EqualityMode::FixAhat) {
    require(config.fixed.rows() == nhat && config.fixed.cols() == nhat,
            ErrorCode::InvalidInput, "fixed Ahat must be nhat x nhat");
    sol.Ahat = config.fixed;

    std::vector<int> pins = config.pinned_rows;
    if (pins.empty())
      for (int i = 1; i <= nhat; ++i) pins.push_back(i);
    require(static_cast<int>(pins.size()) == nhat, ErrorCode::InvalidInput,
            "exactly nhat rows of R1 must be pinned");
    MatrixXd pin = MatrixXd::Zero(n, nhat);
    std::vector<bool> pinned(n, false);
    for (int c = 0; c < nhat; ++c) {
      const int r = pins[c] - 1;
      require(r >= 0 && r < n && !pinned[r], ErrorCode::InvalidInput,
              "pinned rows must be distinct 1-based state indices");
      pinned[r] = true;
      pin(r, c) = 1.0;
    }
    for (int c = 0; c < nhat; ++c)
      for (int r = 0; r < n; ++r)
        if (!pinned[r]) r1_free.push_back({r, c});

    const int unknowns =
        static_cast<int>(r1_free.size()) + dn * nhat + m * nhat;
    k = MatrixXd::Zero(rows, unknowns);
    int u = 0;
    // Free R1 entries: M1 R1 - R1 Ahat.
    for (const auto& [r, c] : r1_free) {
      for (int i = 0; i < n; ++i) k(vec_index(i, c), u) += m1(i, r);
      for (int j = 0; j < nhat; ++j)
        k(vec_index(r, j), u) -= sol.Ahat(c, j);
      ++u;
    }
    // R2 entries: M2 R2.
    for (int c = 0; c < nhat; ++c)
      for (int r = 0; r < dn; ++r, ++u)
        for (int i = 0; i < n; ++i) k(vec_index(i, c), u) += m2(i, r);
    // Xi entries: + Bdata Xi.
    for (int c = 0; c < nhat; ++c)
      for (int r = 0; r < m; ++r, ++u)
        for (int i = 0; i < n; ++i) k(vec_index(i, c), u) += bdata(i, r);

    const MatrixXd pinned_part = m1 * pin - pin * sol.Ahat;
    for (int c = 0; c < nhat; ++c)
      for (int i = 0; i < n; ++i) rhs(vec_index(i, c)) = -pinned_part(i, c);

    // Weighted minimum norm: substituting theta = S psi with S scaling
    // the R1 entries by 1/w makes |psi| the weighted norm.
    const double w = std::max(config.r1_tail_weight, 1e-6);
    MatrixXd ks = k;
    ks.leftCols(r1_free.size()) /= w;
    Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(ks);
    VectorXd theta = cod.solve(rhs);
    theta += cod.solve(rhs - ks * theta);
    theta.head(r1_free.size()) /= w;
    sol.residual = (k * theta - rhs).cwiseAbs().maxCoeff();

    sol.R1 = pin;
    int idx = 0;
    for (const auto& [r, c] : r1_free) sol.R1(r, c) = theta(idx++);
    sol.R2.resize(dn, nhat);
    for (int c = 0; c < nhat; ++c)
      for (int r = 0; r < dn; ++r) sol.R2(r, c) = theta(idx++);
    sol.Xi.resize(m, nhat);
    for (int c = 0; c < nhat; ++c)
      for (int r = 0; r < m; ++r) sol.Xi(r, c) = theta(idx++);
  } else {
    require(config.fixed.rows() == n && config.fixed.cols() == nhat,
            ErrorCode::InvalidInput, "fixed R1 must be n x nhat");
    sol.R1 = config.fixed;

    const int unknowns = nhat * nhat + dn * nhat + m * nhat;
    k = MatrixXd::Zero(rows, unknowns);
    int u = 0;
    // Ahat entries: - R1 Ahat.
    for (int c = 0; c < nhat; ++c)
      for (int r = 0; r < nhat; ++r, ++u)
        for (int i = 0; i < n; ++i) k(vec_index(i, c), u) -= sol.R1(i, r);
    for (int c = 0; c < nhat; ++c)
      for (int r = 0; r < dn; ++r, ++u)
        for (int i = 0; i < n; ++i) k(vec_index(i, c), u) += m2(i, r);
    for (int c = 0; c < nhat; ++c)
      for (int r = 0; r < m; ++r, ++u)
        for (int i = 0; i < n; ++i) k(vec_index(i, c), u) += bdata(i, r);

    const MatrixXd lin = m1 * sol.R1;
    for (int c = 0; c < nhat; ++c)
      for (int i = 0; i < n; ++i) rhs(vec_index(i, c)) = -lin(i, c);

    Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(k);
    VectorXd theta = cod.solve(rhs);
    theta += cod.solve(rhs - k * theta);
    sol.residual = (k * theta - rhs).cwiseAbs().maxCoeff();

    int idx = 0;
    sol.Ahat.resize(nhat, nhat);
    for (int c = 0; c < nhat; ++c)
      for (int r = 0; r < nhat; ++r) sol.Ahat(r, c) = theta(idx++);
    sol.R2.resize(dn, nhat);
    for (int c = 0; c < nhat; ++c)
      for (int r = 0; r < dn; ++r) sol.R2(r, c) = theta(idx++);
    sol.Xi.resize(m, nhat);
    for (int c = 0; c < nhat; ++c)
      for (int r = 0; r < m; ++r) sol.Xi(r, c) = theta(idx++);
  }

  if (sol.residual > config.eq_tol) {
    std::string msg = "embedding equality has no solution within tolerance "
                      "(residual " +
                      format_double(sol.residual) + ")";
    if (config.equality_mode == EqualityMode::FixR1 && 2 * n > dn + n + nhat + m)
      msg += "; with R1 fixed the system has " + std::to_string(rows) +
             " equations but only " +
             std::to_string(nhat * (nhat + dn + m)) +
             " unknowns and is overdetermined -- fixing Ahat instead "
             "usually resolves this";
    throw Error(ErrorCode::Infeasible, msg);
  }
  return sol;
}

MatrixXd compute_psi(const MatrixXd& p, const MatrixXd& bdata,
                     const MatrixXd& r1, const MatrixXd& bhat,
                     std::string* note) {
  if (bhat.size() == 0 || bdata.cols() == 0)
    return MatrixXd::Zero(bdata.cols(), bhat.cols());
  const MatrixXd sp = spd_sqrt(p);
  const MatrixXd lhs = sp * bdata;
  const MatrixXd rhs = sp * r1 * bhat;
  Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(lhs);
  if (cod.rank() < bdata.cols() && note)
    *note = "Bdata' P Bdata is singular; Psi uses the pseudoinverse "
            "least-squares solution";
  return cod.solve(rhs);
}

// --- archive -----------------------------------------------------------

namespace {

void write_matrix(std::ofstream& out, const std::string& name,
                  const MatrixXd& m) {
  out << "matrix " << name << " " << m.rows() << " " << m.cols() << "\n";
  for (int r = 0; r < m.rows(); ++r) {
    for (int c = 0; c < m.cols(); ++c) {
      if (c) out << " ";
      out << format_double(m(r, c));
    }
    out << "\n";
  }
}

}  // namespace

void save_reduction(const Reduction& red, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), ErrorCode::Io, "cannot write " + path);
  out << "romkit-reduction v1\n";
  out << "time_kind " << time_kind_name(red.time_kind) << "\n";
  out << "dims " << red.n << " " << red.m << " " << red.d << " " << red.nhat
      << " " << red.mhat << " " << red.T << "\n";
  auto scalar = [&](const char* name, double v) {
    out << "scalar " << name << " " << format_double(v) << "\n";
  };
  scalar("alpha", red.alpha);
  scalar("kappa", red.kappa);
  scalar("rho", red.rho);
  scalar("mu", red.mu);
  scalar("kappa_hat", red.kappa_hat);
  scalar("gamma", red.gamma);
  scalar("eta", red.eta);
  scalar("nu", red.nu);
  scalar("lmi_margin", red.lmi_margin);
  for (const auto& [name, value] : red.residuals)
    out << "residual " << name << " " << format_double(value) << "\n";
  out << "hash config " << red.config_hash << "\n";
  out << "hash data_excited " << red.data_hash_excited << "\n";
  out << "hash data_zero " << red.data_hash_zero << "\n";
  for (const std::string& n : red.notes) out << "note " << n << "\n";
  out << "dictionary " << red.dictionary.state_dim() << " "
      << red.dictionary.size() << "\n";
  for (const BasisFunction& b : red.dictionary.entries())
    out << basis_kind_name(b.kind) << " " << b.i << " " << b.j << "\n";
  write_matrix(out, "P", red.P);
  write_matrix(out, "H", red.H);
  write_matrix(out, "Q", red.Q);
  write_matrix(out, "Qbar", red.Qbar);
  write_matrix(out, "R1", red.R1);
  write_matrix(out, "R2", red.R2);
  write_matrix(out, "Ahat", red.Ahat);
  write_matrix(out, "Bhat", red.Bhat);
  write_matrix(out, "Chat", red.Chat);
  write_matrix(out, "Xi", red.Xi);
  write_matrix(out, "Psi", red.Psi);
  write_matrix(out, "G", red.G);
  write_matrix(out, "Bdata", red.Bdata);
  write_matrix(out, "Aest", red.Aest);
  write_matrix(out, "XplusQ", red.XplusQ);
  out << "end\n";
  require(out.good(), ErrorCode::Io, "write failed for " + path);
}

Reduction load_reduction(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::Io, "cannot read " + path);
  std::string line;
  std::getline(in, line);
  require(line == "romkit-reduction v1", ErrorCode::Io,
          path + " is not a reduction archive");

  Reduction red;
  std::map<std::string, MatrixXd*> mats = {
      {"P", &red.P},         {"H", &red.H},
      {"Q", &red.Q},         {"Qbar", &red.Qbar},
      {"R1", &red.R1},       {"R2", &red.R2},
      {"Ahat", &red.Ahat},   {"Bhat", &red.Bhat},
      {"Chat", &red.Chat},   {"Xi", &red.Xi},
      {"Psi", &red.Psi},     {"G", &red.G},
      {"Bdata", &red.Bdata}, {"Aest", &red.Aest},
      {"XplusQ", &red.XplusQ}};
  std::map<std::string, double*> scalars = {
      {"alpha", &red.alpha},         {"kappa", &red.kappa},
      {"rho", &red.rho},             {"mu", &red.mu},
      {"kappa_hat", &red.kappa_hat}, {"gamma", &red.gamma},
      {"eta", &red.eta},             {"nu", &red.nu},
      {"lmi_margin", &red.lmi_margin}};

  while (std::getline(in, line)) {
    if (line == "end") break;
    std::stringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "time_kind") {
      std::string k;
      ss >> k;
      red.time_kind = k == "ct" ? TimeKind::Continuous : TimeKind::Discrete;
    } else if (tag == "dims") {
      ss >> red.n >> red.m >> red.d >> red.nhat >> red.mhat >> red.T;
    } else if (tag == "scalar") {
      std::string name;
      double v;
      ss >> name >> v;
      if (scalars.count(name)) *scalars[name] = v;
    } else if (tag == "residual") {
      std::string name;
      double v;
      ss >> name >> v;
      red.residuals[name] = v;
    } else if (tag == "hash") {
      std::string which, v;
      ss >> which >> v;
      if (which == "config") red.config_hash = v;
      if (which == "data_excited") red.data_hash_excited = v;
      if (which == "data_zero") red.data_hash_zero = v;
    } else if (tag == "note") {
      red.notes.push_back(line.substr(5));
    } else if (tag == "dictionary") {
      int n = 0, count = 0;
      ss >> n >> count;
      std::vector<BasisFunction> entries;
      for (int k = 0; k < count; ++k) {
        require(static_cast<bool>(std::getline(in, line)), ErrorCode::Io,
                "truncated dictionary block");
        std::stringstream es(line);
        std::string kind;
        BasisFunction b{};
        es >> kind >> b.i >> b.j;
        b.kind = basis_kind_from_name(kind);
        entries.push_back(b);
      }
      red.dictionary = DictionarySpec(n, std::move(entries));
    } else if (tag == "matrix") {
      std::string name;
      int rows = 0, cols = 0;
      ss >> name >> rows >> cols;
      MatrixXd m(rows, cols);
      for (int r = 0; r < rows; ++r) {
        require(static_cast<bool>(std::getline(in, line)), ErrorCode::Io,
                "truncated matrix block " + name);
        std::stringstream rs(line);
        for (int c = 0; c < cols; ++c) rs >> m(r, c);
      }
      auto it = mats.find(name);
      require(it != mats.end(), ErrorCode::Io, "unknown matrix " + name);
      *it->second = m;
    }
  }
  return red;
}

}  // namespace romkit
