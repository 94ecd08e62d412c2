#include "tsattack/lqr.hpp"

#include "tsattack/errors.hpp"

#include <cmath>
#include <string>

namespace tsattack {

namespace {

void require_spd(const Matrix& m, const char* name) {
  if (m.rows() != m.cols()) {
    throw ConfigError(std::string(name) + " must be square");
  }
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw ConfigError(std::string(name) + " must be symmetric");
  }
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) {
    throw ConfigError(std::string(name) + " must be positive definite");
  }
}

void require_len(const Timeseries& s, Eigen::Index expected, const char* what) {
  if (s.size() != expected) {
    throw ContractError(std::string(what) + ": series length " +
                        std::to_string(s.size()) + ", expected " +
                        std::to_string(expected));
  }
}

}  // namespace

Timeseries::Timeseries(Vector values) : values_(std::move(values)) {
  if (!values_.allFinite()) {
    throw ContractError("timeseries contains non-finite values");
  }
}

void SystemSpec::validate() const {
  const auto n = A.rows();
  if (n == 0 || A.cols() != n) throw ConfigError("A must be square and non-empty");
  if (B.rows() != n || B.cols() == 0) throw ConfigError("B must be n x m with m >= 1");
  if (C.rows() != n || C.cols() == 0) throw ConfigError("C must be n x p with p >= 1");
  if (Q.rows() != n) throw ConfigError("Q must be n x n");
  if (R.rows() != B.cols()) throw ConfigError("R must be m x m");
  if (x0.size() != n) throw ConfigError("x0 must have length n");
  if (horizon < 1) throw ConfigError("horizon must be >= 1");
  if (!A.allFinite() || !B.allFinite() || !C.allFinite() || !x0.allFinite()) {
    throw ConfigError("system matrices must be finite");
  }
  require_spd(Q, "Q");
  require_spd(R, "R");
}

SystemSpec SystemSpec::scalar(double a, double b, double c, double q, double r,
                              int horizon, double x0) {
  SystemSpec spec;
  spec.A = Matrix::Constant(1, 1, a);
  spec.B = Matrix::Constant(1, 1, b);
  spec.C = Matrix::Constant(1, 1, c);
  spec.Q = Matrix::Constant(1, 1, q);
  spec.R = Matrix::Constant(1, 1, r);
  spec.horizon = horizon;
  spec.x0 = Vector::Constant(1, x0);
  return spec;
}

BatchForm stack_dynamics(const SystemSpec& spec) {
  spec.validate();
  const auto n = spec.state_dim();
  const auto m = spec.action_dim();
  const auto p = spec.series_dim();
  const int T = spec.horizon;

  BatchForm batch;
  batch.M.reserve(T);
  batch.N.reserve(T);
  batch.A_pow.reserve(T);

  // M_t = [A^t B, A^{t-1} B, ..., B, 0 ...]; row block t of M is built from
  // row block t-1 by left-multiplying with A and appending B.
  Matrix m_prev = Matrix::Zero(n, m * T);
  Matrix n_prev = Matrix::Zero(n, p * T);
  Matrix a_pow = spec.A;
  for (int t = 0; t < T; ++t) {
    Matrix m_t = spec.A * m_prev;
    Matrix n_t = spec.A * n_prev;
    m_t.middleCols(t * m, m) = spec.B;
    n_t.middleCols(t * p, p) = spec.C;
    batch.M.push_back(m_t);
    batch.N.push_back(n_t);
    batch.A_pow.push_back(a_pow);
    m_prev = std::move(m_t);
    n_prev = std::move(n_t);
    a_pow = spec.A * a_pow;
  }
  return batch;
}

void build_cost_form(const SystemSpec& spec, BatchForm& batch) {
  spec.validate();
  const auto m = spec.action_dim();
  const int T = spec.horizon;
  if (static_cast<int>(batch.M.size()) != T) {
    throw ContractError("build_cost_form: stack_dynamics has not been run");
  }
  const auto mT = spec.action_len();
  const auto pT = spec.series_len();

  batch.K = Matrix::Zero(mT, mT);
  for (int t = 0; t < T; ++t) batch.K.block(t * m, t * m, m, m) = spec.R;
  batch.L = Matrix::Zero(mT, pT);
  batch.k_const = Vector::Zero(mT);
  for (int t = 0; t < T; ++t) {
    const Matrix qm = spec.Q * batch.M[t];
    batch.K.noalias() += batch.M[t].transpose() * qm;
    batch.L.noalias() += qm.transpose() * batch.N[t];
    batch.k_const.noalias() += qm.transpose() * (batch.A_pow[t] * spec.x0);
  }
  const Matrix k_sum = batch.K + batch.K.transpose();
  batch.K = 0.5 * k_sum;
  batch.k_lin = batch.L;

  batch.K_chol.compute(batch.K);
  if (batch.K_chol.info() != Eigen::Success) {
    throw ConfigError("K is not positive definite; check R");
  }
  // Psi = L' K^{-1} L = (G^{-1} L)' (G^{-1} L) with K = G G'.
  const Matrix half = batch.K_chol.matrixL().solve(batch.L);
  const Matrix gram = half.transpose() * half;
  batch.Psi = 0.5 * (gram + gram.transpose());
}

BatchForm make_batch_form(const SystemSpec& spec) {
  BatchForm batch = stack_dynamics(spec);
  build_cost_form(spec, batch);
  return batch;
}

Vector linear_term(const BatchForm& batch, const Timeseries& s) {
  require_len(s, batch.series_len(), "linear_term");
  return batch.k_const + batch.k_lin * s.values();
}

Vector solve_unconstrained(const BatchForm& batch, const Timeseries& s) {
  return -batch.K_chol.solve(linear_term(batch, s));
}

double rollout_cost(const SystemSpec& spec, const Vector& u,
                    const Timeseries& s_real) {
  const auto m = spec.action_dim();
  const auto p = spec.series_dim();
  if (u.size() != spec.action_len()) {
    throw ContractError("rollout_cost: action length " + std::to_string(u.size()) +
                        ", expected " + std::to_string(spec.action_len()));
  }
  require_len(s_real, spec.series_len(), "rollout_cost");

  Vector x = spec.x0;
  double cost = x.dot(spec.Q * x);
  for (int t = 0; t < spec.horizon; ++t) {
    const auto u_t = u.segment(t * m, m);
    cost += u_t.dot(spec.R * u_t);
    x = spec.A * x + spec.B * u_t + spec.C * s_real.values().segment(t * p, p);
    cost += x.dot(spec.Q * x);
  }
  return cost;
}

Vector action_gap(const BatchForm& batch, const Timeseries& s_hat,
                  const Timeseries& s) {
  require_len(s_hat, batch.series_len(), "action_gap");
  require_len(s, batch.series_len(), "action_gap");
  return -batch.K_chol.solve(batch.L * (s_hat.values() - s.values()));
}

double cost_delta_quadratic(const BatchForm& batch, const Timeseries& s_hat,
                            const Timeseries& s) {
  require_len(s_hat, batch.series_len(), "cost_delta_quadratic");
  require_len(s, batch.series_len(), "cost_delta_quadratic");
  const Vector d = s_hat.values() - s.values();
  return d.dot(batch.Psi * d);
}

}  // namespace tsattack
