#include "tsattack/qp.hpp"

#include "tsattack/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace tsattack {

BoxBounds BoxBounds::symmetric(double half_width, Eigen::Index dim) {
  return BoxBounds{Vector::Constant(dim, -half_width), Vector::Constant(dim, half_width)};
}

Vector ConstraintSet::rhs(const Timeseries& s_obs) const {
  if (s_obs.size() != H.cols()) {
    throw ContractError("ConstraintSet::rhs: series length mismatch");
  }
  return h0 + H * s_obs.values();
}

ConstraintSet ConstraintSet::none(Eigen::Index action_len, Eigen::Index series_len) {
  ConstraintSet c;
  c.G = Matrix::Zero(0, action_len);
  c.h0 = Vector::Zero(0);
  c.H = Matrix::Zero(0, series_len);
  return c;
}

namespace {

// Expands per-step bounds to the stacked length; rejects inverted bounds.
std::pair<Vector, Vector> expand(const BoxBounds& box, Eigen::Index step_dim,
                                 int horizon, const char* what) {
  const auto full = step_dim * horizon;
  if (box.lower.size() != box.upper.size()) {
    throw ConfigError(std::string(what) + ": lower/upper lengths differ");
  }
  Vector lo(full), hi(full);
  if (box.lower.size() == step_dim) {
    for (int t = 0; t < horizon; ++t) {
      lo.segment(t * step_dim, step_dim) = box.lower;
      hi.segment(t * step_dim, step_dim) = box.upper;
    }
  } else if (box.lower.size() == full) {
    lo = box.lower;
    hi = box.upper;
  } else {
    throw ConfigError(std::string(what) + ": bounds must have length " +
                      std::to_string(step_dim) + " or " + std::to_string(full));
  }
  for (Eigen::Index i = 0; i < full; ++i) {
    if (std::isnan(lo[i]) || std::isnan(hi[i]) || lo[i] > hi[i]) {
      throw ConfigError(std::string(what) + ": lower bound exceeds upper bound at index " +
                        std::to_string(i));
    }
  }
  return {lo, hi};
}

struct RowBuilder {
  std::vector<Vector> g, h;
  std::vector<double> h0;
  std::vector<RowKind> kinds;

  void add(Vector g_row, double rhs, Vector h_row, RowKind kind) {
    g.push_back(std::move(g_row));
    h0.push_back(rhs);
    h.push_back(std::move(h_row));
    kinds.push_back(kind);
  }
};

}  // namespace

ConstraintSet compile_constraints(const SystemSpec& spec, const BatchForm& batch,
                                  const std::optional<BoxBounds>& action_box,
                                  const std::optional<BoxBounds>& state_box) {
  const auto mT = batch.action_len();
  const auto pT = batch.series_len();
  const auto n = spec.state_dim();
  RowBuilder rows;

  if (action_box) {
    const auto [lo, hi] = expand(*action_box, spec.action_dim(), spec.horizon, "action box");
    for (Eigen::Index i = 0; i < mT; ++i) {
      if (std::isfinite(hi[i])) {
        rows.add(Vector::Unit(mT, i), hi[i], Vector::Zero(pT), RowKind::ActionUpper);
      }
      if (std::isfinite(lo[i])) {
        rows.add(-Vector::Unit(mT, i), -lo[i], Vector::Zero(pT), RowKind::ActionLower);
      }
    }
  }

  if (state_box) {
    const auto [lo, hi] = expand(*state_box, n, spec.horizon, "state box");
    for (int t = 0; t < spec.horizon; ++t) {
      const Vector drift = batch.A_pow[t] * spec.x0;
      for (Eigen::Index j = 0; j < n; ++j) {
        const auto idx = t * n + j;
        // x_{t+1,j} = drift_j + M_t(j,:) u + N_t(j,:) s
        if (std::isfinite(hi[idx])) {
          rows.add(batch.M[t].row(j).transpose(), hi[idx] - drift[j],
                   -batch.N[t].row(j).transpose(), RowKind::StateUpper);
        }
        if (std::isfinite(lo[idx])) {
          rows.add(-batch.M[t].row(j).transpose(), drift[j] - lo[idx],
                   batch.N[t].row(j).transpose(), RowKind::StateLower);
        }
      }
    }
  }

  ConstraintSet cons = ConstraintSet::none(mT, pT);
  const auto q = static_cast<Eigen::Index>(rows.g.size());
  cons.G.resize(q, mT);
  cons.h0.resize(q);
  cons.H.resize(q, pT);
  for (Eigen::Index i = 0; i < q; ++i) {
    cons.G.row(i) = rows.g[i].transpose();
    cons.h0[i] = rows.h0[i];
    cons.H.row(i) = rows.h[i].transpose();
  }
  cons.kinds = std::move(rows.kinds);
  return cons;
}

double activity_tolerance(double rhs_i) { return 1e-9 * (1.0 + std::abs(rhs_i)); }

namespace {

constexpr double kWeakDual = 1e-9;

// State of the dual active-set iteration. The Hessian of the objective is
// 2K; products with its inverse go through the Cholesky factor of K.
class DualActiveSet {
 public:
  DualActiveSet(const BatchForm& batch, const Matrix& G, const Vector& rhs, const Vector& c)
      : batch_(batch), G_(G), rhs_(rhs), c_(c), hinv_g_(G.rows()) {}

  QpSolution run();

 private:
  Vector hinv(const Vector& v) const { return 0.5 * batch_.K_chol.solve(v); }

  const Vector& hinv_row(int i) {
    auto& slot = hinv_g_[static_cast<std::size_t>(i)];
    if (!slot) slot = hinv(G_.row(i).transpose());
    return *slot;
  }

  Matrix schur() {
    const auto w = static_cast<Eigen::Index>(working_.size());
    Matrix S(w, w);
    for (Eigen::Index a = 0; a < w; ++a) {
      const Vector& da = hinv_row(working_[a]);
      for (Eigen::Index b = 0; b <= a; ++b) {
        S(a, b) = S(b, a) = G_.row(working_[b]).dot(da);
      }
    }
    return S;
  }

  void drop(Eigen::Index pos) {
    working_.erase(working_.begin() + pos);
    const auto w = static_cast<Eigen::Index>(working_.size());
    Vector rest(w);
    rest.head(pos) = mu_w_.head(pos);
    rest.tail(w - pos) = mu_w_.tail(w - pos);
    mu_w_ = rest;
  }

  bool polish();

  const BatchForm& batch_;
  const Matrix& G_;
  const Vector& rhs_;
  const Vector& c_;
  std::vector<std::optional<Vector>> hinv_g_;
  std::vector<int> working_;
  Vector mu_w_;
  Vector u_;
};

bool DualActiveSet::polish() {
  const auto w = static_cast<Eigen::Index>(working_.size());
  const Vector hinv_c = hinv(c_);
  if (w == 0) {
    u_ = -hinv_c;
    return true;
  }
  const Matrix S = schur();
  Vector b(w);
  for (Eigen::Index a = 0; a < w; ++a) {
    b[a] = rhs_[working_[a]] + G_.row(working_[a]).dot(hinv_c);
  }
  Eigen::LDLT<Matrix> ldlt(S);
  if (ldlt.info() != Eigen::Success) return false;
  Vector mu = -ldlt.solve(b);
  if (!mu.allFinite()) return false;
  const double mu_scale = 1.0 + mu.cwiseAbs().maxCoeff();
  if (mu.minCoeff() < -1e-9 * mu_scale) return false;
  mu = mu.cwiseMax(0.0);
  Vector gtmu = Vector::Zero(c_.size());
  for (Eigen::Index a = 0; a < w; ++a) gtmu += mu[a] * G_.row(working_[a]).transpose();
  u_ = -hinv(c_ + gtmu);
  mu_w_ = mu;
  return true;
}

QpSolution DualActiveSet::run() {
  const auto q = G_.rows();
  QpSolution sol;
  u_ = -hinv(c_);
  mu_w_.resize(0);
  const int max_iter = static_cast<int>(10 * (q + c_.size()) + 100);
  int iter = 0;

  auto violation = [&](int i) {
    return (G_.row(i).dot(u_) - rhs_[i]) / std::max(G_.row(i).norm(), 1e-300);
  };

  for (;;) {
    int p = -1;
    double worst = 0.0;
    for (int i = 0; i < q; ++i) {
      if (std::find(working_.begin(), working_.end(), i) != working_.end()) continue;
      const double v = violation(i);
      if (v > activity_tolerance(rhs_[i]) * 1e-2 && v > worst) {
        worst = v;
        p = i;
      }
    }
    if (p < 0) break;

    double mu_p = 0.0;
    for (;;) {
      if (++iter > max_iter) {
        throw NumericalError("solve_qp: active-set iteration limit reached");
      }
      const Vector& d_p = hinv_row(p);
      const auto w = static_cast<Eigen::Index>(working_.size());
      Vector r = Vector::Zero(w);
      Vector z = -d_p;
      if (w > 0) {
        Vector rhs_r(w);
        for (Eigen::Index a = 0; a < w; ++a) rhs_r[a] = G_.row(working_[a]).dot(d_p);
        Eigen::LDLT<Matrix> ldlt(schur());
        r = -ldlt.solve(rhs_r);
        for (Eigen::Index a = 0; a < w; ++a) z -= r[a] * hinv_row(working_[a]);
      }
      const double gz = G_.row(p).dot(z);  // <= 0
      const double curvature = G_.row(p).dot(d_p);
      const bool dependent = -gz <= 1e-11 * curvature;

      double t_dual = std::numeric_limits<double>::infinity();
      Eigen::Index block = -1;
      for (Eigen::Index a = 0; a < w; ++a) {
        if (r[a] < 0.0) {
          const double t = mu_w_[a] / -r[a];
          if (t < t_dual) {
            t_dual = t;
            block = a;
          }
        }
      }

      if (dependent) {
        if (block < 0) {
          sol.status = QpStatus::Infeasible;
          sol.u = u_;
          sol.mu = Vector::Zero(q);
          sol.iterations = iter;
          return sol;
        }
        mu_w_ += t_dual * r;
        mu_p += t_dual;
        drop(block);
        continue;
      }

      const double t_primal = (G_.row(p).dot(u_) - rhs_[p]) / -gz;
      const double t = std::min(t_primal, t_dual);
      u_ += t * z;
      mu_w_ += t * r;
      mu_p += t;
      if (t_primal <= t_dual) {
        working_.push_back(p);
        mu_w_.conservativeResize(w + 1);
        mu_w_[w] = mu_p;
        break;
      }
      mu_w_[block] = 0.0;
      drop(block);
    }
  }

  // A singular working-set system keeps the unpolished iterate.
  polish();
  sol.status = QpStatus::Optimal;
  sol.u = u_;
  sol.mu = Vector::Zero(q);
  for (std::size_t a = 0; a < working_.size(); ++a) {
    sol.mu[working_[a]] = std::max(mu_w_[static_cast<Eigen::Index>(a)], 0.0);
  }
  sol.iterations = iter;
  return sol;
}

}  // namespace

QpSolution solve_qp(const BatchForm& batch, const ConstraintSet& cons,
                    const Timeseries& s_obs) {
  if (cons.G.cols() != batch.action_len() || cons.H.cols() != batch.series_len() ||
      cons.h0.size() != cons.G.rows() || cons.H.rows() != cons.G.rows()) {
    throw ContractError("solve_qp: constraint set does not match the batch form");
  }
  const Vector k = linear_term(batch, s_obs);
  const Vector rhs = cons.rhs(s_obs);
  const Vector c = 2.0 * k;

  DualActiveSet solver(batch, cons.G, rhs, c);
  QpSolution sol = solver.run();
  sol.objective = sol.u.dot(batch.K * sol.u) + 2.0 * k.dot(sol.u);
  if (!sol.optimal()) return sol;

  for (Eigen::Index i = 0; i < cons.rows(); ++i) {
    const double slack = rhs[i] - cons.G.row(i).dot(sol.u);
    if (std::abs(slack) <= activity_tolerance(rhs[i])) {
      sol.active.push_back(static_cast<int>(i));
      if (sol.mu[i] < kWeakDual) sol.weakly_active = true;
    }
  }
  return sol;
}

KktResiduals kkt_residuals(const BatchForm& batch, const ConstraintSet& cons,
                           const Timeseries& s_obs, const QpSolution& sol) {
  const Vector k = linear_term(batch, s_obs);
  const Vector rhs = cons.rhs(s_obs);
  KktResiduals r;
  Vector grad = 2.0 * (batch.K * sol.u) + 2.0 * k;
  if (cons.rows() > 0) grad += cons.G.transpose() * sol.mu;
  r.stationarity = grad.cwiseAbs().maxCoeff();
  r.scale = 1.0 + 2.0 * k.cwiseAbs().maxCoeff() +
            2.0 * (batch.K * sol.u).cwiseAbs().maxCoeff();
  if (cons.rows() > 0) {
    const Vector gap = cons.G * sol.u - rhs;
    r.primal = std::max(gap.maxCoeff(), 0.0);
    r.complementarity = sol.mu.cwiseProduct(gap).cwiseAbs().maxCoeff();
    r.dual = std::max(-sol.mu.minCoeff(), 0.0);
    r.scale += rhs.cwiseAbs().maxCoeff() + (cons.G.transpose() * sol.mu).cwiseAbs().maxCoeff();
  }
  return r;
}

}  // namespace tsattack
