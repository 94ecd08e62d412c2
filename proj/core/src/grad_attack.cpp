#include "tsattack/grad_attack.hpp"

#include "tsattack/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tsattack {

TargetKind parse_target(std::string_view name) {
  if (name == "max-action") return TargetKind::MaxAction;
  if (name == "min-action") return TargetKind::MinAction;
  if (name == "l1") return TargetKind::L1Energy;
  if (name == "cost") return TargetKind::CostChange;
  throw ConfigError("unknown target '" + std::string(name) +
                    "' (expected max-action, min-action, l1 or cost)");
}

std::string to_string(TargetKind kind) {
  switch (kind) {
    case TargetKind::MaxAction: return "max-action";
    case TargetKind::MinAction: return "min-action";
    case TargetKind::L1Energy: return "l1";
    case TargetKind::CostChange: return "cost";
  }
  return "unknown";
}

double TargetFunction::value(const Vector& u, const BatchForm& batch,
                             const Timeseries& s_real) const {
  switch (kind) {
    case TargetKind::MaxAction: return u.maxCoeff();
    case TargetKind::MinAction: return -u.minCoeff();
    case TargetKind::L1Energy: return u.lpNorm<1>();
    case TargetKind::CostChange:
      return u.dot(batch.K * u) + 2.0 * linear_term(batch, s_real).dot(u);
  }
  return 0.0;
}

namespace {

// Picks an independent subset of the active rows. Rows carrying a positive
// multiplier are considered first so a weakly active duplicate is the one
// dropped.
std::vector<int> independent_active_rows(const BatchForm& batch, const ConstraintSet& cons,
                                         const QpSolution& sol) {
  std::vector<int> order = sol.active;
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return (sol.mu[a] > 0.0) > (sol.mu[b] > 0.0); });

  std::vector<int> picked;
  std::vector<Vector> hinv_rows;  // K^{-1} G_i'
  for (int i : order) {
    const Vector gi = cons.G.row(i).transpose();
    const Vector di = batch.K_chol.solve(gi);
    const double diag = gi.dot(di);
    const auto w = static_cast<Eigen::Index>(picked.size());
    double pivot = diag;
    if (w > 0) {
      Matrix S(w, w);
      Vector cross(w);
      for (Eigen::Index a = 0; a < w; ++a) {
        cross[a] = cons.G.row(picked[a]).dot(di);
        for (Eigen::Index b = 0; b <= a; ++b) {
          S(a, b) = S(b, a) = cons.G.row(picked[a]).dot(hinv_rows[b]);
        }
      }
      pivot = diag - cross.dot(S.ldlt().solve(cross));
    }
    if (pivot > 1e-10 * diag) {
      picked.push_back(i);
      hinv_rows.push_back(di);
    }
  }
  return picked;
}

}  // namespace

SolutionJacobian solution_jacobian(const BatchForm& batch, const ConstraintSet& cons,
                                   const QpSolution& sol) {
  if (!sol.optimal()) {
    throw ContractError("solution_jacobian: solution is not optimal");
  }
  SolutionJacobian out;
  out.weak_active_flag = sol.weakly_active;

  // Free response: du = -K^{-1} L ds. Active rows G_A u = h0_A + H_A s add
  //   du = -P ds + K^{-1} G_A' S^{-1} (H_A + G_A P) ds,  S = G_A K^{-1} G_A',
  // with P = K^{-1} L. The factor 2 of the Hessian cancels throughout.
  const Matrix P = batch.K_chol.solve(batch.L);
  Matrix D = -P;
  const std::vector<int> rows = independent_active_rows(batch, cons, sol);
  if (!rows.empty()) {
    const auto w = static_cast<Eigen::Index>(rows.size());
    Matrix GA(w, batch.action_len());
    Matrix HA(w, batch.series_len());
    for (Eigen::Index a = 0; a < w; ++a) {
      GA.row(a) = cons.G.row(rows[a]);
      HA.row(a) = cons.H.row(rows[a]);
    }
    const Matrix KinvGt = batch.K_chol.solve(GA.transpose());
    const Matrix S = GA * KinvGt;
    const Matrix coupling = S.ldlt().solve(HA + GA * P);
    D.noalias() += KinvGt * coupling;
  }
  out.J = D.transpose();
  return out;
}

SolutionJacobian finite_difference_jacobian(const BatchForm& batch,
                                            const ConstraintSet& cons,
                                            const Timeseries& s_obs, double step) {
  if (!(step > 0.0)) throw ContractError("finite_difference_jacobian: step must be > 0");
  const auto pT = batch.series_len();
  SolutionJacobian out;
  out.J.resize(pT, batch.action_len());
  const QpSolution base = solve_qp(batch, cons, s_obs);
  out.weak_active_flag = base.optimal() && base.weakly_active;
  for (Eigen::Index i = 0; i < pT; ++i) {
    Vector plus = s_obs.values();
    Vector minus = s_obs.values();
    plus[i] += step;
    minus[i] -= step;
    const QpSolution up = solve_qp(batch, cons, Timeseries(plus));
    const QpSolution down = solve_qp(batch, cons, Timeseries(minus));
    if (!up.optimal() || !down.optimal()) {
      throw NumericalError("finite_difference_jacobian: perturbed solve infeasible at coordinate " +
                           std::to_string(i));
    }
    out.J.row(i) = ((up.u - down.u) / (2.0 * step)).transpose();
  }
  return out;
}

Vector target_gradient(const TargetFunction& target, const Vector& u,
                       const BatchForm& batch, const Timeseries& s_real) {
  Vector g = Vector::Zero(u.size());
  if (u.size() == 0) return g;
  switch (target.kind) {
    case TargetKind::MaxAction: {
      Eigen::Index arg = 0;
      for (Eigen::Index i = 1; i < u.size(); ++i) {
        if (u[i] > u[arg]) arg = i;
      }
      g[arg] = 1.0;
      break;
    }
    case TargetKind::MinAction: {
      Eigen::Index arg = 0;
      for (Eigen::Index i = 1; i < u.size(); ++i) {
        if (u[i] < u[arg]) arg = i;
      }
      g[arg] = -1.0;
      break;
    }
    case TargetKind::L1Energy:
      for (Eigen::Index i = 0; i < u.size(); ++i) {
        g[i] = u[i] > 0.0 ? 1.0 : (u[i] < 0.0 ? -1.0 : 0.0);
      }
      break;
    case TargetKind::CostChange:
      g = 2.0 * (batch.K * u) + 2.0 * linear_term(batch, s_real);
      break;
  }
  return g;
}

Vector unit(const Vector& v) {
  const double n = v.norm();
  if (n <= 1e-12) return Vector::Zero(v.size());
  return v / n;
}

namespace {

struct Direction {
  Vector dir;
  bool zero = false;
  bool weak = false;
};

// J g at s_obs. The zero test is relative to the magnitude of the terms that
// make up g, so a gradient that vanishes only up to rounding (the cost
// target at its own optimum) is recognised as zero.
Direction ascent_direction(const BatchForm& batch, const ConstraintSet& cons,
                           const QpSolution& sol, const Timeseries& s_real,
                           const TargetFunction& target) {
  const SolutionJacobian jac = solution_jacobian(batch, cons, sol);
  const Vector g = target_gradient(target, sol.u, batch, s_real);
  Direction d;
  d.weak = jac.weak_active_flag;
  d.dir = jac.J * g;
  double g_scale = g.norm();
  if (target.kind == TargetKind::CostChange) {
    g_scale = 2.0 * (batch.K * sol.u).norm() + 2.0 * linear_term(batch, s_real).norm();
  }
  const double threshold = 1e-12 * std::max(1.0, jac.J.norm() * g_scale);
  d.zero = d.dir.norm() <= threshold;
  return d;
}

double attained_value(const TargetFunction& target, const Vector& u, const BatchForm& batch,
                      const Timeseries& s_real, double baseline) {
  const double v = target.value(u, batch, s_real);
  return target.kind == TargetKind::CostChange ? v - baseline : v;
}

AttackResult evaluate(const BatchForm& batch, const ConstraintSet& cons,
                      const Timeseries& s, const Vector& s_hat, double delta,
                      const TargetFunction& target, double baseline,
                      QpSolution* solved = nullptr) {
  AttackResult r;
  r.s_hat = Timeseries(s_hat);
  r.delta = delta;
  r.norm_used = (s_hat - s.values()).norm();
  QpSolution sol = solve_qp(batch, cons, r.s_hat);
  if (solved) *solved = sol;
  if (!sol.optimal()) {
    r.attained = std::numeric_limits<double>::infinity();
    r.flags.insert(AttackFlag::Infeasible);
    return r;
  }
  r.attained = attained_value(target, sol.u, batch, s, baseline);
  return r;
}

QpSolution solve_base(const BatchForm& batch, const ConstraintSet& cons, const Timeseries& s) {
  QpSolution base = solve_qp(batch, cons, s);
  if (!base.optimal()) {
    throw ContractError("attack: controller problem is infeasible on the real series");
  }
  return base;
}

}  // namespace

AttackResult single_step_attack(const BatchForm& batch, const ConstraintSet& cons,
                                const Timeseries& s, double delta,
                                const TargetFunction& target) {
  if (delta < 0.0 || !std::isfinite(delta)) {
    throw ContractError("single_step_attack: delta must be finite and >= 0");
  }
  const QpSolution base = solve_base(batch, cons, s);
  const double baseline = target.value(base.u, batch, s);

  AttackResult unchanged;
  unchanged.s_hat = s;
  unchanged.delta = delta;
  unchanged.attained = attained_value(target, base.u, batch, s, baseline);
  if (delta == 0.0) return unchanged;

  const Direction d = ascent_direction(batch, cons, base, s, target);
  if (d.zero) {
    unchanged.flags.insert(AttackFlag::ZeroGradient);
    if (d.weak) unchanged.flags.insert(AttackFlag::WeaklyActive);
    return unchanged;
  }
  AttackResult r = evaluate(batch, cons, s, s.values() + delta * unit(d.dir), delta, target,
                            baseline);
  if (d.weak) r.flags.insert(AttackFlag::WeaklyActive);
  return r;
}

AttackResult iterated_attack(const BatchForm& batch, const ConstraintSet& cons,
                             const Timeseries& s, double delta,
                             const TargetFunction& target, const IteratedOptions& options) {
  if (options.steps < 1) throw ContractError("iterated_attack: steps must be >= 1");
  AttackResult best = single_step_attack(batch, cons, s, delta, target);
  if (delta == 0.0 || best.has(AttackFlag::Infeasible)) return best;

  const QpSolution base = solve_base(batch, cons, s);
  const double baseline = target.value(base.u, batch, s);
  const double step = options.step_size > 0.0 ? options.step_size : delta / 10.0;

  Vector current = s.values();
  QpSolution sol = base;
  bool weak_seen = best.has(AttackFlag::WeaklyActive);
  for (int it = 0; it < options.steps; ++it) {
    const Direction d = ascent_direction(batch, cons, sol, s, target);
    weak_seen = weak_seen || d.weak;
    if (d.zero) break;
    Vector offset = current + step * unit(d.dir) - s.values();
    const double norm = offset.norm();
    if (norm > delta) offset *= delta / norm;
    current = s.values() + offset;

    AttackResult candidate = evaluate(batch, cons, s, current, delta, target, baseline, &sol);
    if (candidate.has(AttackFlag::Infeasible)) {
      best = std::move(candidate);
      break;
    }
    if (candidate.attained > best.attained) best = std::move(candidate);
  }
  if (weak_seen) best.flags.insert(AttackFlag::WeaklyActive);
  return best;
}

}  // namespace tsattack
