#pragma once

#include "tsattack/lqr.hpp"

#include <optional>
#include <vector>

namespace tsattack {

/// Elementwise bounds. Either side may be +/-infinity; rows for infinite
/// sides are not emitted. Length is either the per-step dimension (broadcast
/// over the horizon) or the full stacked length.
struct BoxBounds {
  Vector lower;
  Vector upper;

  static BoxBounds symmetric(double half_width, Eigen::Index dim = 1);
};

enum class RowKind { ActionUpper, ActionLower, StateUpper, StateLower };

/// Affine feasible set G u <= h0 + H s_obs. Only state-box rows depend on the
/// observed series; action-box rows have zero H.
struct ConstraintSet {
  Matrix G;   // q x mT
  Vector h0;  // q
  Matrix H;   // q x pT
  std::vector<RowKind> kinds;

  Eigen::Index rows() const { return G.rows(); }
  Vector rhs(const Timeseries& s_obs) const;

  static ConstraintSet none(Eigen::Index action_len, Eigen::Index series_len);
};

/// Builds action-box and state-box rows. State rows bound x_1..x_T through
/// x_{t+1} = A^{t+1} x0 + M_t u + N_t s, so their right-hand side moves with
/// the series the controller observes. Throws ConfigError if lower > upper.
ConstraintSet compile_constraints(const SystemSpec& spec, const BatchForm& batch,
                                  const std::optional<BoxBounds>& action_box,
                                  const std::optional<BoxBounds>& state_box);

enum class QpStatus { Optimal, Infeasible };

struct QpSolution {
  Vector u;
  Vector mu;                 // one multiplier per constraint row, >= 0
  std::vector<int> active;   // rows with G_i u = rhs_i within tol_act
  QpStatus status = QpStatus::Optimal;
  bool weakly_active = false;  // some active row has mu_i < 1e-9
  double objective = 0.0;      // u' K u + 2 k' u
  int iterations = 0;

  bool optimal() const { return status == QpStatus::Optimal; }
};

/// Minimizes u' K u + 2 k(x0, s_obs)' u subject to G u <= h0 + H s_obs.
///
/// Dual active-set method started from the unconstrained minimizer: the most
/// violated row is added each outer iteration and rows whose multiplier would
/// turn negative are dropped. A violated row that is linearly dependent on
/// the working set with nothing left to drop certifies infeasibility. The
/// final point is re-solved on its working set so stationarity holds to
/// rounding.
QpSolution solve_qp(const BatchForm& batch, const ConstraintSet& cons,
                    const Timeseries& s_obs);

double activity_tolerance(double rhs_i);

/// KKT residuals of a solution; `scale` normalizes all four.
struct KktResiduals {
  double stationarity = 0.0;     // ||2Ku + 2k + G' mu||_inf
  double primal = 0.0;           // max(G u - rhs)_+
  double complementarity = 0.0;  // max |mu_i (G_i u - rhs_i)|
  double dual = 0.0;             // max(-mu)_+
  double scale = 1.0;

  bool within(double stat_tol = 1e-8, double primal_tol = 1e-9,
              double comp_tol = 1e-8, double dual_tol = 1e-12) const {
    return stationarity <= stat_tol * scale && primal <= primal_tol * scale &&
           complementarity <= comp_tol * scale && dual <= dual_tol * scale;
  }
};

KktResiduals kkt_residuals(const BatchForm& batch, const ConstraintSet& cons,
                           const Timeseries& s_obs, const QpSolution& sol);

}  // namespace tsattack
