#pragma once

#include "tsattack/cost_attack.hpp"
#include "tsattack/qp.hpp"

#include <string>
#include <string_view>

namespace tsattack {

/// d u* / d s_obs of the constrained controller. Entry (i, j) is the
/// sensitivity of action j to series element i (pT x mT).
struct SolutionJacobian {
  Matrix J;
  bool weak_active_flag = false;
};

enum class TargetKind { MaxAction, MinAction, L1Energy, CostChange };

/// Parses max-action | min-action | l1 | cost.
TargetKind parse_target(std::string_view name);
std::string to_string(TargetKind kind);

/// Adversary objective h(u). For CostChange the value is the batch cost
/// u' K u + 2 k(x0, s_real)' u, i.e. the real-series cost without its
/// constant term; attack results report it as a difference to the
/// unattacked optimum.
struct TargetFunction {
  TargetKind kind = TargetKind::MaxAction;

  double value(const Vector& u, const BatchForm& batch, const Timeseries& s_real) const;
};

/// Implicit differentiation of the KKT system on the active set of `sol`.
/// Dependent active rows are reduced to an independent subset, rows with
/// positive multipliers first. Throws ContractError on an infeasible `sol`.
SolutionJacobian solution_jacobian(const BatchForm& batch, const ConstraintSet& cons,
                                   const QpSolution& sol);

/// Central differences with one pair of QP solves per series coordinate.
/// Throws NumericalError naming the coordinate if a perturbed solve is
/// infeasible.
SolutionJacobian finite_difference_jacobian(const BatchForm& batch,
                                            const ConstraintSet& cons,
                                            const Timeseries& s_obs,
                                            double step = 1e-6);

/// dh/du. MaxAction: one-hot at the first argmax. MinAction: minus one-hot at
/// the first argmin. L1Energy: sign(u) with sign(0) = 0. CostChange:
/// 2 K u + 2 k(x0, s_real).
Vector target_gradient(const TargetFunction& target, const Vector& u,
                       const BatchForm& batch, const Timeseries& s_real);

/// Scales v to unit L2 norm; returns zero for ||v|| <= 1e-12.
Vector unit(const Vector& v);

/// One first-order step: s_hat = s + delta Unit(J g) with J and g taken at
/// the unattacked optimum. A vanishing direction returns s unchanged with
/// AttackFlag::ZeroGradient. An infeasible attacked problem returns
/// attained = +inf with AttackFlag::Infeasible.
AttackResult single_step_attack(const BatchForm& batch, const ConstraintSet& cons,
                                const Timeseries& s, double delta,
                                const TargetFunction& target);

struct IteratedOptions {
  int steps = 20;
  double step_size = 0.0;  // <= 0 means delta / 10
};

/// Projected gradient ascent on the L2 ball of radius delta around s,
/// re-linearizing at every iterate. The best iterate by attained value is
/// returned; the single-step candidate is part of that pool.
AttackResult iterated_attack(const BatchForm& batch, const ConstraintSet& cons,
                             const Timeseries& s, double delta,
                             const TargetFunction& target,
                             const IteratedOptions& options = {});

}  // namespace tsattack
