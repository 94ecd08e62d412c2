#include "support.hpp"

#include "tsattack/errors.hpp"
#include "tsattack/grad_attack.hpp"

#include <gtest/gtest.h>

#include <limits>

using namespace tsattack;
using namespace tsattack::testing;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

BoxBounds box(double lo, double hi) {
  return BoxBounds{Vector::Constant(1, lo), Vector::Constant(1, hi)};
}

struct Problem {
  SystemSpec spec;
  BatchForm batch;
  ConstraintSet cons;
};

Problem scalar_problem(int horizon, std::optional<BoxBounds> action = std::nullopt,
                       std::optional<BoxBounds> state = std::nullopt) {
  Problem p{battery(horizon), {}, {}};
  p.batch = make_batch_form(p.spec);
  p.cons = compile_constraints(p.spec, p.batch, action, state);
  return p;
}

Vector vec(std::initializer_list<double> v) { return series(v).values(); }

}  // namespace

TEST(SolutionJacobian, UnconstrainedScalar) {
  const Problem p = scalar_problem(1);
  const QpSolution sol = solve_qp(p.batch, p.cons, series({0}));
  const SolutionJacobian jac = solution_jacobian(p.batch, p.cons, sol);
  EXPECT_NEAR(jac.J(0, 0), 0.5, 1e-15);
  EXPECT_FALSE(jac.weak_active_flag);
  const SolutionJacobian fd = finite_difference_jacobian(p.batch, p.cons, series({0}));
  EXPECT_NEAR(fd.J(0, 0), 0.5, 1e-8);
}

TEST(SolutionJacobian, ClampedScalarIsZero) {
  const Problem p = scalar_problem(1, box(-0.3, 0.3));
  const QpSolution sol = solve_qp(p.batch, p.cons, series({0}));
  EXPECT_EQ(solution_jacobian(p.batch, p.cons, sol).J(0, 0), 0.0);
  EXPECT_NEAR(finite_difference_jacobian(p.batch, p.cons, series({0})).J(0, 0), 0.0, 1e-6);
}

TEST(SolutionJacobian, AllClampedWithPositiveDualsIsZero) {
  const Problem p = scalar_problem(3, box(-0.05, 0.05));
  const Timeseries s = series({2, 2, 2});
  const QpSolution sol = solve_qp(p.batch, p.cons, s);
  ASSERT_EQ(sol.active.size(), 3u);
  EXPECT_LE(solution_jacobian(p.batch, p.cons, sol).J.cwiseAbs().maxCoeff(), 1e-14);
}

TEST(SolutionJacobian, ActiveStateBoundTracksTheSeries) {
  // x1 = 1 - u + s <= 0.2 binds, so u = 0.8 + s and du/ds = 1.
  const Problem p = scalar_problem(1, std::nullopt, box(-kInf, 0.2));
  const QpSolution sol = solve_qp(p.batch, p.cons, series({0}));
  ASSERT_EQ(sol.active.size(), 1u);
  EXPECT_NEAR(solution_jacobian(p.batch, p.cons, sol).J(0, 0), 1.0, 1e-14);
  EXPECT_NEAR(finite_difference_jacobian(p.batch, p.cons, series({0})).J(0, 0), 1.0, 1e-8);
}

TEST(SolutionJacobian, UnconstrainedEqualsAnalyticOnRandomSystems) {
  std::mt19937_64 rng(81);
  for (int trial = 0; trial < 30; ++trial) {
    const SystemSpec spec = random_system(rng, {});
    const BatchForm b = make_batch_form(spec);
    const Timeseries s = random_series(rng, b.series_len());
    const ConstraintSet none = ConstraintSet::none(b.action_len(), b.series_len());
    const SolutionJacobian jac = solution_jacobian(b, none, solve_qp(b, none, s));
    const Matrix analytic = (-b.K.inverse() * b.L).transpose();
    EXPECT_LE((jac.J - analytic).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_EQ(jac.J.rows(), b.series_len());
    EXPECT_EQ(jac.J.cols(), b.action_len());
  }
}

TEST(SolutionJacobian, MatchesFiniteDifferencesOnRandomBoxes) {
  std::mt19937_64 rng(83);
  int compared = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const SystemSpec spec = random_system(rng, {2, 2, 2, 8});
    const BatchForm b = make_batch_form(spec);
    const Timeseries s = random_series(rng, b.series_len());
    std::optional<BoxBounds> sb;
    if (trial % 2) {
      const auto n = spec.state_dim();
      sb = BoxBounds{Vector::Constant(n, -1.0), Vector::Constant(n, 1.0)};
    }
    const ConstraintSet c = compile_constraints(spec, b, clamping_action_box(b, s, 0.6), sb);
    const QpSolution sol = solve_qp(b, c, s);
    if (!sol.optimal() || sol.weakly_active) continue;
    SolutionJacobian fd;
    try {
      fd = finite_difference_jacobian(b, c, s);
    } catch (const NumericalError&) {
      continue;
    }
    ++compared;
    EXPECT_LE((solution_jacobian(b, c, sol).J - fd.J).cwiseAbs().maxCoeff(), 1e-5)
        << "trial " << trial;
  }
  EXPECT_GE(compared, 30);
}

TEST(SolutionJacobian, InfeasibleSolutionIsContractViolation) {
  const Problem p = scalar_problem(1, box(-0.1, 0.1), box(-kInf, 0.2));
  const QpSolution sol = solve_qp(p.batch, p.cons, series({0}));
  ASSERT_FALSE(sol.optimal());
  EXPECT_THROW(solution_jacobian(p.batch, p.cons, sol), ContractError);
}

TEST(SolutionJacobian, WeaklyActiveIsFlagged) {
  // Unconstrained optimum u = 0.5 sits exactly on the bound.
  const Problem p = scalar_problem(1, box(-1, 0.5));
  const QpSolution sol = solve_qp(p.batch, p.cons, series({0}));
  ASSERT_TRUE(sol.weakly_active);
  EXPECT_TRUE(solution_jacobian(p.batch, p.cons, sol).weak_active_flag);
}

TEST(FiniteDifference, InfeasiblePerturbationNamesCoordinate) {
  // s[0] = 0.8 puts x1 at the bound 1.8 - u <= 1 with u <= 0.8 exactly.
  const Problem p = scalar_problem(1, box(-0.8, 0.8), box(-kInf, 1.0));
  try {
    finite_difference_jacobian(p.batch, p.cons, series({0.8}), 1e-3);
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("coordinate 0"), std::string::npos);
  }
}

TEST(TargetGradient, Examples) {
  const BatchForm b = make_batch_form(battery(3));
  const Timeseries s = series({0, 0, 0});
  const TargetFunction max{TargetKind::MaxAction};
  const TargetFunction min{TargetKind::MinAction};
  const TargetFunction l1{TargetKind::L1Energy};
  EXPECT_EQ(target_gradient(max, vec({1, 3, 2}), b, s), vec({0, 1, 0}));
  EXPECT_EQ(target_gradient(max, vec({3, 3, 2}), b, s), vec({1, 0, 0}));
  EXPECT_EQ(target_gradient(min, vec({1, 3, 0}), b, s), vec({0, 0, -1}));
  EXPECT_EQ(target_gradient(l1, vec({1, -2, 0}), b, s), vec({1, -1, 0}));
  const TargetFunction cost{TargetKind::CostChange};
  const Timeseries sr = series({0.4, -1, 2});
  EXPECT_LE(target_gradient(cost, solve_unconstrained(b, sr), b, sr).cwiseAbs().maxCoeff(),
            1e-12);
}

TEST(TargetGradient, CostGradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(85);
  const SystemSpec spec = random_system(rng, {});
  const BatchForm b = make_batch_form(spec);
  const Timeseries s = random_series(rng, b.series_len());
  const Vector u = random_series(rng, b.action_len()).values();
  const TargetFunction cost{TargetKind::CostChange};
  const Vector g = target_gradient(cost, u, b, s);
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const Vector e = Vector::Unit(u.size(), i) * 1e-5;
    const double fd = (cost.value(u + e, b, s) - cost.value(u - e, b, s)) / 2e-5;
    EXPECT_NEAR(g[i], fd, 1e-6 * (1 + std::abs(fd)));
  }
}

TEST(TargetNames, RoundTrip) {
  for (const char* name : {"max-action", "min-action", "l1", "cost"}) {
    EXPECT_EQ(to_string(parse_target(name)), name);
  }
  EXPECT_THROW(parse_target("median"), ConfigError);
}

TEST(Unit, NormalizesAndZeroesTinyVectors) {
  EXPECT_NEAR(unit(vec({3, 4})).norm(), 1.0, 1e-15);
  EXPECT_EQ(unit(vec({1e-13, 0})), vec({0, 0}));
}

TEST(SingleStep, ScalarMaxAction) {
  const Problem p = scalar_problem(1);
  const AttackResult r =
      single_step_attack(p.batch, p.cons, series({0}), 0.1, {TargetKind::MaxAction});
  EXPECT_NEAR(r.s_hat[0], 0.1, 1e-15);
  EXPECT_NEAR(r.attained, 0.55, 1e-14);
  EXPECT_NEAR(r.norm_used, 0.1, 1e-15);
  EXPECT_TRUE(r.flags.empty());
}

TEST(SingleStep, CostTargetIsAFixedPoint) {
  std::mt19937_64 rng(87);
  for (int trial = 0; trial < 30; ++trial) {
    const SystemSpec spec = random_system(rng, {});
    const BatchForm b = make_batch_form(spec);
    const Timeseries s = random_series(rng, b.series_len(), 10.0);
    const ConstraintSet c = trial % 2 ? compile_constraints(spec, b, clamping_action_box(b, s, 0.5),
                                                            std::nullopt)
                                      : ConstraintSet::none(b.action_len(), b.series_len());
    const AttackResult r = single_step_attack(b, c, s, 1.0, {TargetKind::CostChange});
    EXPECT_TRUE(r.has(AttackFlag::ZeroGradient)) << "trial " << trial;
    EXPECT_EQ(r.s_hat.values(), s.values());
    EXPECT_EQ(r.norm_used, 0.0);
  }
}

TEST(SingleStep, ZeroDeltaReturnsSeries) {
  const Problem p = scalar_problem(2);
  const Timeseries s = series({1, 2});
  const AttackResult r = single_step_attack(p.batch, p.cons, s, 0.0, {TargetKind::L1Energy});
  EXPECT_EQ(r.s_hat.values(), s.values());
  EXPECT_THROW(single_step_attack(p.batch, p.cons, s, -1.0, {TargetKind::L1Energy}),
               ContractError);
}

TEST(SingleStep, InfeasibilityIsReportedAsSuccess) {
  // Raising s pushes x1 = 1 - u + s above 0.4 beyond what |u| <= 1 can offset.
  const Problem p = scalar_problem(1, box(-1, 1), box(-kInf, 0.4));
  const AttackResult r =
      single_step_attack(p.batch, p.cons, series({0}), 1.0, {TargetKind::MaxAction});
  EXPECT_TRUE(r.has(AttackFlag::Infeasible));
  EXPECT_EQ(r.attained, kInf);
  EXPECT_LE(r.norm_used, 1.0 * (1 + 1e-9));
}

TEST(Iterated, OneSaturatingStepEqualsSingleStep) {
  std::mt19937_64 rng(89);
  for (int trial = 0; trial < 20; ++trial) {
    const SystemSpec spec = random_system(rng, {});
    const BatchForm b = make_batch_form(spec);
    const Timeseries s = random_series(rng, b.series_len());
    const ConstraintSet c =
        compile_constraints(spec, b, clamping_action_box(b, s, 0.8), std::nullopt);
    for (TargetKind kind : {TargetKind::MaxAction, TargetKind::L1Energy}) {
      const AttackResult one = single_step_attack(b, c, s, 0.5, {kind});
      const AttackResult it = iterated_attack(b, c, s, 0.5, {kind}, {1, 0.5});
      EXPECT_EQ(one.s_hat.values(), it.s_hat.values());
      EXPECT_EQ(one.attained, it.attained);
    }
  }
}

TEST(Iterated, NeverWorseThanSingleStepAndStaysInBall) {
  std::mt19937_64 rng(91);
  for (int trial = 0; trial < 30; ++trial) {
    const SystemSpec spec = random_system(rng, {});
    const BatchForm b = make_batch_form(spec);
    const Timeseries s = random_series(rng, b.series_len());
    const ConstraintSet c =
        compile_constraints(spec, b, clamping_action_box(b, s, 0.9), std::nullopt);
    for (TargetKind kind : {TargetKind::MaxAction, TargetKind::MinAction, TargetKind::L1Energy}) {
      const AttackResult one = single_step_attack(b, c, s, 0.8, {kind});
      const AttackResult it = iterated_attack(b, c, s, 0.8, {kind});
      EXPECT_GE(it.attained, one.attained - 1e-12);
      EXPECT_LE(it.norm_used, 0.8 * (1 + 1e-9));
      EXPECT_NEAR(it.norm_used, (it.s_hat.values() - s.values()).norm(), 1e-12);
    }
  }
}

TEST(Iterated, ScalarMaxActionReachesBallEdge) {
  const Problem p = scalar_problem(1);
  const AttackResult r = iterated_attack(p.batch, p.cons, series({0.2}), 0.4,
                                         {TargetKind::MaxAction}, {20, 0.05});
  EXPECT_NEAR(r.s_hat[0], 0.6, 1e-12);
  EXPECT_NEAR(r.attained, 0.8, 1e-12);
}

TEST(Iterated, RejectsZeroSteps) {
  const Problem p = scalar_problem(1);
  EXPECT_THROW(iterated_attack(p.batch, p.cons, series({0}), 0.1, {TargetKind::MaxAction}, {0, 0}),
               ContractError);
}
