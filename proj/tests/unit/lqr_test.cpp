#include "support.hpp"

#include "tsattack/errors.hpp"
#include "tsattack/lqr.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

using namespace tsattack;
using namespace tsattack::testing;

TEST(StackDynamics, SingleStepScalar) {
  const BatchForm b = stack_dynamics(battery(1));
  ASSERT_EQ(b.M.size(), 1u);
  EXPECT_DOUBLE_EQ(b.M[0](0, 0), -1.0);
  EXPECT_DOUBLE_EQ(b.N[0](0, 0), 1.0);
}

TEST(StackDynamics, TwoStepScalar) {
  const BatchForm b = stack_dynamics(battery(2));
  EXPECT_EQ(b.M[0], (Matrix(1, 2) << -1, 0).finished());
  EXPECT_EQ(b.M[1], (Matrix(1, 2) << -1, -1).finished());
  EXPECT_EQ(b.N[0], (Matrix(1, 2) << 1, 0).finished());
  EXPECT_EQ(b.N[1], (Matrix(1, 2) << 1, 1).finished());
}

TEST(StackDynamics, NilpotentAZeroesHistory) {
  const BatchForm b = stack_dynamics(SystemSpec::scalar(0.0, 2.0, 3.0, 1.0, 1.0, 2, 1.0));
  EXPECT_EQ(b.M[1], (Matrix(1, 2) << 0, 2).finished());
  EXPECT_EQ(b.N[1], (Matrix(1, 2) << 0, 3).finished());
}

TEST(StackDynamics, MatchesDirectSimulation) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const SystemSpec spec = random_system(rng, {});
    const BatchForm b = stack_dynamics(spec);
    const Vector u = random_series(rng, spec.action_len()).values();
    const Vector s = random_series(rng, spec.series_len()).values();
    for (int t = 0; t < spec.horizon; ++t) {
      const Vector batch_x = b.A_pow[t] * spec.x0 + b.M[t] * u + b.N[t] * s;
      const Vector direct = simulate_state(spec, u, s, t + 1);
      EXPECT_LT((batch_x - direct).cwiseAbs().maxCoeff(), 1e-10 * (1 + direct.norm()));
    }
  }
}

TEST(StackDynamics, DimensionMismatchIsConfigError) {
  SystemSpec spec = battery(2);
  spec.B = Matrix::Ones(2, 1);
  EXPECT_THROW(stack_dynamics(spec), ConfigError);
  spec = battery(0);
  EXPECT_THROW(stack_dynamics(spec), ConfigError);
}

TEST(BuildCostForm, ScalarOneStep) {
  const BatchForm b = make_batch_form(battery(1));
  EXPECT_NEAR(b.K(0, 0), 2.0, 1e-15);
  EXPECT_NEAR(b.L(0, 0), -1.0, 1e-15);
  EXPECT_NEAR(b.Psi(0, 0), 0.5, 1e-15);
}

TEST(BuildCostForm, ScalarTwoStep) {
  const BatchForm b = make_batch_form(battery(2));
  EXPECT_LT((b.K - (Matrix(2, 2) << 3, 1, 1, 2).finished()).norm(), 1e-14);
  EXPECT_LT((b.L - (Matrix(2, 2) << -2, -1, -1, -1).finished()).norm(), 1e-14);
  EXPECT_LT((b.Psi - (Matrix(2, 2) << 7, 4, 4, 3).finished() / 5.0).norm(), 1e-14);
  EXPECT_NEAR(b.Psi.trace(), 2.0, 1e-14);
  EXPECT_NEAR(b.Psi.determinant(), 0.2, 1e-14);
}

TEST(BuildCostForm, NoActuationMeansNoAttackSurface) {
  SystemSpec spec = battery(4);
  spec.B = Matrix::Zero(1, 1);
  const BatchForm b = make_batch_form(spec);
  EXPECT_EQ(b.L.norm(), 0.0);
  EXPECT_EQ(b.Psi.norm(), 0.0);
}

TEST(BuildCostForm, RejectsIndefiniteWeights) {
  SystemSpec spec = battery(2);
  spec.Q(0, 0) = -1.0;
  EXPECT_THROW(make_batch_form(spec), ConfigError);
  spec = battery(2);
  spec.R(0, 0) = 0.0;
  EXPECT_THROW(make_batch_form(spec), ConfigError);
  spec = SystemSpec::scalar(1, 1, 1, 1, 1, 2, 1);
  spec.Q = (Matrix(1, 1) << 1).finished();
  spec.R = Matrix::Identity(1, 1);
  spec.A = Matrix::Identity(2, 2);
  EXPECT_THROW(make_batch_form(spec), ConfigError);
}

TEST(BuildCostForm, InvariantsOnRandomSystems) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const SystemSpec spec = random_system(rng, {});
    const BatchForm b = make_batch_form(spec);
    EXPECT_EQ(b.k_lin, b.L);
    Eigen::LLT<Matrix> llt(b.K);
    EXPECT_EQ(llt.info(), Eigen::Success);
    // Psi against an explicit-inverse recomputation
    const Matrix psi_ref = b.L.transpose() * b.K.inverse() * b.L;
    EXPECT_LE((b.Psi - psi_ref).norm(), 1e-10 * std::max(1.0, psi_ref.norm()));
    Eigen::SelfAdjointEigenSolver<Matrix> es(b.Psi);
    const double top = es.eigenvalues().maxCoeff();
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10 * std::max(top, 1.0));
    EXPECT_EQ(b.Psi, b.Psi.transpose());
  }
}

TEST(LinearTerm, Examples) {
  const BatchForm b = make_batch_form(battery(1));
  EXPECT_NEAR(linear_term(b, series({0}))[0], -1.0, 1e-15);
  EXPECT_NEAR(linear_term(b, series({1}))[0], -2.0, 1e-15);
  const BatchForm z = make_batch_form(battery(3, 0.0));
  EXPECT_EQ(linear_term(z, series({0, 0, 0})).norm(), 0.0);
  EXPECT_THROW(linear_term(b, series({0, 1})), ContractError);
}

TEST(SolveUnconstrained, Examples) {
  const BatchForm b = make_batch_form(battery(1));
  EXPECT_NEAR(solve_unconstrained(b, series({0}))[0], 0.5, 1e-15);
  const BatchForm z = make_batch_form(battery(3, 0.0));
  EXPECT_EQ(solve_unconstrained(z, series({0, 0, 0})).norm(), 0.0);
  EXPECT_NEAR(solve_unconstrained(b, series({1}))[0] - solve_unconstrained(b, series({0}))[0], 0.5,
              1e-15);
}

TEST(SolveUnconstrained, StationarityResidual) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const SystemSpec spec = random_system(rng, {});
    const BatchForm b = make_batch_form(spec);
    const Timeseries s = random_series(rng, b.series_len());
    const Vector k = linear_term(b, s);
    const Vector u = solve_unconstrained(b, s);
    EXPECT_LE((2 * b.K * u + 2 * k).cwiseAbs().maxCoeff(), 1e-9 * (1 + k.cwiseAbs().maxCoeff()));
  }
}

TEST(RolloutCost, Examples) {
  const SystemSpec spec = battery(1);
  EXPECT_DOUBLE_EQ(rollout_cost(spec, Vector::Constant(1, 0.5), series({0})), 1.5);
  EXPECT_DOUBLE_EQ(rollout_cost(spec, Vector::Constant(1, 1.0), series({0})), 2.0);
  EXPECT_DOUBLE_EQ(rollout_cost(battery(3, 0.0), Vector::Zero(3), series({0, 0, 0})), 0.0);
  EXPECT_THROW(rollout_cost(spec, Vector::Zero(2), series({0})), ContractError);
}

TEST(RolloutCost, OptimumBeatsPerturbations) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const SystemSpec spec = random_system(rng, {});
    const BatchForm b = make_batch_form(spec);
    const Timeseries s = random_series(rng, b.series_len());
    const Vector u = solve_unconstrained(b, s);
    const double best = rollout_cost(spec, u, s);
    for (int k = 0; k < 100; ++k) {
      const Vector v = random_series(rng, b.action_len()).values().normalized();
      EXPECT_LE(best, rollout_cost(spec, u + 1e-3 * v, s));
    }
  }
}

TEST(ActionGap, Examples) {
  const BatchForm b = make_batch_form(battery(1));
  EXPECT_EQ(action_gap(b, series({3}), series({3})).norm(), 0.0);
  EXPECT_NEAR(action_gap(b, series({1}), series({0}))[0], 0.5, 1e-15);
  EXPECT_NEAR(action_gap(b, series({-2}), series({0}))[0], -1.0, 1e-15);
}

TEST(ActionGap, EqualsDifferenceOfOptimaAndIsLinear) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 30; ++trial) {
    const SystemSpec spec = random_system(rng, {});
    const BatchForm b = make_batch_form(spec);
    const Timeseries s = random_series(rng, b.series_len());
    const Vector d1 = random_series(rng, b.series_len()).values();
    const Vector d2 = random_series(rng, b.series_len()).values();
    const Vector g1 = action_gap(b, Timeseries(s.values() + d1), s);
    const Vector direct =
        solve_unconstrained(b, Timeseries(s.values() + d1)) - solve_unconstrained(b, s);
    EXPECT_LE((g1 - direct).cwiseAbs().maxCoeff(), 1e-10 * (1 + direct.norm()));
    const Vector g2 = action_gap(b, Timeseries(s.values() + d2), s);
    const Vector g12 = action_gap(b, Timeseries(s.values() + d1 + d2), s);
    EXPECT_LE((g12 - g1 - g2).cwiseAbs().maxCoeff(), 1e-10 * (1 + g12.norm()));
    const Vector g3 = action_gap(b, Timeseries(s.values() - 2.5 * d1), s);
    EXPECT_LE((g3 + 2.5 * g1).cwiseAbs().maxCoeff(), 1e-10 * (1 + g3.norm()));
  }
}

TEST(CostDeltaQuadratic, Examples) {
  const BatchForm b1 = make_batch_form(battery(1));
  EXPECT_EQ(cost_delta_quadratic(b1, series({1}), series({1})), 0.0);
  EXPECT_NEAR(cost_delta_quadratic(b1, series({2}), series({0})), 2.0, 1e-14);
  const BatchForm b2 = make_batch_form(battery(2));
  EXPECT_NEAR(cost_delta_quadratic(b2, series({1, 0}), series({0, 0})), 1.4, 1e-14);
}

TEST(CostDeltaQuadratic, MatchesRolloutGap) {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 50; ++trial) {
    const SystemSpec spec = random_system(rng, {});
    const BatchForm b = make_batch_form(spec);
    const Timeseries s = random_series(rng, b.series_len());
    const Timeseries s_hat(s.values() + random_series(rng, b.series_len()).values());
    const double gap = rollout_cost(spec, solve_unconstrained(b, s_hat), s) -
                       rollout_cost(spec, solve_unconstrained(b, s), s);
    const double quad = cost_delta_quadratic(b, s_hat, s);
    EXPECT_GE(quad, -1e-12);
    EXPECT_LE(std::abs(gap - quad), 1e-8 * std::max(std::abs(quad), 1e-6) +
                                        1e-12 * rollout_cost(spec, solve_unconstrained(b, s), s))
        << "trial " << trial;
  }
}

TEST(Timeseries, RejectsNonFinite) {
  Vector v(2);
  v << 1.0, std::nan("");
  EXPECT_THROW(Timeseries{v}, ContractError);
}
