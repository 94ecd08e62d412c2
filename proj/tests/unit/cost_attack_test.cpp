#include "support.hpp"

#include "tsattack/cost_attack.hpp"
#include "tsattack/errors.hpp"

#include <gtest/gtest.h>

using namespace tsattack;
using namespace tsattack::testing;

TEST(DominantEigenpair, IdentityCanonicalizesToFirstAxis) {
  const EigenPair e = dominant_eigenpair(Matrix::Identity(3, 3));
  EXPECT_NEAR(e.lambda1, 1.0, 1e-15);
  EXPECT_NEAR(e.v1.norm(), 1.0, 1e-15);
  EXPECT_LT((e.v1 - Vector::Unit(3, 0)).norm(), 1e-15);
}

TEST(DominantEigenpair, Diagonal) {
  const EigenPair e = dominant_eigenpair((Matrix(2, 2) << 2, 0, 0, 1).finished());
  EXPECT_NEAR(e.lambda1, 2.0, 1e-15);
  EXPECT_LT((e.v1 - Vector::Unit(2, 0)).norm(), 1e-15);
}

TEST(DominantEigenpair, TwoStepBatteryPsi) {
  const Matrix psi = (Matrix(2, 2) << 7, 4, 4, 3).finished() / 5.0;
  const EigenPair e = dominant_eigenpair(psi);
  // Roots of l^2 - 2 l + 0.2.
  EXPECT_NEAR(e.lambda1, 1.0 + std::sqrt(0.8), 1e-14);
  EXPECT_LT((psi * e.v1 - e.lambda1 * e.v1).norm(), 1e-14);
  EXPECT_GT(e.v1[0], 0.0);
}

TEST(DominantEigenpair, SignCanonicalSkipsNegligibleLeadingEntries) {
  const EigenPair e = dominant_eigenpair((Matrix(2, 2) << 0, 0, 0, 3).finished());
  EXPECT_NEAR(e.v1[1], 1.0, 1e-15);
}

TEST(DominantEigenpair, RejectsAsymmetric) {
  EXPECT_THROW(dominant_eigenpair((Matrix(2, 2) << 1, 0.5, 0, 1).finished()), ContractError);
}

TEST(CostAttack, ScalarExample) {
  const BatchForm b = make_batch_form(battery(1));
  const CostAttack atk = cost_attack(b, series({0}), 2.0);
  EXPECT_NEAR(atk.canonical.s_hat[0], 2.0, 1e-15);
  EXPECT_NEAR(atk.mirror.s_hat[0], -2.0, 1e-15);
  EXPECT_NEAR(atk.canonical.attained, 2.0, 1e-14);
  EXPECT_NEAR(atk.mirror.attained, 2.0, 1e-14);
  EXPECT_NEAR(atk.canonical.norm_used, 2.0, 1e-15);
}

TEST(CostAttack, TinyDeltaLeavesSeriesAlmostUnchanged) {
  const BatchForm b = make_batch_form(battery(4));
  const Timeseries s = series({0.3, -1, 2, 0.5});
  const CostAttack atk = cost_attack(b, s, 1e-9);
  EXPECT_LT((atk.canonical.s_hat.values() - s.values()).norm(), 1.1e-9);
  EXPECT_LT(atk.canonical.attained, 1e-17);
}

TEST(CostAttack, RejectsNonPositiveDelta) {
  const BatchForm b = make_batch_form(battery(1));
  EXPECT_THROW(cost_attack(b, series({0}), 0.0), ContractError);
  EXPECT_THROW(cost_attack(b, series({0}), -1.0), ContractError);
  EXPECT_THROW(random_sphere_attack(series({0}), 0.0, 1), ContractError);
}

TEST(CostAttack, ExactnessAndQuadraticScaling) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 40; ++trial) {
    const SystemSpec spec = random_system(rng, {});
    const BatchForm b = make_batch_form(spec);
    const Timeseries s = random_series(rng, b.series_len());
    const CostAttack a1 = cost_attack(b, s, 0.7);
    const CostAttack a3 = cost_attack(b, s, 2.1);
    const double expect = 0.49 * a1.eigen.lambda1;
    EXPECT_LE(rel_err(a1.canonical.attained, expect), 1e-8);
    EXPECT_LE(rel_err(cost_delta_quadratic(b, a1.canonical.s_hat, s), expect), 1e-8);
    EXPECT_LE(rel_err(cost_delta_quadratic(b, a1.mirror.s_hat, s), expect), 1e-8);
    EXPECT_LE(rel_err(a3.canonical.attained / a1.canonical.attained, 9.0), 1e-9);
    EXPECT_LE(a1.canonical.norm_used, 0.7 * (1 + 1e-9));
  }
}

TEST(CostAttack, DirectionIndependentOfSeriesAndInitialState) {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 20; ++trial) {
    SystemSpec spec = random_system(rng, {});
    const BatchForm b1 = make_batch_form(spec);
    spec.x0 = random_series(rng, spec.state_dim()).values();
    const BatchForm b2 = make_batch_form(spec);
    const Timeseries s1 = random_series(rng, b1.series_len());
    const Timeseries s2 = random_series(rng, b1.series_len(), 5.0);
    const Vector d1 = (cost_attack(b1, s1, 1.5).canonical.s_hat.values() - s1.values()) / 1.5;
    const Vector d2 = (cost_attack(b2, s2, 1.5).canonical.s_hat.values() - s2.values()) / 1.5;
    EXPECT_LE((d1 - d2).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(RandomSphere, NormAndDeterminism) {
  const Timeseries s = series({1, 2, 3, 4, 5});
  const AttackResult a = random_sphere_attack(s, 0.8, 99);
  const AttackResult b = random_sphere_attack(s, 0.8, 99);
  const AttackResult c = random_sphere_attack(s, 0.8, 100);
  EXPECT_NEAR((a.s_hat.values() - s.values()).norm(), 0.8, 1e-12);
  EXPECT_NEAR(a.norm_used, 0.8, 1e-12);
  EXPECT_EQ(a.s_hat.values(), b.s_hat.values());
  EXPECT_NE(a.s_hat.values(), c.s_hat.values());
}

TEST(RandomSphere, IdentityPsiGivesDeltaSquared) {
  BatchForm b = make_batch_form(battery(3));
  b.Psi = Matrix::Identity(3, 3);
  const Timeseries s = series({0.1, 0.2, 0.3});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const AttackResult r = random_sphere_attack(b, s, 1.3, seed);
    EXPECT_NEAR(r.attained, 1.69, 1e-12);
  }
}

TEST(RandomSphere, DirectionsLookUniform) {
  // First coordinate of a uniform point on S^{d-1} has mean 0 and variance 1/d.
  const int d = 6;
  const int draws = 20000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < draws; ++i) {
    const double x = random_unit_vector(d, derive_seed(7, static_cast<std::uint64_t>(i)))[0];
    sum += x;
    sq += x * x;
  }
  EXPECT_NEAR(sum / draws, 0.0, 0.02);
  EXPECT_NEAR(sq / draws, 1.0 / d, 0.01);
}

TEST(RandomSphere, DominatedByClosedForm) {
  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 20; ++trial) {
    const SystemSpec spec = random_system(rng, {});
    const BatchForm b = make_batch_form(spec);
    const Timeseries s = random_series(rng, b.series_len());
    const double best = cost_attack(b, s, 1.0).canonical.attained;
    for (std::uint64_t k = 0; k < 300; ++k) {
      const AttackResult r = random_sphere_attack(b, s, 1.0, derive_seed(5, trial, k));
      EXPECT_LE(r.attained, best + 1e-9);
      EXPECT_GE(r.attained, -1e-12);
    }
  }
}

TEST(DeriveSeed, SpreadsNeighbouringInputs) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t a = 0; a < 50; ++a) {
    for (std::uint64_t b = 0; b < 50; ++b) seen.insert(derive_seed(1, a, b));
  }
  EXPECT_EQ(seen.size(), 2500u);
  EXPECT_EQ(derive_seed(3, 4, 5, 6), derive_seed(3, 4, 5, 6));
}

TEST(AttackFlagNames, AreStable) {
  EXPECT_EQ(to_string(AttackFlag::ZeroGradient), "zero-gradient");
  EXPECT_EQ(to_string(AttackFlag::Infeasible), "infeasible");
  EXPECT_EQ(to_string(AttackFlag::WeaklyActive), "weakly-active");
}
