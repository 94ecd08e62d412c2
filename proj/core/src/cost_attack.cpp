#include "tsattack/cost_attack.hpp"

#include "tsattack/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

namespace tsattack {

std::string to_string(AttackFlag flag) {
  switch (flag) {
    case AttackFlag::ZeroGradient: return "zero-gradient";
    case AttackFlag::Infeasible: return "infeasible";
    case AttackFlag::WeaklyActive: return "weakly-active";
  }
  return "unknown";
}

EigenPair dominant_eigenpair(const Matrix& psi) {
  if (psi.rows() != psi.cols() || psi.rows() == 0) {
    throw ContractError("dominant_eigenpair: matrix must be square and non-empty");
  }
  if ((psi - psi.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
    throw ContractError("dominant_eigenpair: matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(psi);
  if (es.info() != Eigen::Success) {
    throw NumericalError("dominant_eigenpair: eigendecomposition failed");
  }
  const Vector& values = es.eigenvalues();  // ascending
  const double top = values[values.size() - 1];
  Eigen::Index pick = values.size() - 1;
  const double tie = 1e-12 * (1.0 + std::abs(top));
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (top - values[i] <= tie) {
      pick = i;
      break;
    }
  }

  EigenPair out;
  out.lambda1 = std::max(top, 0.0);
  out.v1 = es.eigenvectors().col(pick).normalized();
  for (Eigen::Index i = 0; i < out.v1.size(); ++i) {
    if (std::abs(out.v1[i]) > 1e-12) {
      if (out.v1[i] < 0) out.v1 = -out.v1;
      break;
    }
  }
  return out;
}

CostAttack cost_attack(const BatchForm& batch, const Timeseries& s, double delta) {
  if (!(delta > 0.0)) throw ContractError("cost_attack: delta must be > 0");
  if (s.size() != batch.series_len()) {
    throw ContractError("cost_attack: series length mismatch");
  }
  CostAttack out;
  out.eigen = dominant_eigenpair(batch.Psi);

  auto make = [&](double sign) {
    AttackResult r;
    r.s_hat = Timeseries(s.values() + sign * delta * out.eigen.v1);
    r.delta = delta;
    r.norm_used = (r.s_hat.values() - s.values()).norm();
    r.attained = cost_delta_quadratic(batch, r.s_hat, s);
    return r;
  };
  out.canonical = make(+1.0);
  out.mirror = make(-1.0);
  return out;
}

Vector random_unit_vector(Eigen::Index dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector w(dim);
  // A zero draw has probability zero; redraw anyway so Unit(w) is defined.
  do {
    for (Eigen::Index i = 0; i < dim; ++i) w[i] = normal(rng);
  } while (w.norm() == 0.0);
  return w / w.norm();
}

AttackResult random_sphere_attack(const Timeseries& s, double delta,
                                  std::uint64_t seed) {
  if (!(delta > 0.0)) throw ContractError("random_sphere_attack: delta must be > 0");
  AttackResult r;
  const Vector w = random_unit_vector(s.size(), seed);
  r.s_hat = Timeseries(s.values() + delta * w);
  r.delta = delta;
  r.norm_used = (r.s_hat.values() - s.values()).norm();
  return r;
}

AttackResult random_sphere_attack(const BatchForm& batch, const Timeseries& s,
                                  double delta, std::uint64_t seed) {
  AttackResult r = random_sphere_attack(s, delta, seed);
  r.attained = cost_delta_quadratic(batch, r.s_hat, s);
  return r;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b,
                          std::uint64_t c) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  std::uint64_t h = mix(base);
  h = mix(h ^ a);
  h = mix(h ^ b);
  h = mix(h ^ c);
  return h;
}

}  // namespace tsattack
