#pragma once

#include "tsattack/lqr.hpp"

#include <cstdint>
#include <set>
#include <string>

namespace tsattack {

struct EigenPair {
  double lambda1 = 0.0;
  Vector v1;
};

/// Diagnostics attached to an attack outcome.
enum class AttackFlag {
  ZeroGradient,  // first-order direction vanished; series returned unchanged
  Infeasible,    // attacked controller problem has no feasible point
  WeaklyActive,  // Jacobian taken at a degenerate active set
};

std::string to_string(AttackFlag flag);

struct AttackResult {
  Timeseries s_hat;
  double delta = 0.0;
  double attained = 0.0;   // value of the attack's own target at s_hat
  double norm_used = 0.0;  // ||s_hat - s||_2
  std::set<AttackFlag> flags;

  bool has(AttackFlag f) const { return flags.count(f) != 0; }
};

/// Closed-form cost attack: the canonical candidate s + delta v1 and its
/// mirror s - delta v1. Both attain the same cost increase.
struct CostAttack {
  AttackResult canonical;
  AttackResult mirror;
  EigenPair eigen;
};

/// Largest eigenvalue of a symmetric PSD matrix and a unit eigenvector,
/// sign-canonicalized so that the first component with magnitude > 1e-12 is
/// positive. Throws ContractError if the input is not symmetric to 1e-10.
EigenPair dominant_eigenpair(const Matrix& psi);

/// s_hat = s +/- delta v1 with attained = delta^2 lambda1.
CostAttack cost_attack(const BatchForm& batch, const Timeseries& s, double delta);

/// Uniform point on the unit sphere of the given dimension (normalized
/// standard normal vector), deterministic in seed.
Vector random_unit_vector(Eigen::Index dim, std::uint64_t seed);

/// Control-agnostic baseline: s_hat = s + delta w, w uniform on the sphere.
/// attained is left at 0; callers that know the system evaluate it.
AttackResult random_sphere_attack(const Timeseries& s, double delta,
                                  std::uint64_t seed);

/// Same draw as above, with attained = cost_delta_quadratic(s_hat, s).
AttackResult random_sphere_attack(const BatchForm& batch, const Timeseries& s,
                                  double delta, std::uint64_t seed);

/// Mixes several integers into a well-spread 64-bit seed (splitmix64).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0,
                          std::uint64_t c = 0);

}  // namespace tsattack
