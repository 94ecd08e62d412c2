#pragma once

#include "tsattack/qp.hpp"

#include <cstdint>
#include <random>

namespace tsattack {

/// Size limits for randomized problem instances.
struct InstanceLimits {
  int max_state = 3;
  int max_action = 3;
  int max_series = 3;
  int max_horizon = 10;
};

/// Random well-posed system: A scaled to spectral norm in [0.5, 1.1],
/// Gaussian B, C and x0, and Q, R with eigenvalues in [0.5, 2.5].
SystemSpec random_system(std::mt19937_64& rng, const InstanceLimits& limits);

/// Standard normal series of the given length.
Timeseries random_series(std::mt19937_64& rng, Eigen::Index length, double scale = 1.0);

/// Symmetric action box at `fraction` of the largest unconstrained |u*| on
/// `s`, so that at least one action clamps when fraction < 1.
BoxBounds clamping_action_box(const BatchForm& batch, const Timeseries& s, double fraction);

}  // namespace tsattack
