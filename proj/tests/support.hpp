#pragma once

#include "tsattack/instances.hpp"
#include "tsattack/lqr.hpp"

#include <cmath>
#include <random>

namespace tsattack::testing {

/// The battery system used throughout: A = C = Q = R = 1, B = -1.
inline SystemSpec battery(int horizon, double x0 = 1.0) {
  return SystemSpec::scalar(1.0, -1.0, 1.0, 1.0, 1.0, horizon, x0);
}

inline Timeseries series(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return Timeseries(out);
}

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

/// Next state by direct simulation, independent of the batch matrices.
inline Vector simulate_state(const SystemSpec& spec, const Vector& u, const Vector& s, int steps) {
  Vector x = spec.x0;
  const auto m = spec.action_dim();
  const auto p = spec.series_dim();
  for (int t = 0; t < steps; ++t) {
    x = spec.A * x + spec.B * u.segment(t * m, m) + spec.C * s.segment(t * p, p);
  }
  return x;
}

}  // namespace tsattack::testing
