#include "tsattack/instances.hpp"

#include <Eigen/SVD>

namespace tsattack {

namespace {

Matrix gaussian(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
  }
  return m;
}

Matrix spd(std::mt19937_64& rng, Eigen::Index dim) {
  // Random orthogonal basis with eigenvalues drawn from [0.5, 2.5].
  Eigen::HouseholderQR<Matrix> qr(gaussian(rng, dim, dim));
  const Matrix basis = qr.householderQ();
  std::uniform_real_distribution<double> eig(0.5, 2.5);
  Vector d(dim);
  for (Eigen::Index i = 0; i < dim; ++i) d[i] = eig(rng);
  Matrix out = basis * d.asDiagonal() * basis.transpose();
  return 0.5 * (out + out.transpose());
}

}  // namespace

SystemSpec random_system(std::mt19937_64& rng, const InstanceLimits& limits) {
  std::uniform_int_distribution<int> n_dist(1, limits.max_state);
  std::uniform_int_distribution<int> m_dist(1, limits.max_action);
  std::uniform_int_distribution<int> p_dist(1, limits.max_series);
  std::uniform_int_distribution<int> t_dist(1, limits.max_horizon);
  std::uniform_real_distribution<double> radius(0.5, 1.1);
  const int n = n_dist(rng);
  const int m = m_dist(rng);
  const int p = p_dist(rng);

  SystemSpec spec;
  spec.A = gaussian(rng, n, n);
  const double norm = Eigen::JacobiSVD<Matrix>(spec.A).singularValues()[0];
  spec.A *= radius(rng) / std::max(norm, 1e-12);
  spec.B = gaussian(rng, n, m);
  spec.C = gaussian(rng, n, p);
  spec.Q = spd(rng, n);
  spec.R = spd(rng, m);
  spec.horizon = t_dist(rng);
  spec.x0 = gaussian(rng, n, 1);
  return spec;
}

Timeseries random_series(std::mt19937_64& rng, Eigen::Index length, double scale) {
  return Timeseries(scale * gaussian(rng, length, 1));
}

BoxBounds clamping_action_box(const BatchForm& batch, const Timeseries& s, double fraction) {
  const Vector u = solve_unconstrained(batch, s);
  const double bound = fraction * u.cwiseAbs().maxCoeff();
  return BoxBounds::symmetric(bound, batch.action_len());
}

}  // namespace tsattack
