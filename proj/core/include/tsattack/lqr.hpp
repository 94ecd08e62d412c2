#pragma once

#include <Eigen/Dense>

#include <vector>

namespace tsattack {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Flat forecast vector of length p*T, time-major (all of s_0, then s_1, ...).
/// Entries are always finite.
class Timeseries {
 public:
  Timeseries() = default;
  explicit Timeseries(Vector values);

  const Vector& values() const noexcept { return values_; }
  Eigen::Index size() const noexcept { return values_.size(); }
  double operator[](Eigen::Index i) const { return values_[i]; }

 private:
  Vector values_;
};

/// Linear plant x_{t+1} = A x_t + B u_t + C s_t with quadratic cost
/// sum_{t=0..T} x_t' Q x_t + sum_{t=0..T-1} u_t' R u_t.
struct SystemSpec {
  Matrix A;
  Matrix B;
  Matrix C;
  Matrix Q;
  Matrix R;
  int horizon = 1;
  Vector x0;

  Eigen::Index state_dim() const { return A.rows(); }
  Eigen::Index action_dim() const { return B.cols(); }
  Eigen::Index series_dim() const { return C.cols(); }
  Eigen::Index action_len() const { return action_dim() * horizon; }
  Eigen::Index series_len() const { return series_dim() * horizon; }

  /// Throws ConfigError on inconsistent dimensions, T < 1, or Q/R that are
  /// not symmetric (1e-12 absolute) positive definite.
  void validate() const;

  /// n = m = p = 1 system built from plain numbers.
  static SystemSpec scalar(double a, double b, double c, double q, double r,
                           int horizon, double x0);
};

/// Batch (non-recursive) form of the finite-horizon problem. Immutable once
/// built by make_batch_form(); every operation below is a pure function.
///
/// With u and s stacked time-major, x_{t+1} = A^{t+1} x0 + M_t u + N_t s and
///   J(u; s) = u' K u + 2 k(x0, s)' u + const,   k = k_const + k_lin s.
struct BatchForm {
  std::vector<Matrix> M;  // T blocks, n x mT
  std::vector<Matrix> N;  // T blocks, n x pT
  std::vector<Matrix> A_pow;  // A^{t+1}, t = 0..T-1
  Matrix K;               // mT x mT, SPD
  Matrix L;               // mT x pT
  Matrix Psi;             // pT x pT, PSD, L' K^{-1} L symmetrized
  Vector k_const;         // mT
  Matrix k_lin;           // mT x pT, equals L
  Eigen::LLT<Matrix> K_chol;

  Eigen::Index action_len() const { return K.rows(); }
  Eigen::Index series_len() const { return L.cols(); }
};

/// Fills M, N and the A powers only.
BatchForm stack_dynamics(const SystemSpec& spec);

/// Fills K, L, Psi, k_const, k_lin and the Cholesky factor of K.
void build_cost_form(const SystemSpec& spec, BatchForm& batch);

/// stack_dynamics followed by build_cost_form.
BatchForm make_batch_form(const SystemSpec& spec);

Vector linear_term(const BatchForm& batch, const Timeseries& s);

/// u* = -K^{-1} k(x0, s).
Vector solve_unconstrained(const BatchForm& batch, const Timeseries& s);

/// Simulates the plant on the real series and returns the quadratic cost,
/// including the x0' Q x0 term. This is the only cost evaluator used for
/// reporting; attacked actions are always costed against the real series.
double rollout_cost(const SystemSpec& spec, const Vector& u,
                    const Timeseries& s_real);

/// -K^{-1} L (s_hat - s).
Vector action_gap(const BatchForm& batch, const Timeseries& s_hat,
                  const Timeseries& s);

/// (s_hat - s)' Psi (s_hat - s).
double cost_delta_quadratic(const BatchForm& batch, const Timeseries& s_hat,
                            const Timeseries& s);

}  // namespace tsattack
