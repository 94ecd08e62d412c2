#pragma once

#include "tsattack/series_io.hpp"

#include <cstdint>
#include <vector>

namespace tsattack {

/// ARIMA(ar_order, diff_order, ma_order) with Gaussian innovations:
///   w_t = sum_i ar_i w_{t-i} + e_t + sum_j ma_j e_{t-j},  y = (diff_order)-fold cumsum of w.
struct ArimaSpec {
  int ar_order = 0;
  int diff_order = 0;
  int ma_order = 0;
  std::vector<double> ar_coeffs;
  std::vector<double> ma_coeffs;
  double innovation_std = 1.0;
  std::uint64_t seed = 0;

  /// All roots of 1 - ar_1 z - ... - ar_p z^p lie outside the unit disc with
  /// margin 1e-6 (companion-matrix eigenvalues of modulus < 1 - 1e-6).
  bool stationary() const;

  /// Throws ConfigError on order/coefficient mismatch, negative std, or a
  /// non-stationary AR polynomial.
  void validate() const;

  int burn_in() const { return 10 * (ar_order + diff_order + ma_order + 1); }
};

/// `count` windows of length `horizon`; window w draws its innovations from
/// a generator seeded with spec.seed + w.
std::vector<SeriesWindow> arima_generate(const ArimaSpec& spec, int count, int horizon);

/// ARIMA(2,1,2) with coefficients uniform in [-0.9, 0.9], redrawn until the
/// AR part is stationary (at most 1000 draws), unit innovation std.
ArimaSpec sample_arima_spec(std::uint64_t seed);

/// sample_arima_spec(seed) followed by arima_generate.
std::vector<SeriesWindow> sample_random_arima(std::uint64_t seed, int horizon, int count);

}  // namespace tsattack
