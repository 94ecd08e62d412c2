#include "tsattack/arima.hpp"

#include "tsattack/errors.hpp"

#include <Eigen/Eigenvalues>

#include <random>

namespace tsattack {

bool ArimaSpec::stationary() const {
  const auto p = static_cast<Eigen::Index>(ar_coeffs.size());
  if (p == 0) return true;
  // The companion matrix eigenvalues are the reciprocals of the polynomial
  // roots, so "roots outside the unit disc" means "eigenvalues inside".
  Matrix companion = Matrix::Zero(p, p);
  for (Eigen::Index i = 0; i < p; ++i) companion(0, i) = ar_coeffs[i];
  for (Eigen::Index i = 1; i < p; ++i) companion(i, i - 1) = 1.0;
  Eigen::EigenSolver<Matrix> es(companion, false);
  return es.eigenvalues().cwiseAbs().maxCoeff() < 1.0 - 1e-6;
}

void ArimaSpec::validate() const {
  if (ar_order < 0 || diff_order < 0 || ma_order < 0) {
    throw ConfigError("ARIMA orders must be non-negative");
  }
  if (static_cast<int>(ar_coeffs.size()) != ar_order ||
      static_cast<int>(ma_coeffs.size()) != ma_order) {
    throw ConfigError("ARIMA coefficient counts do not match the orders");
  }
  if (!(innovation_std >= 0.0)) throw ConfigError("innovation_std must be >= 0");
  if (!stationary()) throw ConfigError("ARIMA AR polynomial is not stationary");
}

std::vector<SeriesWindow> arima_generate(const ArimaSpec& spec, int count, int horizon) {
  spec.validate();
  if (horizon < 1) throw ConfigError("arima_generate: horizon must be >= 1");
  if (count < 0) throw ConfigError("arima_generate: count must be >= 0");

  const int burn = spec.burn_in();
  const int total = burn + horizon;
  std::vector<SeriesWindow> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int w = 0; w < count; ++w) {
    std::mt19937_64 rng(spec.seed + static_cast<std::uint64_t>(w));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> e(total), x(total);
    for (int t = 0; t < total; ++t) e[t] = spec.innovation_std * normal(rng);
    for (int t = 0; t < total; ++t) {
      double v = e[t];
      for (int i = 0; i < spec.ar_order && i < t; ++i) v += spec.ar_coeffs[i] * x[t - 1 - i];
      for (int j = 0; j < spec.ma_order && j < t; ++j) v += spec.ma_coeffs[j] * e[t - 1 - j];
      x[t] = v;
    }
    Vector y(horizon);
    for (int t = 0; t < horizon; ++t) y[t] = x[burn + t];
    for (int d = 0; d < spec.diff_order; ++d) {
      for (int t = 1; t < horizon; ++t) y[t] += y[t - 1];
    }
    SeriesWindow win;
    win.values = Timeseries(std::move(y));
    win.source_id = "arima";
    win.start_index = w;
    out.push_back(std::move(win));
  }
  return out;
}

ArimaSpec sample_arima_spec(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coeff(-0.9, 0.9);
  ArimaSpec spec;
  spec.ar_order = 2;
  spec.diff_order = 1;
  spec.ma_order = 2;
  spec.innovation_std = 1.0;
  spec.seed = seed;
  for (int attempt = 0; attempt < 1000; ++attempt) {
    spec.ar_coeffs = {coeff(rng), coeff(rng)};
    if (spec.stationary()) {
      spec.ma_coeffs = {coeff(rng), coeff(rng)};
      return spec;
    }
  }
  throw NumericalError("sample_arima_spec: no stationary draw in 1000 attempts");
}

std::vector<SeriesWindow> sample_random_arima(std::uint64_t seed, int horizon, int count) {
  return arima_generate(sample_arima_spec(seed), count, horizon);
}

}  // namespace tsattack
