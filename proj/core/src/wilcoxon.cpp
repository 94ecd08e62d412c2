#include "tsattack/wilcoxon.hpp"

#include "tsattack/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

namespace tsattack {

Sidedness parse_sidedness(std::string_view name) {
  if (name == "two-sided") return Sidedness::TwoSided;
  if (name == "greater") return Sidedness::Greater;
  if (name == "less") return Sidedness::Less;
  throw ConfigError("unknown sidedness '" + std::string(name) + "'");
}

namespace {

struct Ranked {
  std::vector<long> doubled_ranks;  // 2 * mid-rank, always an integer
  std::vector<bool> positive;
  double tie_term = 0.0;            // sum over tie groups of t^3 - t
};

Ranked rank_differences(const std::vector<double>& d) {
  const std::size_t n = d.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return std::abs(d[a]) < std::abs(d[b]); });
  Ranked r;
  r.doubled_ranks.assign(n, 0);
  r.positive.assign(n, false);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && std::abs(d[idx[j + 1]]) == std::abs(d[idx[i]])) ++j;
    // positions i..j (0-based) share rank ((i+1) + (j+1)) / 2
    const long doubled = static_cast<long>(i + 1 + j + 1);
    for (std::size_t k = i; k <= j; ++k) r.doubled_ranks[idx[k]] = doubled;
    const double t = static_cast<double>(j - i + 1);
    r.tie_term += t * t * t - t;
    i = j + 1;
  }
  for (std::size_t k = 0; k < n; ++k) r.positive[k] = d[k] > 0.0;
  return r;
}

double normal_upper(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

}  // namespace

WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b,
                                    Sidedness side, WilcoxonMethod method) {
  if (a.size() != b.size()) {
    throw ContractError("wilcoxon_signed_rank: samples have different lengths");
  }
  std::vector<double> d;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    if (diff != 0.0) d.push_back(diff);
  }
  WilcoxonResult res;
  res.n = static_cast<int>(d.size());
  if (d.empty()) {
    res.degenerate = true;
    res.p_value = 1.0;
    return res;
  }
  if (res.n < 5) {
    throw ContractError("wilcoxon_signed_rank: need at least 5 non-zero differences, got " +
                        std::to_string(res.n));
  }

  const Ranked r = rank_differences(d);
  long w_doubled = 0;
  for (std::size_t k = 0; k < d.size(); ++k) {
    if (r.positive[k]) w_doubled += r.doubled_ranks[k];
  }
  res.statistic = 0.5 * static_cast<double>(w_doubled);
  const double n = static_cast<double>(res.n);

  if (method == WilcoxonMethod::Exact && res.n > kWilcoxonExactLimit) {
    throw ContractError("wilcoxon_signed_rank: exact method limited to n <= " +
                        std::to_string(kWilcoxonExactLimit));
  }
  const bool exact = method == WilcoxonMethod::Exact ||
                     (method == WilcoxonMethod::Auto && res.n <= kWilcoxonExactMaxN);
  if (exact) {
    res.exact = true;
    const long total = std::accumulate(r.doubled_ranks.begin(), r.doubled_ranks.end(), 0L);
    // counts[s] = number of sign assignments whose positive doubled ranks sum to s
    std::vector<std::uint64_t> counts(static_cast<std::size_t>(total) + 1, 0);
    counts[0] = 1;
    long reach = 0;
    for (long rank : r.doubled_ranks) {
      for (long s = reach; s >= 0; --s) counts[s + rank] += counts[s];
      reach += rank;
    }
    std::uint64_t le = 0, ge = 0;
    for (long s = 0; s <= total; ++s) {
      if (s <= w_doubled) le += counts[s];
      if (s >= w_doubled) ge += counts[s];
    }
    const double denom = std::ldexp(1.0, res.n);
    const double p_le = static_cast<double>(le) / denom;
    const double p_ge = static_cast<double>(ge) / denom;
    switch (side) {
      case Sidedness::Greater: res.p_value = p_ge; break;
      case Sidedness::Less: res.p_value = p_le; break;
      case Sidedness::TwoSided: res.p_value = std::min(1.0, 2.0 * std::min(p_le, p_ge)); break;
    }
    return res;
  }

  const double mean = n * (n + 1.0) / 4.0;
  const double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - r.tie_term / 48.0;
  const double sd = std::sqrt(var);
  const double w = res.statistic;
  switch (side) {
    case Sidedness::Greater: res.p_value = normal_upper((w - mean - 0.5) / sd); break;
    case Sidedness::Less: res.p_value = 1.0 - normal_upper((w - mean + 0.5) / sd); break;
    case Sidedness::TwoSided:
      res.p_value = std::min(1.0, 2.0 * normal_upper((std::abs(w - mean) - 0.5) / sd));
      break;
  }
  return res;
}

}  // namespace tsattack
