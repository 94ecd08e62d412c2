#pragma once

#include <span>
#include <string_view>

namespace tsattack {

enum class Sidedness { TwoSided, Greater, Less };

/// Auto picks Exact for n <= kWilcoxonExactMaxN and Normal above.
enum class WilcoxonMethod { Auto, Exact, Normal };

Sidedness parse_sidedness(std::string_view name);

struct WilcoxonResult {
  double p_value = 1.0;
  double statistic = 0.0;  // W+ : sum of ranks of positive differences
  int n = 0;               // pairs left after dropping zero differences
  bool exact = false;
  bool degenerate = false;  // every difference was zero
};

/// Paired signed-rank test of a - b. Zero differences are dropped and tied
/// magnitudes get mid-ranks. The exact method counts the null distribution
/// over all 2^n sign assignments; the normal approximation uses tie and
/// continuity corrections.
///
/// All-zero differences give p = 1 with `degenerate` set. Throws
/// ContractError for unequal lengths, fewer than 5 non-zero differences, or
/// a forced Exact method with n > kWilcoxonExactLimit.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b,
                                    Sidedness side = Sidedness::TwoSided,
                                    WilcoxonMethod method = WilcoxonMethod::Auto);

/// Largest n for which Auto uses the exact distribution.
inline constexpr int kWilcoxonExactMaxN = 20;
/// Largest n the exact counts can represent.
inline constexpr int kWilcoxonExactLimit = 60;

}  // namespace tsattack
