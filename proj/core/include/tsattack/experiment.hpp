#pragma once

#include "tsattack/config.hpp"
#include "tsattack/wilcoxon.hpp"

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace tsattack {

/// One (series, delta, scenario) outcome. Costs are always measured on the
/// real series; `s_hat` only drives the controller.
struct SeriesRecord {
  std::string series_id;
  int window_index = 0;
  double delta = 0.0;
  Scenario scenario = Scenario::Random;
  double j_orig = 0.0;
  double j_adv = 0.0;
  double max_u_orig = 0.0;
  double max_u_adv = 0.0;
  double l1_orig = 0.0;
  double l1_adv = 0.0;
  double norm_used = 0.0;
  std::set<AttackFlag> flags;

  Vector s;
  Vector s_hat;
  Vector u_orig;
  Vector u_adv;
};

enum class Metric { Cost, MaxAction, L1 };
std::string to_string(Metric m);

/// Mean of per-series percent increases 100 (adv - orig) / orig over series
/// with orig > 0 and a feasible attacked problem.
struct MetricAggregate {
  Scenario scenario = Scenario::Random;
  double delta = 0.0;
  Metric metric = Metric::Cost;
  double mean_pct = 0.0;
  int n_used = 0;
  int n_excluded = 0;  // orig <= 0
  int n_infeasible = 0;
};

/// Paired two-sided signed-rank test of a scenario against the random
/// baseline on the attacked metric, at one delta.
struct PValueEntry {
  Scenario scenario = Scenario::Random;
  double delta = 0.0;
  Metric metric = Metric::Cost;
  std::optional<double> p_value;  // empty when fewer than 5 usable pairs
  int n = 0;
  bool degenerate = false;
};

struct ScenarioStats {
  std::string experiment;  // "cost" or "constraint"
  std::vector<SeriesRecord> records;
  std::vector<MetricAggregate> aggregates;
  std::vector<PValueEntry> p_values;
  double lambda1 = 0.0;
  std::optional<BoxBounds> action_box;  // bounds actually used
};

/// Windows described by the dataset config, normalized as configured.
std::vector<SeriesWindow> load_dataset(const ExperimentConfig& cfg);

/// Aggregates and p-values derived from records alone.
std::vector<MetricAggregate> aggregate_records(const std::vector<SeriesRecord>& records,
                                               const std::vector<double>& deltas,
                                               const std::vector<Scenario>& scenarios);
std::vector<PValueEntry> compare_to_random(const std::vector<SeriesRecord>& records,
                                           const std::vector<double>& deltas,
                                           const std::vector<Scenario>& scenarios);

/// Unconstrained controller; scenarios default to {cost-adv, random}.
ScenarioStats run_cost_experiment(const ExperimentConfig& cfg);
ScenarioStats run_cost_experiment(const ExperimentConfig& cfg,
                                  const std::vector<SeriesWindow>& windows);

/// Box-constrained controller; scenarios default to
/// {max-action, l1, random, cost-adv}. Without explicit bounds the box is
/// +/- factor * percentile(|u*|) over the unattacked dataset.
ScenarioStats run_constraint_experiment(const ExperimentConfig& cfg);
ScenarioStats run_constraint_experiment(const ExperimentConfig& cfg,
                                        const std::vector<SeriesWindow>& windows);

/// Symmetric bound from the unattacked unconstrained actions.
BoxBounds calibrate_action_box(const BatchForm& batch, const std::vector<SeriesWindow>& windows,
                               const AutoBox& rule);

/// Seed of the random-sphere draw for (window, delta index).
std::uint64_t random_draw_seed(std::uint64_t base, int window_index, int delta_index);

struct JacobianSelftestReport {
  int instances = 0;
  int compared = 0;
  int skipped_weak = 0;
  int skipped_infeasible = 0;
  int unconstrained = 0;
  double max_error = 0.0;                // over all compared instances
  double max_error_unconstrained = 0.0;  // analytic (-K^{-1} L)' vs implicit
  std::uint64_t worst_seed = 0;
  std::vector<std::uint64_t> failing_seeds;
  bool passed = true;
};

/// Implicit vs finite-difference Jacobians on random small instances
/// (n, m, p <= 2, T <= 8). Instances cycle through unconstrained, a clamping
/// action box, and a state upper bound cutting the unconstrained trajectory.
JacobianSelftestReport jacobian_selftest(std::uint64_t seed, int instances,
                                         double tolerance = 1e-5);

}  // namespace tsattack
