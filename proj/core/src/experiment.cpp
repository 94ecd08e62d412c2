#include "tsattack/experiment.hpp"

#include "tsattack/arima.hpp"
#include "tsattack/errors.hpp"
#include "tsattack/instances.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <thread>

namespace tsattack {

std::string to_string(Metric m) {
  switch (m) {
    case Metric::Cost: return "cost";
    case Metric::MaxAction: return "max_u";
    case Metric::L1: return "l1";
  }
  return "unknown";
}

std::uint64_t random_draw_seed(std::uint64_t base, int window_index, int delta_index) {
  return derive_seed(base, static_cast<std::uint64_t>(window_index),
                     static_cast<std::uint64_t>(delta_index), 0x72616e64ULL);
}

std::vector<SeriesWindow> load_dataset(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<SeriesWindow> windows;
  const auto len = static_cast<int>(cfg.system.series_len());
  if (cfg.dataset.kind == DatasetConfig::Kind::Arima) {
    windows = sample_random_arima(cfg.dataset_seed(), len, cfg.dataset.count);
  } else {
    windows = load_series_windows(cfg.dataset.path, cfg.dataset.column, len, cfg.dataset.stride);
  }
  return normalize_windows(windows, cfg.normalization);
}

namespace {

// Runs body(i) for i in [0, count) on up to `workers` threads. Each index
// writes only its own slot, so results do not depend on scheduling. The
// exception of the lowest failing index is rethrown.
template <typename Body>
void parallel_for(int count, int workers, Body body) {
  if (workers <= 0) workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min(workers, std::max(count, 1));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

struct Context {
  const ExperimentConfig& cfg;
  const BatchForm& batch;
  const ConstraintSet& cons;
  bool constrained;
  std::vector<Scenario> scenarios;
};

std::optional<Vector> controller(const Context& ctx, const Timeseries& s) {
  if (!ctx.constrained) return solve_unconstrained(ctx.batch, s);
  const QpSolution sol = solve_qp(ctx.batch, ctx.cons, s);
  if (!sol.optimal()) return std::nullopt;
  return sol.u;
}

AttackResult gradient_attack(const Context& ctx, const Timeseries& s, double delta,
                             TargetKind kind) {
  const TargetFunction target{kind};
  if (ctx.cfg.attack_mode == AttackMode::SingleStep) {
    return single_step_attack(ctx.batch, ctx.cons, s, delta, target);
  }
  IteratedOptions opt;
  opt.steps = ctx.cfg.steps;
  opt.step_size = ctx.cfg.step_size.value_or(delta / 10.0);
  return iterated_attack(ctx.batch, ctx.cons, s, delta, target, opt);
}

std::vector<SeriesRecord> run_window(const Context& ctx, const SeriesWindow& window,
                                     int index) {
  const Timeseries& s = window.values;
  const SystemSpec& spec = ctx.cfg.system;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<SeriesRecord> out;

  const std::optional<Vector> u_orig = controller(ctx, s);
  for (std::size_t di = 0; di < ctx.cfg.deltas.size(); ++di) {
    const double delta = ctx.cfg.deltas[di];
    for (Scenario scenario : ctx.scenarios) {
      SeriesRecord rec;
      rec.series_id = window.id();
      rec.window_index = index;
      rec.delta = delta;
      rec.scenario = scenario;
      rec.s = s.values();
      if (!u_orig) {
        rec.flags.insert(AttackFlag::Infeasible);
        rec.j_orig = rec.j_adv = rec.max_u_orig = rec.max_u_adv = nan;
        rec.l1_orig = rec.l1_adv = rec.norm_used = nan;
        out.push_back(std::move(rec));
        continue;
      }
      rec.u_orig = *u_orig;
      rec.j_orig = rollout_cost(spec, *u_orig, s);
      rec.max_u_orig = u_orig->maxCoeff();
      rec.l1_orig = u_orig->lpNorm<1>();

      AttackResult attack;
      switch (scenario) {
        case Scenario::CostAdv: attack = cost_attack(ctx.batch, s, delta).canonical; break;
        case Scenario::Random:
          attack = random_sphere_attack(s, delta, random_draw_seed(ctx.cfg.seed, index,
                                                                   static_cast<int>(di)));
          break;
        case Scenario::MaxAction: attack = gradient_attack(ctx, s, delta, TargetKind::MaxAction); break;
        case Scenario::MinAction: attack = gradient_attack(ctx, s, delta, TargetKind::MinAction); break;
        case Scenario::L1: attack = gradient_attack(ctx, s, delta, TargetKind::L1Energy); break;
        case Scenario::CostGradient:
          attack = gradient_attack(ctx, s, delta, TargetKind::CostChange);
          break;
      }
      rec.flags = attack.flags;
      rec.norm_used = attack.norm_used;
      rec.s_hat = attack.s_hat.values();

      const std::optional<Vector> u_adv = controller(ctx, attack.s_hat);
      if (!u_adv) {
        rec.flags.insert(AttackFlag::Infeasible);
        rec.j_adv = std::numeric_limits<double>::infinity();
        rec.max_u_adv = rec.l1_adv = nan;
      } else {
        rec.u_adv = *u_adv;
        rec.j_adv = rollout_cost(spec, *u_adv, s);
        rec.max_u_adv = u_adv->maxCoeff();
        rec.l1_adv = u_adv->lpNorm<1>();
      }
      out.push_back(std::move(rec));
    }
  }
  return out;
}

ScenarioStats run_experiment(const Context& ctx, const std::vector<SeriesWindow>& windows,
                             std::string name) {
  const int count = static_cast<int>(windows.size());
  std::vector<std::vector<SeriesRecord>> per_window(static_cast<std::size_t>(count));
  parallel_for(count, ctx.cfg.workers, [&](int i) {
    if (windows[i].values.size() != ctx.batch.series_len()) {
      throw ConfigError("window " + windows[i].id() + " has length " +
                        std::to_string(windows[i].values.size()) + ", expected " +
                        std::to_string(ctx.batch.series_len()));
    }
    per_window[static_cast<std::size_t>(i)] = run_window(ctx, windows[i], i);
  });

  ScenarioStats stats;
  stats.experiment = std::move(name);
  for (auto& recs : per_window) {
    for (auto& r : recs) stats.records.push_back(std::move(r));
  }
  stats.aggregates = aggregate_records(stats.records, ctx.cfg.deltas, ctx.scenarios);
  stats.p_values = compare_to_random(stats.records, ctx.cfg.deltas, ctx.scenarios);
  stats.lambda1 = dominant_eigenpair(ctx.batch.Psi).lambda1;
  return stats;
}

std::pair<double, double> metric_pair(const SeriesRecord& r, Metric m) {
  switch (m) {
    case Metric::Cost: return {r.j_orig, r.j_adv};
    case Metric::MaxAction: return {r.max_u_orig, r.max_u_adv};
    case Metric::L1: return {r.l1_orig, r.l1_adv};
  }
  return {0.0, 0.0};
}

constexpr Metric kMetrics[] = {Metric::Cost, Metric::MaxAction, Metric::L1};

}  // namespace

std::vector<MetricAggregate> aggregate_records(const std::vector<SeriesRecord>& records,
                                               const std::vector<double>& deltas,
                                               const std::vector<Scenario>& scenarios) {
  std::vector<MetricAggregate> out;
  for (double delta : deltas) {
    for (Scenario sc : scenarios) {
      for (Metric m : kMetrics) {
        MetricAggregate agg;
        agg.scenario = sc;
        agg.delta = delta;
        agg.metric = m;
        double sum = 0.0;
        for (const auto& r : records) {
          if (r.delta != delta || r.scenario != sc) continue;
          if (r.flags.count(AttackFlag::Infeasible)) {
            ++agg.n_infeasible;
            continue;
          }
          const auto [orig, adv] = metric_pair(r, m);
          if (!(orig > 0.0)) {
            ++agg.n_excluded;
            continue;
          }
          sum += 100.0 * (adv - orig) / orig;
          ++agg.n_used;
        }
        agg.mean_pct = agg.n_used > 0 ? sum / agg.n_used : std::numeric_limits<double>::quiet_NaN();
        out.push_back(agg);
      }
    }
  }
  return out;
}

std::vector<PValueEntry> compare_to_random(const std::vector<SeriesRecord>& records,
                                           const std::vector<double>& deltas,
                                           const std::vector<Scenario>& scenarios) {
  std::vector<PValueEntry> out;
  if (std::find(scenarios.begin(), scenarios.end(), Scenario::Random) == scenarios.end()) {
    return out;
  }
  for (double delta : deltas) {
    std::map<int, const SeriesRecord*> random_by_window;
    for (const auto& r : records) {
      if (r.delta == delta && r.scenario == Scenario::Random) random_by_window[r.window_index] = &r;
    }
    for (Scenario sc : scenarios) {
      if (sc == Scenario::Random) continue;
      for (Metric m : kMetrics) {
        std::vector<double> a, b;
        for (const auto& r : records) {
          if (r.delta != delta || r.scenario != sc) continue;
          const auto it = random_by_window.find(r.window_index);
          if (it == random_by_window.end()) continue;
          const double x = metric_pair(r, m).second;
          const double y = metric_pair(*it->second, m).second;
          if (std::isfinite(x) && std::isfinite(y)) {
            a.push_back(x);
            b.push_back(y);
          }
        }
        PValueEntry e;
        e.scenario = sc;
        e.delta = delta;
        e.metric = m;
        e.n = static_cast<int>(a.size());
        try {
          const WilcoxonResult w = wilcoxon_signed_rank(a, b, Sidedness::TwoSided);
          e.p_value = w.p_value;
          e.degenerate = w.degenerate;
        } catch (const ContractError&) {
          // too few usable pairs
        }
        out.push_back(e);
      }
    }
  }
  return out;
}

ScenarioStats run_cost_experiment(const ExperimentConfig& cfg) {
  return run_cost_experiment(cfg, load_dataset(cfg));
}

ScenarioStats run_cost_experiment(const ExperimentConfig& cfg,
                                  const std::vector<SeriesWindow>& windows) {
  cfg.validate();
  const BatchForm batch = make_batch_form(cfg.system);
  const ConstraintSet cons = ConstraintSet::none(batch.action_len(), batch.series_len());
  Context ctx{cfg, batch, cons, false,
              cfg.scenarios.empty() ? std::vector<Scenario>{Scenario::CostAdv, Scenario::Random}
                                    : cfg.scenarios};
  return run_experiment(ctx, windows, "cost");
}

BoxBounds calibrate_action_box(const BatchForm& batch, const std::vector<SeriesWindow>& windows,
                               const AutoBox& rule) {
  std::vector<double> mags;
  for (const auto& w : windows) {
    const Vector u = solve_unconstrained(batch, w.values);
    for (Eigen::Index i = 0; i < u.size(); ++i) mags.push_back(std::abs(u[i]));
  }
  if (mags.empty()) throw ConfigError("calibrate_action_box: dataset is empty");
  std::sort(mags.begin(), mags.end());
  // linear interpolation between closest ranks
  const double pos = rule.percentile / 100.0 * static_cast<double>(mags.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, mags.size() - 1);
  const double pct = mags[lo] + (pos - static_cast<double>(lo)) * (mags[hi] - mags[lo]);
  const double bound = rule.factor * pct;
  if (!(bound > 0.0)) throw ConfigError("calibrate_action_box: calibrated bound is zero");
  const auto m = batch.action_len() / static_cast<Eigen::Index>(batch.M.size());
  return BoxBounds::symmetric(bound, m);
}

ScenarioStats run_constraint_experiment(const ExperimentConfig& cfg) {
  return run_constraint_experiment(cfg, load_dataset(cfg));
}

ScenarioStats run_constraint_experiment(const ExperimentConfig& cfg,
                                        const std::vector<SeriesWindow>& windows) {
  cfg.validate();
  const BatchForm batch = make_batch_form(cfg.system);
  const BoxBounds box = cfg.action_box ? *cfg.action_box
                                       : calibrate_action_box(batch, windows, cfg.auto_box);
  const ConstraintSet cons = compile_constraints(cfg.system, batch, box, cfg.state_box);
  Context ctx{cfg, batch, cons, true,
              cfg.scenarios.empty()
                  ? std::vector<Scenario>{Scenario::MaxAction, Scenario::L1, Scenario::Random,
                                          Scenario::CostAdv}
                  : cfg.scenarios};
  ScenarioStats stats = run_experiment(ctx, windows, "constraint");
  stats.action_box = box;
  return stats;
}

JacobianSelftestReport jacobian_selftest(std::uint64_t seed, int instances, double tolerance) {
  JacobianSelftestReport rep;
  const InstanceLimits limits{2, 2, 2, 8};
  double worst = -1.0;
  for (int i = 0; i < instances; ++i) {
    ++rep.instances;
    const std::uint64_t inst_seed = derive_seed(seed, static_cast<std::uint64_t>(i));
    std::mt19937_64 rng(inst_seed);
    const SystemSpec spec = random_system(rng, limits);
    const BatchForm batch = make_batch_form(spec);
    const Timeseries s = random_series(rng, batch.series_len());

    std::optional<BoxBounds> action_box, state_box;
    const int kind = i % 3;
    if (kind == 1) action_box = clamping_action_box(batch, s, 0.6);
    if (kind == 2) {
      // Upper state bound cutting the unconstrained trajectory.
      const Vector u = solve_unconstrained(batch, s);
      const auto n = spec.state_dim();
      Vector hi = Vector::Constant(n, -std::numeric_limits<double>::infinity());
      Vector lo = Vector::Constant(n, std::numeric_limits<double>::infinity());
      for (int t = 0; t < spec.horizon; ++t) {
        const Vector x = batch.A_pow[t] * spec.x0 + batch.M[t] * u + batch.N[t] * s.values();
        hi = hi.cwiseMax(x);
        lo = lo.cwiseMin(x);
      }
      state_box = BoxBounds{Vector::Constant(n, -std::numeric_limits<double>::infinity()),
                            hi - 0.1 * (hi - lo)};
    }
    const ConstraintSet cons = compile_constraints(spec, batch, action_box, state_box);
    const QpSolution sol = solve_qp(batch, cons, s);
    if (!sol.optimal()) {
      ++rep.skipped_infeasible;
      continue;
    }
    if (sol.weakly_active) {
      ++rep.skipped_weak;
      continue;
    }
    const SolutionJacobian implicit = solution_jacobian(batch, cons, sol);
    SolutionJacobian numeric;
    try {
      numeric = finite_difference_jacobian(batch, cons, s, 1e-6);
    } catch (const NumericalError&) {
      ++rep.skipped_infeasible;
      continue;
    }
    ++rep.compared;
    const double err = (implicit.J - numeric.J).cwiseAbs().maxCoeff();
    if (err > worst) {
      worst = err;
      rep.worst_seed = inst_seed;
    }
    rep.max_error = std::max(rep.max_error, err);
    if (cons.rows() == 0) {
      ++rep.unconstrained;
      const Matrix analytic = (-batch.K_chol.solve(batch.L)).transpose();
      rep.max_error_unconstrained =
          std::max(rep.max_error_unconstrained, (implicit.J - analytic).cwiseAbs().maxCoeff());
    }
    if (err > tolerance) {
      rep.failing_seeds.push_back(inst_seed);
      rep.passed = false;
    }
  }
  return rep;
}

}  // namespace tsattack
