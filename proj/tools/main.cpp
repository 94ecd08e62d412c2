// tsattack: adversarial forecast perturbations against LQR/MPC controllers.
//
//   tsattack gen-arima --seed 7 --count 100 --horizon 50 --out series.csv
//   tsattack attack cost --config cfg.json --delta 1 --in series.csv --out attacked.csv
//   tsattack attack constraint --target max-action --delta 1 --config cfg.json --in s.csv --out a.csv
//   tsattack experiment cost --config cfg.json --out-dir results
//   tsattack check jacobian --seed 1 --instances 50
//
// Exit codes: 0 success, 1 usage/config error, 2 numerical/oracle failure, 3 I/O error.

#include "tsattack/arima.hpp"
#include "tsattack/errors.hpp"
#include "tsattack/experiment.hpp"
#include "tsattack/report.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

using namespace tsattack;

enum ExitCode { kOk = 0, kUsage = 1, kNumerical = 2, kIo = 3 };

ExperimentConfig config_or_default(const std::string& path) {
  return path.empty() ? default_config() : load_config(path);
}

// Without a config file the default system takes its horizon from the input windows.
ExperimentConfig attack_config(const std::string& path, const std::vector<SeriesWindow>& windows) {
  ExperimentConfig cfg = config_or_default(path);
  if (path.empty() && !windows.empty()) {
    cfg.system.horizon = static_cast<int>(windows.front().values.size());
  }
  return cfg;
}

void write_attacked(const std::filesystem::path& path, const std::vector<SeriesWindow>& in,
                    const std::vector<Vector>& attacked) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "window_id,t,original,attacked\n";
  for (std::size_t w = 0; w < in.size(); ++w) {
    const Vector& s = in[w].values.values();
    for (Eigen::Index t = 0; t < s.size(); ++t) {
      out << in[w].start_index << ',' << t << ',' << format_number(s[t]) << ','
          << format_number(attacked[w][t]) << '\n';
    }
  }
  if (!out) throw IoError("write failed for " + path.string());
}

int cmd_gen_arima(std::uint64_t seed, int count, int horizon, const std::string& out) {
  const auto windows = sample_random_arima(seed, horizon, count);
  write_series_csv(out, windows);
  std::cout << "wrote " << windows.size() << " windows of length " << horizon << " to " << out
            << '\n';
  return kOk;
}

int cmd_attack_cost(const std::string& config, double delta, const std::string& in,
                    const std::string& out) {
  const auto windows = read_series_csv(in);
  const ExperimentConfig cfg = attack_config(config, windows);
  const BatchForm batch = make_batch_form(cfg.system);
  std::vector<Vector> attacked;
  double lambda1 = 0.0;
  for (const auto& w : windows) {
    const CostAttack atk = cost_attack(batch, w.values, delta);
    lambda1 = atk.eigen.lambda1;
    attacked.push_back(atk.canonical.s_hat.values());
    const Vector u = solve_unconstrained(batch, w.values);
    const Vector u_adv = solve_unconstrained(batch, atk.canonical.s_hat);
    const double j = rollout_cost(cfg.system, u, w.values);
    const double j_adv = rollout_cost(cfg.system, u_adv, w.values);
    std::cout << "window " << w.start_index << ": J " << format_number(j) << " -> "
              << format_number(j_adv) << " (+" << format_number(atk.canonical.attained) << ")\n";
  }
  write_attacked(out, windows, attacked);
  std::cout << "lambda1 = " << format_number(lambda1) << ", delta^2 lambda1 = "
            << format_number(delta * delta * lambda1) << '\n';
  return kOk;
}

int cmd_attack_constraint(const std::string& config, const std::string& target_name,
                          double delta, std::optional<int> steps,
                          std::optional<double> step_size, const std::string& in,
                          const std::string& out) {
  const auto windows = read_series_csv(in);
  const ExperimentConfig cfg = attack_config(config, windows);
  const TargetFunction target{parse_target(target_name)};
  const BatchForm batch = make_batch_form(cfg.system);
  const BoxBounds box =
      cfg.action_box ? *cfg.action_box : calibrate_action_box(batch, windows, cfg.auto_box);
  const ConstraintSet cons = compile_constraints(cfg.system, batch, box, cfg.state_box);

  const bool iterated = steps ? *steps > 1 || step_size.has_value()
                              : cfg.attack_mode == AttackMode::Iterated;
  std::vector<Vector> attacked;
  for (const auto& w : windows) {
    AttackResult r;
    if (iterated) {
      IteratedOptions opt;
      opt.steps = steps.value_or(cfg.steps);
      opt.step_size = step_size.value_or(cfg.step_size.value_or(delta / 10.0));
      r = iterated_attack(batch, cons, w.values, delta, target, opt);
    } else {
      r = single_step_attack(batch, cons, w.values, delta, target);
    }
    attacked.push_back(r.s_hat.values());
    std::string flags;
    for (AttackFlag f : r.flags) flags += " [" + to_string(f) + "]";
    std::cout << "window " << w.start_index << ": " << target_name << " = "
              << format_number(r.attained) << ", ||s_hat - s|| = " << format_number(r.norm_used)
              << flags << '\n';
  }
  write_attacked(out, windows, attacked);
  return kOk;
}

void print_summary(const ScenarioStats& stats) {
  std::cout << stats.experiment << " experiment: " << stats.records.size()
            << " records, lambda1 = " << format_number(stats.lambda1) << '\n';
  for (const auto& a : stats.aggregates) {
    std::cout << "  " << to_string(a.scenario) << " delta=" << format_number(a.delta) << ' '
              << to_string(a.metric) << ": mean +" << format_number(a.mean_pct) << "% (n="
              << a.n_used << ")\n";
  }
  for (const auto& p : stats.p_values) {
    if (p.metric != Metric::Cost && stats.experiment == "cost") continue;
    std::cout << "  p[" << to_string(p.scenario) << " vs random, delta=" << format_number(p.delta)
              << ", " << to_string(p.metric)
              << "] = " << (p.p_value ? format_number(*p.p_value) : std::string("n/a")) << '\n';
  }
}

int cmd_experiment(const std::string& kind, const std::string& config,
                   const std::string& out_dir) {
  ExperimentConfig cfg = config_or_default(config);
  if (!out_dir.empty()) cfg.output_dir = out_dir;
  const ScenarioStats stats =
      kind == "cost" ? run_cost_experiment(cfg) : run_constraint_experiment(cfg);
  emit_report(stats, cfg, cfg.output_dir);
  print_summary(stats);
  std::cout << "reports written to " << cfg.output_dir.string() << '\n';
  return kOk;
}

int cmd_check_jacobian(std::uint64_t seed, int instances) {
  const JacobianSelftestReport rep = jacobian_selftest(seed, instances);
  std::cout << "jacobian self-test: " << rep.compared << "/" << rep.instances << " compared ("
            << rep.skipped_weak << " weakly active, " << rep.skipped_infeasible
            << " infeasible skipped)\n"
            << "  max |implicit - finite difference| = " << format_number(rep.max_error)
            << " (worst seed " << rep.worst_seed << ")\n"
            << "  unconstrained max |implicit - analytic| = "
            << format_number(rep.max_error_unconstrained) << '\n';
  if (!rep.passed) {
    std::cerr << "FAILED instance seeds:";
    for (auto s : rep.failing_seeds) std::cerr << ' ' << s;
    std::cerr << '\n';
    return kNumerical;
  }
  std::cout << "PASS\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adversarial forecast perturbations against input-driven LQR/MPC controllers"};
  app.require_subcommand(1);
  app.set_version_flag("--version", tool_version());

  std::uint64_t seed = 0;
  int count = 100, horizon = 50, instances = 50;
  std::string out, in, config, out_dir, target = "max-action";
  double delta = 0.0;
  std::optional<int> steps;
  std::optional<double> step_size;

  auto* gen = app.add_subcommand("gen-arima", "Generate random ARIMA(2,1,2) windows");
  gen->add_option("--seed", seed, "Random seed")->required();
  gen->add_option("--count", count, "Number of windows")->check(CLI::NonNegativeNumber);
  gen->add_option("--horizon", horizon, "Window length")->check(CLI::PositiveNumber);
  gen->add_option("--out", out, "Output CSV (window_id,t,value)")->required();

  auto* attack = app.add_subcommand("attack", "Attack series from a CSV file");
  attack->require_subcommand(1);
  auto* atk_cost = attack->add_subcommand("cost", "Closed-form worst-case cost attack");
  auto* atk_cons = attack->add_subcommand("constraint", "Gradient attack on a constraint target");
  for (auto* sub : {atk_cost, atk_cons}) {
    sub->add_option("--config", config, "Config JSON (defaults to the scalar battery system)");
    sub->add_option("--delta", delta, "L2 perturbation budget")->required()->check(CLI::PositiveNumber);
    sub->add_option("--in", in, "Input series CSV (window_id,t,value)")->required();
    sub->add_option("--out", out, "Output CSV (window_id,t,original,attacked)")->required();
  }
  atk_cons->add_option("--target", target, "max-action | min-action | l1 | cost")
      ->check(CLI::IsMember({"max-action", "min-action", "l1", "cost"}));
  atk_cons->add_option("--steps", steps, "Projected ascent steps (1 = single step)")
      ->check(CLI::PositiveNumber);
  atk_cons->add_option("--step-size", step_size, "Ascent step length")->check(CLI::PositiveNumber);

  auto* exp = app.add_subcommand("experiment", "Run an experiment and write reports");
  exp->require_subcommand(1);
  auto* exp_cost = exp->add_subcommand("cost", "Cost attack vs random baseline");
  auto* exp_cons = exp->add_subcommand("constraint", "Constraint targets on the boxed controller");
  for (auto* sub : {exp_cost, exp_cons}) {
    sub->add_option("--config", config, "Config JSON");
    sub->add_option("--out-dir", out_dir, "Output directory (overrides config)");
  }

  auto* check = app.add_subcommand("check", "Oracle self-tests");
  check->require_subcommand(1);
  auto* check_jac = check->add_subcommand("jacobian", "Implicit vs finite-difference Jacobians");
  check_jac->add_option("--seed", seed, "Random seed");
  check_jac->add_option("--instances", instances, "Number of instances")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (gen->parsed()) return cmd_gen_arima(seed, count, horizon, out);
    if (atk_cost->parsed()) return cmd_attack_cost(config, delta, in, out);
    if (atk_cons->parsed()) {
      return cmd_attack_constraint(config, target, delta, steps, step_size, in, out);
    }
    if (exp_cost->parsed()) return cmd_experiment("cost", config, out_dir);
    if (exp_cons->parsed()) return cmd_experiment("constraint", config, out_dir);
    if (check_jac->parsed()) return cmd_check_jacobian(seed, instances);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsage;
  } catch (const ContractError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumerical;
  }
  return kUsage;
}
