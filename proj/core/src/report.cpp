#include "tsattack/report.hpp"

#include "config_json.hpp"
#include "tsattack/errors.hpp"

#include <cmath>
#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#ifndef TSATTACK_VERSION
#define TSATTACK_VERSION "0.0.0"
#endif

namespace tsattack {

using nlohmann::json;

std::string tool_version() { return TSATTACK_VERSION; }

namespace {

std::string join_flags(const std::set<AttackFlag>& flags) {
  std::string out;
  for (AttackFlag f : flags) {
    if (!out.empty()) out += '|';
    out += to_string(f);
  }
  return out;
}

json number_or_null(double x) {
  if (std::isfinite(x)) return x;
  return nullptr;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

json vector_json(const Vector& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(number_or_null(v[i]));
  return arr;
}

}  // namespace

std::string records_csv(const std::vector<SeriesRecord>& records) {
  std::ostringstream out;
  out << kRecordsHeader << '\n';
  for (const auto& r : records) {
    out << r.series_id << ',' << format_number(r.delta) << ',' << to_string(r.scenario) << ','
        << format_number(r.j_orig) << ',' << format_number(r.j_adv) << ','
        << format_number(r.max_u_orig) << ',' << format_number(r.max_u_adv) << ','
        << format_number(r.l1_orig) << ',' << format_number(r.l1_adv) << ','
        << format_number(r.norm_used) << ',' << join_flags(r.flags) << '\n';
  }
  return out.str();
}

void emit_report(const ScenarioStats& stats, const ExperimentConfig& cfg,
                 const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

  write_text(out_dir / "records.csv", records_csv(stats.records));

  json summary;
  summary["tool"] = "tsattack";
  summary["version"] = tool_version();
  summary["experiment"] = stats.experiment;
  summary["seed"] = cfg.seed;
  summary["config"] = detail::config_as_json(cfg);
  summary["lambda1"] = stats.lambda1;
  summary["records"] = stats.records.size();
  if (stats.action_box) {
    summary["action_box"] = {{"lower", vector_json(stats.action_box->lower)},
                             {"upper", vector_json(stats.action_box->upper)}};
  } else {
    summary["action_box"] = nullptr;
  }
  json aggs = json::array();
  for (const auto& a : stats.aggregates) {
    aggs.push_back({{"scenario", to_string(a.scenario)},
                    {"delta", a.delta},
                    {"metric", to_string(a.metric)},
                    {"mean_pct_increase", number_or_null(a.mean_pct)},
                    {"n_used", a.n_used},
                    {"n_excluded", a.n_excluded},
                    {"n_infeasible", a.n_infeasible}});
  }
  summary["aggregates"] = aggs;
  json ps = json::array();
  for (const auto& p : stats.p_values) {
    ps.push_back({{"scenario", to_string(p.scenario)},
                  {"baseline", "random"},
                  {"delta", p.delta},
                  {"metric", to_string(p.metric)},
                  {"p_value", p.p_value ? json(*p.p_value) : json(nullptr)},
                  {"n", p.n},
                  {"degenerate", p.degenerate}});
  }
  summary["p_values"] = ps;
  write_text(out_dir / "summary.json", summary.dump(2) + "\n");

  // one plot-ready long-format file per scenario
  std::map<Scenario, std::ostringstream> per_scenario;
  for (const auto& r : stats.records) {
    auto [it, fresh] = per_scenario.try_emplace(r.scenario);
    std::ostringstream& out = it->second;
    if (fresh) out << "series_id,delta,t,original,attacked,u_orig,u_adv\n";
    const Eigen::Index len = std::max({r.s.size(), r.s_hat.size(), r.u_orig.size(), r.u_adv.size()});
    for (Eigen::Index t = 0; t < len; ++t) {
      const double nan = std::nan("");
      out << r.series_id << ',' << format_number(r.delta) << ',' << t << ','
          << format_number(t < r.s.size() ? r.s[t] : nan) << ','
          << format_number(t < r.s_hat.size() ? r.s_hat[t] : nan) << ','
          << format_number(t < r.u_orig.size() ? r.u_orig[t] : nan) << ','
          << format_number(t < r.u_adv.size() ? r.u_adv[t] : nan) << '\n';
    }
  }
  for (auto& [scenario, text] : per_scenario) {
    write_text(out_dir / ("series_" + to_string(scenario) + ".csv"), text.str());
  }
}

}  // namespace tsattack
