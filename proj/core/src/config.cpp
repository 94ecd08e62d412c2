#include "tsattack/config.hpp"

#include "config_json.hpp"
#include "tsattack/errors.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace tsattack {

using nlohmann::json;

Scenario parse_scenario(std::string_view name) {
  if (name == "cost-adv") return Scenario::CostAdv;
  if (name == "random") return Scenario::Random;
  if (name == "max-action") return Scenario::MaxAction;
  if (name == "min-action") return Scenario::MinAction;
  if (name == "l1") return Scenario::L1;
  if (name == "cost-gradient") return Scenario::CostGradient;
  throw ConfigError("unknown scenario '" + std::string(name) + "'");
}

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::CostAdv: return "cost-adv";
    case Scenario::Random: return "random";
    case Scenario::MaxAction: return "max-action";
    case Scenario::MinAction: return "min-action";
    case Scenario::L1: return "l1";
    case Scenario::CostGradient: return "cost-gradient";
  }
  return "unknown";
}

void ExperimentConfig::validate() const {
  system.validate();
  if (deltas.empty()) throw ConfigError("deltas must not be empty");
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    if (!(deltas[i] > 0.0) || !std::isfinite(deltas[i])) {
      throw ConfigError("deltas must be finite and > 0");
    }
    if (i > 0 && !(deltas[i] > deltas[i - 1])) {
      throw ConfigError("deltas must be strictly ascending");
    }
  }
  if (dataset.kind == DatasetConfig::Kind::Csv) {
    if (dataset.path.empty() || dataset.column.empty()) {
      throw ConfigError("csv dataset needs both 'path' and 'column'");
    }
    if (system.series_dim() != 1) throw ConfigError("csv datasets require p = 1");
  }
  if (dataset.count < 0) throw ConfigError("dataset count must be >= 0");
  if (steps < 1) throw ConfigError("attack steps must be >= 1");
  if (step_size && !(*step_size > 0.0)) throw ConfigError("attack step_size must be > 0");
  for (const auto* box : {&action_box, &state_box}) {
    if (!*box) continue;
    if ((*box)->lower.size() != (*box)->upper.size()) {
      throw ConfigError("box bounds need lower and upper of equal length");
    }
    if (((*box)->lower.array() > (*box)->upper.array()).any()) {
      throw ConfigError("box bounds need lower <= upper");
    }
  }
  if (!(auto_box.factor > 0.0) || !(auto_box.percentile > 0.0) || auto_box.percentile > 100.0) {
    throw ConfigError("auto_box needs factor > 0 and percentile in (0, 100]");
  }
  if (workers < 0) throw ConfigError("workers must be >= 0");
}

namespace detail {

namespace {

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed,
                    const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
  const std::set<std::string> names(allowed.begin(), allowed.end());
  for (const auto& [key, _] : obj.items()) {
    if (!names.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

double number(const json& v, const std::string& where) {
  if (v.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (!v.is_number()) throw ConfigError(where + " must be a number");
  return v.get<double>();
}

// Accepts a plain number (1 x 1) or a list of rows.
Matrix matrix_value(const json& v, const std::string& where) {
  if (v.is_number()) return Matrix::Constant(1, 1, v.get<double>());
  if (!v.is_array() || v.empty()) throw ConfigError(where + " must be a number or list of rows");
  const auto rows = static_cast<Eigen::Index>(v.size());
  if (!v[0].is_array()) throw ConfigError(where + " must be a list of rows");
  const auto cols = static_cast<Eigen::Index>(v[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = v[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw ConfigError(where + ": ragged rows");
    }
    for (Eigen::Index j = 0; j < cols; ++j) {
      m(i, j) = number(row[static_cast<std::size_t>(j)], where);
    }
  }
  return m;
}

// Accepts a number or a flat list; null entries mean "unbounded" (+/- inf).
Vector vector_value(const json& v, const std::string& where, double null_as) {
  auto one = [&](const json& x) {
    if (x.is_null()) return null_as;
    return number(x, where);
  };
  if (!v.is_array()) return Vector::Constant(1, one(v));
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = one(v[i]);
  return out;
}

BoxBounds box_value(const json& v, const std::string& where) {
  reject_unknown(v, {"lower", "upper"}, where);
  const double inf = std::numeric_limits<double>::infinity();
  BoxBounds b;
  b.lower = v.contains("lower") ? vector_value(v["lower"], where + ".lower", -inf)
                                : Vector::Constant(1, -inf);
  b.upper = v.contains("upper") ? vector_value(v["upper"], where + ".upper", inf)
                                : Vector::Constant(1, inf);
  if (b.lower.size() == 1 && b.upper.size() > 1) {
    b.lower = Vector::Constant(b.upper.size(), b.lower[0]);
  }
  if (b.upper.size() == 1 && b.lower.size() > 1) {
    b.upper = Vector::Constant(b.lower.size(), b.upper[0]);
  }
  return b;
}

json vector_json(const Vector& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::isinf(v[i])) {
      arr.push_back(nullptr);
    } else {
      arr.push_back(v[i]);
    }
  }
  return arr;
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(vector_json(m.row(i).transpose()));
  return rows;
}

json box_json(const BoxBounds& b) { return {{"lower", vector_json(b.lower)}, {"upper", vector_json(b.upper)}}; }

}  // namespace

ExperimentConfig config_from_json(const json& doc) {
  reject_unknown(doc,
                 {"system", "deltas", "scenarios", "dataset", "normalization", "action_box",
                  "auto_box", "state_box", "attack", "seed", "output_dir", "workers"},
                 "config");
  ExperimentConfig cfg = default_config();

  if (doc.contains("dataset")) {
    const json& d = doc["dataset"];
    reject_unknown(d, {"kind", "count", "seed", "path", "column", "stride"}, "dataset");
    const std::string kind = d.value("kind", "arima");
    if (kind == "arima") {
      cfg.dataset.kind = DatasetConfig::Kind::Arima;
    } else if (kind == "csv") {
      cfg.dataset.kind = DatasetConfig::Kind::Csv;
      cfg.system.horizon = 120;
      cfg.deltas = {2.0, 7.0, 20.0};
      cfg.normalization = Normalization::ZscoreGlobal;
    } else {
      throw ConfigError("dataset.kind must be 'arima' or 'csv'");
    }
    if (d.contains("count")) cfg.dataset.count = d["count"].get<int>();
    if (d.contains("seed")) cfg.dataset.seed = d["seed"].get<std::uint64_t>();
    if (d.contains("path")) cfg.dataset.path = d["path"].get<std::string>();
    if (d.contains("column")) cfg.dataset.column = d["column"].get<std::string>();
    if (d.contains("stride")) cfg.dataset.stride = d["stride"].get<int>();
  }

  if (doc.contains("system")) {
    const json& s = doc["system"];
    reject_unknown(s, {"A", "B", "C", "Q", "R", "x0", "horizon"}, "system");
    if (s.contains("A")) cfg.system.A = matrix_value(s["A"], "system.A");
    if (s.contains("B")) cfg.system.B = matrix_value(s["B"], "system.B");
    if (s.contains("C")) cfg.system.C = matrix_value(s["C"], "system.C");
    if (s.contains("Q")) cfg.system.Q = matrix_value(s["Q"], "system.Q");
    if (s.contains("R")) cfg.system.R = matrix_value(s["R"], "system.R");
    if (s.contains("x0")) cfg.system.x0 = vector_value(s["x0"], "system.x0", 0.0);
    if (s.contains("horizon")) cfg.system.horizon = s["horizon"].get<int>();
  }

  if (doc.contains("deltas")) {
    cfg.deltas.clear();
    for (const auto& v : doc["deltas"]) cfg.deltas.push_back(number(v, "deltas"));
  }
  if (doc.contains("scenarios")) {
    for (const auto& v : doc["scenarios"]) cfg.scenarios.push_back(parse_scenario(v.get<std::string>()));
    if (cfg.scenarios.empty()) throw ConfigError("scenarios must list at least one scenario");
  }
  if (doc.contains("normalization")) {
    cfg.normalization = parse_normalization(doc["normalization"].get<std::string>());
  }
  if (doc.contains("action_box")) {
    const json& b = doc["action_box"];
    if (b.is_string()) {
      if (b.get<std::string>() != "auto") throw ConfigError("action_box must be \"auto\" or an object");
    } else if (!b.is_null()) {
      cfg.action_box = box_value(b, "action_box");
    }
  }
  if (doc.contains("auto_box")) {
    const json& a = doc["auto_box"];
    reject_unknown(a, {"factor", "percentile"}, "auto_box");
    if (a.contains("factor")) cfg.auto_box.factor = number(a["factor"], "auto_box.factor");
    if (a.contains("percentile")) cfg.auto_box.percentile = number(a["percentile"], "auto_box.percentile");
  }
  if (doc.contains("state_box") && !doc["state_box"].is_null()) {
    cfg.state_box = box_value(doc["state_box"], "state_box");
  }
  if (doc.contains("attack")) {
    const json& a = doc["attack"];
    reject_unknown(a, {"mode", "steps", "step_size"}, "attack");
    const std::string mode = a.value("mode", "iterated");
    if (mode == "iterated") {
      cfg.attack_mode = AttackMode::Iterated;
    } else if (mode == "single-step") {
      cfg.attack_mode = AttackMode::SingleStep;
    } else {
      throw ConfigError("attack.mode must be 'single-step' or 'iterated'");
    }
    if (a.contains("steps")) cfg.steps = a["steps"].get<int>();
    if (a.contains("step_size") && !a["step_size"].is_null()) {
      cfg.step_size = number(a["step_size"], "attack.step_size");
    }
  }
  if (doc.contains("seed")) cfg.seed = doc["seed"].get<std::uint64_t>();
  if (doc.contains("output_dir")) cfg.output_dir = doc["output_dir"].get<std::string>();
  if (doc.contains("workers")) cfg.workers = doc["workers"].get<int>();

  cfg.validate();
  return cfg;
}

json config_as_json(const ExperimentConfig& cfg) {
  json doc;
  doc["system"] = {{"A", matrix_json(cfg.system.A)}, {"B", matrix_json(cfg.system.B)},
                   {"C", matrix_json(cfg.system.C)}, {"Q", matrix_json(cfg.system.Q)},
                   {"R", matrix_json(cfg.system.R)}, {"x0", vector_json(cfg.system.x0)},
                   {"horizon", cfg.system.horizon}};
  doc["deltas"] = cfg.deltas;
  if (!cfg.scenarios.empty()) {
    json scen = json::array();
    for (Scenario s : cfg.scenarios) scen.push_back(to_string(s));
    doc["scenarios"] = scen;
  }
  json ds;
  if (cfg.dataset.kind == DatasetConfig::Kind::Arima) {
    ds = {{"kind", "arima"}, {"count", cfg.dataset.count}};
    if (cfg.dataset.seed) ds["seed"] = *cfg.dataset.seed;
  } else {
    ds = {{"kind", "csv"}, {"path", cfg.dataset.path.string()}, {"column", cfg.dataset.column},
          {"stride", cfg.dataset.stride}};
  }
  doc["dataset"] = ds;
  doc["normalization"] = to_string(cfg.normalization);
  doc["action_box"] = cfg.action_box ? box_json(*cfg.action_box) : json("auto");
  doc["auto_box"] = {{"factor", cfg.auto_box.factor}, {"percentile", cfg.auto_box.percentile}};
  doc["state_box"] = cfg.state_box ? box_json(*cfg.state_box) : json(nullptr);
  doc["attack"] = {{"mode", cfg.attack_mode == AttackMode::Iterated ? "iterated" : "single-step"},
                   {"steps", cfg.steps},
                   {"step_size", cfg.step_size ? json(*cfg.step_size) : json(nullptr)}};
  doc["seed"] = cfg.seed;
  doc["output_dir"] = cfg.output_dir.string();
  doc["workers"] = cfg.workers;
  return doc;
}

}  // namespace detail

ExperimentConfig default_config() {
  ExperimentConfig cfg;
  cfg.system = SystemSpec::scalar(1.0, -1.0, 1.0, 1.0, 1.0, 50, 1.0);
  cfg.deltas = {0.3, 1.0, 3.0};
  return cfg;
}

ExperimentConfig parse_config(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  try {
    return detail::config_from_json(doc);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config has a value of the wrong type: ") + e.what());
  }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  ExperimentConfig cfg = parse_config(buf.str());
  // Relative dataset paths are taken relative to the config file.
  if (cfg.dataset.kind == DatasetConfig::Kind::Csv && cfg.dataset.path.is_relative()) {
    cfg.dataset.path = path.parent_path() / cfg.dataset.path;
  }
  return cfg;
}

std::string config_to_json(const ExperimentConfig& cfg) {
  return detail::config_as_json(cfg).dump(2);
}

}  // namespace tsattack
