#include "tsattack/series_io.hpp"

#include "tsattack/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace tsattack {

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

bool parse_double(std::string_view text, double& out) {
  text = trim(text);
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  const auto res = std::from_chars(text.data(), text.data() + text.size(), out);
  return res.ec == std::errc() && res.ptr == text.data() + text.size() && std::isfinite(out);
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

}  // namespace

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cell += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      cells.emplace_back(trim(cell));
      cell.clear();
    } else {
      cell += ch;
    }
  }
  cells.emplace_back(trim(cell));
  return cells;
}

std::vector<SeriesWindow> load_series_windows(const std::filesystem::path& path,
                                              std::string_view column, int horizon,
                                              int stride) {
  if (horizon < 1) throw ConfigError("load_series_windows: horizon must be >= 1");
  if (stride <= 0) stride = horizon;
  std::ifstream in = open_input(path);

  std::string line;
  if (!std::getline(in, line)) throw IoError(path.string() + ": empty file, expected a header row");
  const auto header = split_csv_line(line);
  std::size_t col = header.size();
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == column) {
      col = i;
      break;
    }
  }
  if (col == header.size()) {
    std::string names;
    for (const auto& h : header) names += (names.empty() ? "" : ", ") + h;
    throw ConfigError(path.string() + ": column '" + std::string(column) +
                      "' not found; available columns: " + names);
  }

  std::vector<double> values;
  long row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    double v = 0.0;
    if (col >= cells.size() || !parse_double(cells[col], v)) {
      throw IoError(path.string() + ": non-numeric value at row " + std::to_string(row) +
                    ", column '" + std::string(column) + "'");
    }
    values.push_back(v);
  }
  if (static_cast<long>(values.size()) < horizon) {
    throw IoError(path.string() + ": insufficient rows (" + std::to_string(values.size()) +
                  ") for horizon " + std::to_string(horizon));
  }

  std::vector<SeriesWindow> windows;
  const std::string stem = path.stem().string();
  for (std::size_t start = 0; start + horizon <= values.size(); start += stride) {
    Vector v(horizon);
    for (int t = 0; t < horizon; ++t) v[t] = values[start + t];
    SeriesWindow w;
    w.values = Timeseries(std::move(v));
    w.source_id = stem;
    w.start_index = static_cast<long>(start);
    windows.push_back(std::move(w));
  }
  return windows;
}

Normalization parse_normalization(std::string_view name) {
  if (name == "none") return Normalization::None;
  if (name == "zscore-global") return Normalization::ZscoreGlobal;
  if (name == "zscore-window") return Normalization::ZscoreWindow;
  throw ConfigError("unknown normalization '" + std::string(name) +
                    "' (expected none, zscore-global or zscore-window)");
}

std::string to_string(Normalization mode) {
  switch (mode) {
    case Normalization::None: return "none";
    case Normalization::ZscoreGlobal: return "zscore-global";
    case Normalization::ZscoreWindow: return "zscore-window";
  }
  return "unknown";
}

namespace {

Scale moments(const std::vector<const Vector*>& parts) {
  double sum = 0.0;
  double count = 0.0;
  for (const Vector* v : parts) {
    sum += v->sum();
    count += static_cast<double>(v->size());
  }
  const double mean = sum / count;
  double sq = 0.0;
  for (const Vector* v : parts) sq += (v->array() - mean).square().sum();
  const double sd = std::sqrt(sq / count);
  if (!(sd > 1e-12)) {
    throw ConfigError("normalize_windows: data is constant, cannot z-score");
  }
  return Scale{mean, sd};
}

}  // namespace

std::vector<SeriesWindow> normalize_windows(const std::vector<SeriesWindow>& windows,
                                            Normalization mode) {
  if (mode == Normalization::None || windows.empty()) return windows;
  std::vector<SeriesWindow> out = windows;
  if (mode == Normalization::ZscoreGlobal) {
    std::vector<const Vector*> all;
    for (const auto& w : windows) all.push_back(&w.values.values());
    const Scale sc = moments(all);
    for (auto& w : out) {
      w.values = Timeseries((w.values.values().array() - sc.offset) / sc.factor);
      w.scale = sc;
    }
  } else {
    for (auto& w : out) {
      const Scale sc = moments({&w.values.values()});
      w.values = Timeseries((w.values.values().array() - sc.offset) / sc.factor);
      w.scale = sc;
    }
  }
  return out;
}

Vector denormalize(const SeriesWindow& window) {
  return (window.values.values().array() * window.scale.factor + window.scale.offset).matrix();
}

void write_series_csv(const std::filesystem::path& path,
                      const std::vector<SeriesWindow>& windows) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "window_id,t,value\n";
  for (std::size_t w = 0; w < windows.size(); ++w) {
    const Vector& v = windows[w].values.values();
    for (Eigen::Index t = 0; t < v.size(); ++t) {
      out << w << ',' << t << ',' << format_number(v[t]) << '\n';
    }
  }
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<SeriesWindow> read_series_csv(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw IoError(path.string() + ": empty file");
  const auto header = split_csv_line(line);
  if (header.size() < 3 || header[0] != "window_id" || header[1] != "t" || header[2] != "value") {
    throw IoError(path.string() + ": expected header window_id,t,value");
  }
  std::vector<long> order;
  std::map<long, std::vector<std::pair<long, double>>> rows;
  long row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    double id = 0, t = 0, v = 0;
    if (cells.size() < 3 || !parse_double(cells[0], id) || !parse_double(cells[1], t) ||
        !parse_double(cells[2], v)) {
      throw IoError(path.string() + ": malformed row " + std::to_string(row));
    }
    const long wid = static_cast<long>(id);
    if (!rows.count(wid)) order.push_back(wid);
    rows[wid].emplace_back(static_cast<long>(t), v);
  }
  std::vector<SeriesWindow> out;
  for (long wid : order) {
    auto& pts = rows[wid];
    Vector v(static_cast<Eigen::Index>(pts.size()));
    std::vector<bool> seen(pts.size(), false);
    for (const auto& [t, value] : pts) {
      if (t < 0 || t >= v.size() || seen[t]) {
        throw IoError(path.string() + ": window " + std::to_string(wid) +
                      " has missing or duplicate t indices");
      }
      seen[t] = true;
      v[t] = value;
    }
    SeriesWindow w;
    w.values = Timeseries(std::move(v));
    w.source_id = "window";
    w.start_index = wid;
    out.push_back(std::move(w));
  }
  return out;
}

}  // namespace tsattack
