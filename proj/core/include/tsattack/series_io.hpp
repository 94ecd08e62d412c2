#pragma once

#include "tsattack/lqr.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace tsattack {

/// Affine map used for normalization: normalized = (raw - offset) / factor.
struct Scale {
  double offset = 0.0;
  double factor = 1.0;
};

struct SeriesWindow {
  Timeseries values;
  std::string source_id;
  long start_index = 0;
  Scale scale;

  std::string id() const { return source_id + ":" + std::to_string(start_index); }
};

/// Slides a window of `horizon` rows over one numeric CSV column.
/// `stride <= 0` means stride = horizon. Partial tail windows are dropped.
/// Throws ConfigError for an absent column (message lists the available
/// ones) and IoError for unreadable files, non-numeric cells (row and column
/// reported) or fewer rows than the horizon.
std::vector<SeriesWindow> load_series_windows(const std::filesystem::path& path,
                                              std::string_view column, int horizon,
                                              int stride = 0);

enum class Normalization { None, ZscoreGlobal, ZscoreWindow };

Normalization parse_normalization(std::string_view name);
std::string to_string(Normalization mode);

/// z-scores using population moments. Throws ConfigError when the relevant
/// standard deviation is <= 1e-12.
std::vector<SeriesWindow> normalize_windows(const std::vector<SeriesWindow>& windows,
                                            Normalization mode);

/// Inverse of the stored scale.
Vector denormalize(const SeriesWindow& window);

/// Writes window_id,t,value rows; t is the flat (time-major) index.
void write_series_csv(const std::filesystem::path& path,
                      const std::vector<SeriesWindow>& windows);

/// Reads the window_id,t,value format back. Windows are returned in order
/// of first appearance with source_id "window" and start_index = window_id.
std::vector<SeriesWindow> read_series_csv(const std::filesystem::path& path);

/// Shortest round-trip decimal representation of x.
std::string format_number(double x);

/// Splits one CSV line on commas, honouring double quotes, trimming
/// surrounding whitespace and a trailing carriage return.
std::vector<std::string> split_csv_line(std::string_view line);

}  // namespace tsattack
