#pragma once

#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace qha {

using ordered_json = nlohmann::ordered_json;

// Serializes with two-space indent and a trailing newline, writing to a
// temporary file and renaming, so readers never see a partial report and
// equal values always produce equal bytes.
void write_json_file(const ordered_json& j, const std::string& path);

// Header "n,lambda_n", one %.17g row per value (exact double round trip).
void write_value_spectrum_csv(std::span<const double> values, const std::string& path);

// Generic two-column CSV, same formatting and atomic-write rules.
void write_two_column_csv(const std::string& x_name, std::span<const double> x,
                          const std::string& y_name, std::span<const double> y,
                          const std::string& path);

struct CsvColumns {
  std::vector<double> x, y;
  std::string x_name, y_name;
};

// Two-column CSV with a header line. Throws std::runtime_error on a missing
// file, a header-only or empty file, or any row that does not parse as two
// numbers.
CsvColumns read_two_column_csv(const std::string& path);

// Deterministic SVG (fixed viewport, font stack, and formatting; no
// timestamps) so golden-byte comparisons are possible.
//   "loglog-spectrum": log10|y| vs log10 x, least-squares slope overlay and a
//                      "slope=" annotation; zero rows are skipped.
//   "ratio-curve":     y vs x on linear axes with the 0.05 rule line.
// Throws std::invalid_argument for an unknown kind and std::runtime_error
// when no plottable points remain.
void render_plot_svg(const CsvColumns& data, const std::string& kind, const std::string& path);

}  // namespace qha
