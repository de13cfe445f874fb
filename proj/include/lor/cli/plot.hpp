#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "lor/cli/csv.hpp"

namespace lor::cli {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct LinePlot {
  std::string title;
  std::string xlabel;
  std::string ylabel;
  std::vector<Series> series;
};

/// Row-major grid; row 0 is drawn at the top.
struct Heatmap {
  std::string title;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;
  bool diverging = false;  // symmetric blue-white-red scale around zero
};

std::string render_line_plot(const LinePlot& plot);
std::string render_heatmap(const Heatmap& map);

/// Heatmap of a joint histogram dump (no header row, "# M=" metadata).
Heatmap heatmap_from_csv(const CsvTable& table, const std::string& title);

/// Plots every figure the CSV supports, chosen by its "# experiment=" tag:
/// asymmetry summaries give offset-vs-alpha lines, scale sweeps give NMI
/// curves, histogram dumps give heatmaps. Output names derive from the CSV
/// stem. MalformedCsv on unusable input.
std::vector<std::filesystem::path> emit_plots(const std::filesystem::path& csv,
                                              const std::filesystem::path& out_dir);

}  // namespace lor::cli
