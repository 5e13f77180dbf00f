#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "estkit/sim.hpp"

namespace estkit {

/// Locale-independent decimal rendering with 17 significant digits, enough to
/// round-trip any double.
std::string format_full(double v);

/// result.csv: step, truth, measurement, then estimate/error columns for each
/// filter that completed the run. Headers carry units.
void write_result_csv(const std::filesystem::path& path, const ExperimentResult& result);

/// mc_summary.csv: filter, mean_mse, stderr, diverged_count.
void write_mc_summary_csv(const std::filesystem::path& path, const MonteCarloResult& mc);

struct SvgSeries {
    std::string label;
    std::string color;
    std::vector<double> x;
    std::vector<double> y;
};

/// Self-contained SVG line chart (fixed 800x500 viewBox, inline polylines,
/// text legend).
void write_svg_chart(const std::filesystem::path& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<SvgSeries>& series);

}  // namespace estkit
