#pragma once
#include <string>
#include <vector>

#include "irssim/scenario_io.hpp"

namespace irssim {

// Minimal SVG renderers for the emitted CSV tables. Every plot takes the
// written CSV back as input so the file stays the source of truth.

// One line per y column; first column is x.
void plot_lines_svg(const ResultTable& t, const std::string& title, const std::string& path,
                    bool log_x = false);

// (row, col, value) long-format table rendered as a grid heatmap.
void plot_heatmap_svg(const ResultTable& t, const std::string& title, const std::string& path);

// Angles in radians scattered on the unit circle.
void plot_polar_svg(const std::vector<double>& angles_rad, const std::string& title,
                    const std::string& path);

void plot_histogram_svg(const std::vector<double>& values, int n_bins, const std::string& title,
                        const std::string& path);

} // namespace irssim
