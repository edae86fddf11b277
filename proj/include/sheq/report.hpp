#pragma once

// Output writers: the 5-column error-table CSV, JSON summaries, and the
// in-repo log-log SVG plot (axes, points, fitted line, slope annotation,
// optional reference-slope guide).

#include <string>
#include <vector>

#include <json.hpp>

#include "sheq/bounds.hpp"
#include "sheq/estimators.hpp"

namespace sheq {

/// Deterministic shortest-meaningful formatting for CSV cells (%.17g).
std::string format_double(double x);

/// Header "N,error,stderr,samples,aborted", one row per table entry.
std::string error_table_csv(const ErrorTable& table);

nlohmann::json to_json(const ErrorRow& row);
nlohmann::json to_json(const ErrorTable& table);
nlohmann::json to_json(const RateFit& fit);
nlohmann::json to_json(const BoundReport& report);

/// Log-log plot of (N, error) with the fitted line; guide_slope (for exact
/// experiments, -1/2) draws a dashed reference through the last point.
/// extra_series adds secondary point sets (no fit).
struct PlotSeries {
    std::vector<std::pair<double, double>> points;
    std::string label;
};
std::string loglog_svg(const std::vector<std::pair<double, double>>& points, const RateFit* fit,
                       const double* guide_slope, const std::string& x_label,
                       const std::string& y_label,
                       const std::vector<PlotSeries>& extra_series = {});

void write_file(const std::string& path, const std::string& content);

} // namespace sheq
