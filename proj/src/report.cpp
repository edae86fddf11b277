#include "sheq/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace sheq {

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string error_table_csv(const ErrorTable& table) {
    std::ostringstream os;
    os << "N,error,stderr,samples,aborted\n";
    for (const auto& row : table.rows)
        os << row.N << ',' << format_double(row.error) << ',' << format_double(row.std_error)
           << ',' << row.samples << ',' << row.aborted << '\n';
    return os.str();
}

nlohmann::json to_json(const ErrorRow& row) {
    return {{"N", row.N},
            {"error", row.error},
            {"stderr", row.std_error},
            {"samples", row.samples},
            {"aborted", row.aborted}};
}

nlohmann::json to_json(const ErrorTable& table) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : table.rows) rows.push_back(to_json(r));
    return {{"rows", rows},
            {"metric", table.metric},
            {"model", table.model_fingerprint},
            {"M", table.mode_count},
            {"N_fine", table.fine_steps}};
}

nlohmann::json to_json(const RateFit& fit) {
    return {{"slope", fit.slope},
            {"intercept", fit.intercept},
            {"r_squared", fit.r_squared},
            {"slope_ci_halfwidth", fit.slope_ci_halfwidth},
            {"fit_n_min", fit.fit_n_min},
            {"fit_n_max", fit.fit_n_max},
            {"rows_used", fit.rows_used}};
}

nlohmann::json to_json(const BoundReport& report) {
    nlohmann::json ing = nlohmann::json::array();
    for (const auto& i : report.ingredients)
        ing.push_back({{"name", i.name}, {"value", i.value}, {"provenance", i.provenance}});
    return {{"inequality", report.inequality},
            {"lhs", report.lhs},
            {"lhs_upper_ci", report.lhs_upper_ci},
            {"rhs", report.rhs},
            {"margin", report.margin},
            {"pass", report.pass},
            {"unbounded", report.unbounded},
            {"samples", report.samples},
            {"note", report.note},
            {"ingredients", ing}};
}

namespace {

struct Mapper {
    double x0, x1, y0, y1; // data (log10)
    double px0 = 70, px1 = 520, py0 = 40, py1 = 330;
    double X(double x) const { return px0 + (x - x0) / (x1 - x0) * (px1 - px0); }
    double Y(double y) const { return py1 - (y - y0) / (y1 - y0) * (py1 - py0); }
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string fmt_tick(double decade) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "1e%d", static_cast<int>(std::lround(decade)));
    return buf;
}

} // namespace

std::string loglog_svg(const std::vector<std::pair<double, double>>& points, const RateFit* fit,
                       const double* guide_slope, const std::string& x_label,
                       const std::string& y_label, const std::vector<PlotSeries>& extra) {
    std::vector<std::pair<double, double>> pts;
    for (auto [x, y] : points)
        if (x > 0.0 && y > 0.0) pts.emplace_back(std::log10(x), std::log10(y));
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"560\" height=\"380\" "
          "font-family=\"monospace\" font-size=\"11\">\n";
    if (pts.empty()) {
        os << "<text x=\"40\" y=\"40\">no positive data</text>\n</svg>\n";
        return os.str();
    }
    Mapper m{pts.front().first, pts.front().first, pts.front().second, pts.front().second};
    auto widen = [&](double x, double y) {
        m.x0 = std::min(m.x0, x);
        m.x1 = std::max(m.x1, x);
        m.y0 = std::min(m.y0, y);
        m.y1 = std::max(m.y1, y);
    };
    for (auto [x, y] : pts) widen(x, y);
    for (const auto& s : extra)
        for (auto [x, y] : s.points)
            if (x > 0 && y > 0) widen(std::log10(x), std::log10(y));
    if (m.x1 - m.x0 < 1e-9) m.x1 = m.x0 + 1.0;
    if (m.y1 - m.y0 < 1e-9) m.y1 = m.y0 + 1.0;
    const double padx = 0.05 * (m.x1 - m.x0), pady = 0.08 * (m.y1 - m.y0);
    m.x0 -= padx; m.x1 += padx; m.y0 -= pady; m.y1 += pady;

    os << "<rect x=\"" << m.px0 << "\" y=\"" << m.py0 << "\" width=\"" << (m.px1 - m.px0)
       << "\" height=\"" << (m.py1 - m.py0) << "\" fill=\"white\" stroke=\"black\"/>\n";
    // decade ticks
    for (double d = std::ceil(m.y0); d <= std::floor(m.y1) + 1e-9; d += 1.0) {
        const double y = m.Y(d);
        os << "<line x1=\"" << m.px0 << "\" y1=\"" << y << "\" x2=\"" << m.px1 << "\" y2=\"" << y
           << "\" stroke=\"#ddd\"/>\n";
        os << "<text x=\"" << (m.px0 - 45) << "\" y=\"" << (y + 4) << "\">" << fmt_tick(d)
           << "</text>\n";
    }
    for (double d = std::ceil(m.x0); d <= std::floor(m.x1) + 1e-9; d += 1.0) {
        const double x = m.X(d);
        os << "<line x1=\"" << x << "\" y1=\"" << m.py0 << "\" x2=\"" << x << "\" y2=\"" << m.py1
           << "\" stroke=\"#ddd\"/>\n";
        os << "<text x=\"" << (x - 10) << "\" y=\"" << (m.py1 + 16) << "\">" << fmt_tick(d)
           << "</text>\n";
    }

    auto polyline = [&](const std::vector<std::pair<double, double>>& p, const char* color,
                        const char* dash) {
        os << "<polyline fill=\"none\" stroke=\"" << color << "\"";
        if (dash) os << " stroke-dasharray=\"" << dash << "\"";
        os << " points=\"";
        for (auto [x, y] : p) os << m.X(x) << ',' << m.Y(y) << ' ';
        os << "\"/>\n";
    };

    polyline(pts, "#1f77b4", nullptr);
    for (auto [x, y] : pts)
        os << "<circle cx=\"" << m.X(x) << "\" cy=\"" << m.Y(y) << "\" r=\"3\" fill=\"#1f77b4\"/>\n";

    const char* extra_colors[] = {"#2ca02c", "#d62728", "#9467bd", "#8c564b"};
    int ci = 0;
    for (const auto& s : extra) {
        std::vector<std::pair<double, double>> p;
        for (auto [x, y] : s.points)
            if (x > 0 && y > 0) p.emplace_back(std::log10(x), std::log10(y));
        polyline(p, extra_colors[ci % 4], "2,2");
        os << "<text x=\"" << (m.px1 - 150) << "\" y=\"" << (m.py0 + 28 + 14 * ci) << "\" fill=\""
           << extra_colors[ci % 4] << "\">" << s.label << "</text>\n";
        ++ci;
    }

    if (fit) {
        // ln-based fit replotted in log10 coordinates: log10 y = slope log10 x + b/ln 10
        const double b10 = fit->intercept / std::log(10.0);
        std::vector<std::pair<double, double>> line = {
            {m.x0 + padx, fit->slope * (m.x0 + padx) + b10},
            {m.x1 - padx, fit->slope * (m.x1 - padx) + b10}};
        polyline(line, "#ff7f0e", nullptr);
        os << "<text x=\"" << (m.px0 + 10) << "\" y=\"" << (m.py0 + 16)
           << "\" fill=\"#ff7f0e\">fit slope " << fmt(fit->slope) << " (r2 " << fmt(fit->r_squared)
           << ")</text>\n";
    }
    if (guide_slope) {
        const auto [xa, ya] = pts.back();
        std::vector<std::pair<double, double>> line = {
            {m.x0 + padx, ya + *guide_slope * (m.x0 + padx - xa)}, {xa, ya}};
        polyline(line, "#555555", "5,3");
        os << "<text x=\"" << (m.px0 + 10) << "\" y=\"" << (m.py0 + 30)
           << "\" fill=\"#555555\">guide slope " << fmt(*guide_slope) << "</text>\n";
    }
    os << "<text x=\"" << (0.5 * (m.px0 + m.px1) - 10) << "\" y=\"" << (m.py1 + 32) << "\">"
       << x_label << "</text>\n";
    os << "<text x=\"12\" y=\"" << (m.py0 - 10) << "\">" << y_label << "</text>\n";
    os << "</svg>\n";
    return os.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

} // namespace sheq
