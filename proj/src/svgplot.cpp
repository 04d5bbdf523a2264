#include "irssim/svgplot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "irssim/model.hpp"

namespace irssim {

namespace {

constexpr double kW = 720.0;
constexpr double kH = 480.0;
constexpr double kMarginL = 70.0;
constexpr double kMarginR = 20.0;
constexpr double kMarginT = 40.0;
constexpr double kMarginB = 50.0;

const char* kSeries[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string esc(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '&') out += "&amp;";
        else if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else out += c;
    }
    return out;
}

struct Axis {
    double lo = 0.0, hi = 1.0;
    bool log = false;

    double frac(double v) const {
        if (log)
            return (std::log10(v) - std::log10(lo)) / (std::log10(hi) - std::log10(lo));
        return (v - lo) / (hi - lo);
    }
};

// round limits outward to a tidy step
void pad_axis(Axis& a) {
    if (a.log) {
        if (!(a.lo > 0.0)) a.lo = 1.0;
        if (a.hi <= a.lo) a.hi = a.lo * 10.0;
        return;
    }
    if (a.hi <= a.lo) {
        a.lo -= 1.0;
        a.hi += 1.0;
        return;
    }
    double span = a.hi - a.lo;
    a.lo -= 0.05 * span;
    a.hi += 0.05 * span;
}

std::vector<double> axis_ticks(const Axis& a) {
    std::vector<double> t;
    if (a.log) {
        int e0 = int(std::ceil(std::log10(a.lo) - 1e-9));
        int e1 = int(std::floor(std::log10(a.hi) + 1e-9));
        for (int e = e0; e <= e1; ++e)
            t.push_back(std::pow(10.0, e));
        if (t.size() < 2) {
            t = {a.lo, a.hi};
        }
        return t;
    }
    double span = a.hi - a.lo;
    double step = std::pow(10.0, std::floor(std::log10(span / 4.0)));
    if (span / step > 8.0) step *= 2.0;
    if (span / step > 8.0) step *= 2.5;
    double v = std::ceil(a.lo / step) * step;
    for (; v <= a.hi + step * 1e-9; v += step)
        t.push_back(std::abs(v) < step * 1e-9 ? 0.0 : v);
    return t;
}

void open_svg(std::ostringstream& s, const std::string& title) {
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
      << "\" viewBox=\"0 0 " << kW << " " << kH << "\">\n";
    s << "<rect width=\"" << kW << "\" height=\"" << kH << "\" fill=\"white\"/>\n";
    s << "<text x=\"" << kW / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"16\">"
      << esc(title) << "</text>\n";
}

void draw_frame(std::ostringstream& s, const Axis& xa, const Axis& ya) {
    double x0 = kMarginL, x1 = kW - kMarginR;
    double y0 = kH - kMarginB, y1 = kMarginT;
    s << "<rect x=\"" << x0 << "\" y=\"" << y1 << "\" width=\"" << x1 - x0 << "\" height=\""
      << y0 - y1 << "\" fill=\"none\" stroke=\"#333\"/>\n";
    for (double t : axis_ticks(xa)) {
        double px = x0 + xa.frac(t) * (x1 - x0);
        if (px < x0 - 0.5 || px > x1 + 0.5) continue;
        s << "<line x1=\"" << px << "\" y1=\"" << y0 << "\" x2=\"" << px << "\" y2=\"" << y0 + 5
          << "\" stroke=\"#333\"/>\n";
        s << "<text x=\"" << px << "\" y=\"" << y0 + 18
          << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(t)
          << "</text>\n";
    }
    for (double t : axis_ticks(ya)) {
        double py = y0 - ya.frac(t) * (y0 - y1);
        if (py < y1 - 0.5 || py > y0 + 0.5) continue;
        s << "<line x1=\"" << x0 - 5 << "\" y1=\"" << py << "\" x2=\"" << x0 << "\" y2=\"" << py
          << "\" stroke=\"#333\"/>\n";
        s << "<text x=\"" << x0 - 8 << "\" y=\"" << py + 4
          << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(t)
          << "</text>\n";
    }
}

} // namespace

void plot_lines_svg(const ResultTable& t, const std::string& title, const std::string& path, bool log_x) {
    if (t.columns.size() < 2)
        throw std::invalid_argument("line plot needs an x column and at least one y column");

    Axis xa, ya;
    xa.log = log_x;
    xa.lo = std::numeric_limits<double>::infinity();
    xa.hi = -xa.lo;
    ya.lo = xa.lo;
    ya.hi = xa.hi;
    for (const auto& row : t.rows) {
        double x = row[0];
        if (log_x && !(x > 0.0)) continue;
        xa.lo = std::min(xa.lo, x);
        xa.hi = std::max(xa.hi, x);
        for (std::size_t c = 1; c < row.size(); ++c) {
            if (!std::isfinite(row[c])) continue;
            ya.lo = std::min(ya.lo, row[c]);
            ya.hi = std::max(ya.hi, row[c]);
        }
    }
    if (!std::isfinite(xa.lo) || !std::isfinite(ya.lo)) {
        xa.lo = 0.0; xa.hi = 1.0;
        ya.lo = 0.0; ya.hi = 1.0;
    }
    pad_axis(xa);
    pad_axis(ya);

    double x0 = kMarginL, x1 = kW - kMarginR;
    double y0 = kH - kMarginB, y1 = kMarginT;

    std::ostringstream s;
    open_svg(s, title);
    draw_frame(s, xa, ya);
    s << "<text x=\"" << (x0 + x1) / 2 << "\" y=\"" << kH - 12
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << esc(t.columns[0])
      << "</text>\n";
    for (std::size_t c = 1; c < t.columns.size(); ++c) {
        const char* color = kSeries[(c - 1) % (sizeof kSeries / sizeof *kSeries)];
        s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (const auto& row : t.rows) {
            if (log_x && !(row[0] > 0.0)) continue;
            if (!std::isfinite(row[c])) continue;
            double px = x0 + xa.frac(row[0]) * (x1 - x0);
            double py = y0 - ya.frac(row[c]) * (y0 - y1);
            s << fmt(px) << "," << fmt(py) << " ";
        }
        s << "\"/>\n";
        s << "<text x=\"" << x1 - 8 << "\" y=\"" << y1 + 16 + 14.0 * double(c - 1)
          << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" << color
          << "\">" << esc(t.columns[c]) << "</text>\n";
    }
    s << "</svg>\n";
    atomic_write_text(path, s.str());
}

void plot_heatmap_svg(const ResultTable& t, const std::string& title, const std::string& path) {
    if (t.columns.size() != 3)
        throw std::invalid_argument("heatmap wants exactly the columns row, col, value");

    int n_rows = 0, n_cols = 0;
    double vlo = std::numeric_limits<double>::infinity(), vhi = -vlo;
    for (const auto& row : t.rows) {
        n_rows = std::max(n_rows, int(row[0]) + 1);
        n_cols = std::max(n_cols, int(row[1]) + 1);
        vlo = std::min(vlo, row[2]);
        vhi = std::max(vhi, row[2]);
    }
    if (n_rows == 0 || n_cols == 0)
        throw std::invalid_argument("heatmap table is empty");
    if (vhi <= vlo) vhi = vlo + 1.0;

    double side = std::min((kW - kMarginL - kMarginR) / n_cols, (kH - kMarginT - kMarginB) / n_rows);
    double gx = (kW - side * n_cols) / 2.0;
    double gy = kMarginT + (kH - kMarginT - kMarginB - side * n_rows) / 2.0;

    std::ostringstream s;
    open_svg(s, title);
    for (const auto& row : t.rows) {
        double f = (row[2] - vlo) / (vhi - vlo);
        int r = int(std::lround(255.0 * f));
        int b = 255 - r;
        s << "<rect x=\"" << fmt(gx + side * row[1]) << "\" y=\"" << fmt(gy + side * row[0])
          << "\" width=\"" << fmt(side) << "\" height=\"" << fmt(side) << "\" fill=\"rgb(" << r << ",0,"
          << b << ")\"/>\n";
    }
    s << "<text x=\"" << kW / 2 << "\" y=\"" << kH - 12
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">low " << fmt(vlo)
      << ", high " << fmt(vhi) << "</text>\n";
    s << "</svg>\n";
    atomic_write_text(path, s.str());
}

void plot_polar_svg(const std::vector<double>& angles_rad, const std::string& title,
                    const std::string& path) {
    double cx = kW / 2.0, cy = (kH + kMarginT) / 2.0;
    double radius = std::min(kW, kH - kMarginT - kMarginB) / 2.0 - 20.0;

    std::ostringstream s;
    open_svg(s, title);
    s << "<circle cx=\"" << cx << "\" cy=\"" << cy << "\" r=\"" << radius
      << "\" fill=\"none\" stroke=\"#999\"/>\n";
    s << "<line x1=\"" << cx - radius << "\" y1=\"" << cy << "\" x2=\"" << cx + radius << "\" y2=\""
      << cy << "\" stroke=\"#ddd\"/>\n";
    s << "<line x1=\"" << cx << "\" y1=\"" << cy - radius << "\" x2=\"" << cx << "\" y2=\""
      << cy + radius << "\" stroke=\"#ddd\"/>\n";
    for (double a : angles_rad) {
        double px = cx + radius * std::cos(a);
        double py = cy - radius * std::sin(a);
        s << "<circle cx=\"" << fmt(px) << "\" cy=\"" << fmt(py)
          << "\" r=\"3\" fill=\"#1f77b4\" fill-opacity=\"0.5\"/>\n";
    }
    s << "</svg>\n";
    atomic_write_text(path, s.str());
}

void plot_histogram_svg(const std::vector<double>& values, int n_bins, const std::string& title,
                        const std::string& path) {
    if (values.empty())
        throw std::invalid_argument("histogram needs at least one value");
    if (n_bins < 1)
        throw std::invalid_argument("histogram needs at least one bin");

    double lo = *std::min_element(values.begin(), values.end());
    double hi = *std::max_element(values.begin(), values.end());
    if (hi <= lo) hi = lo + 1.0;

    std::vector<int> counts(std::size_t(n_bins), 0);
    for (double v : values) {
        int b = int((v - lo) / (hi - lo) * n_bins);
        b = std::clamp(b, 0, n_bins - 1);
        ++counts[std::size_t(b)];
    }
    int peak = *std::max_element(counts.begin(), counts.end());

    Axis xa{lo, hi, false};
    Axis ya{0.0, double(peak), false};
    pad_axis(ya);
    ya.lo = 0.0;

    double x0 = kMarginL, x1 = kW - kMarginR;
    double y0 = kH - kMarginB, y1 = kMarginT;

    std::ostringstream s;
    open_svg(s, title);
    draw_frame(s, xa, ya);
    double bw = (x1 - x0) / n_bins;
    for (int b = 0; b < n_bins; ++b) {
        double h = ya.frac(double(counts[std::size_t(b)])) * (y0 - y1);
        s << "<rect x=\"" << fmt(x0 + bw * b) << "\" y=\"" << fmt(y0 - h) << "\" width=\""
          << fmt(bw * 0.95) << "\" height=\"" << fmt(h) << "\" fill=\"#1f77b4\"/>\n";
    }
    s << "</svg>\n";
    atomic_write_text(path, s.str());
}

} // namespace irssim
