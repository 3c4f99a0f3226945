#include "otcut/plotting.hpp"
#include "otcut/errors.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>

namespace otcut {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 440.0;
constexpr double kLeft = 72.0;
constexpr double kRight = 24.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 56.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b"};

std::optional<double> cell_num(const std::string& s) {
    double v = 0.0;
    const char* b = s.data();
    const char* e = b + s.size();
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc{} || p != e || !std::isfinite(v))
        return std::nullopt;
    return v;
}

std::string fmt2(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string fmt_tick(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

std::string escape_xml(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

struct Axis {
    double lo = 0.0, hi = 1.0;
    bool log = false;

    double coord(double v) const {
        double t = log ? std::log10(v) : v;
        double a = log ? std::log10(lo) : lo;
        double b = log ? std::log10(hi) : hi;
        return (t - a) / (b - a);
    }
};

Axis make_axis(double lo, double hi, bool log) {
    Axis ax;
    ax.log = log;
    if (log) {
        double pad = std::pow(hi / lo, 0.05);
        if (hi == lo)
            pad = 2.0;
        ax.lo = lo / pad;
        ax.hi = hi * pad;
    } else {
        double pad = 0.05 * (hi - lo);
        if (pad == 0.0)
            pad = hi == 0.0 ? 1.0 : 0.5 * std::abs(hi);
        ax.lo = lo - pad;
        ax.hi = hi + pad;
    }
    return ax;
}

std::vector<double> axis_ticks(const Axis& ax) {
    std::vector<double> ticks;
    if (ax.log) {
        double a = std::log10(ax.lo);
        double b = std::log10(ax.hi);
        int first = int(std::ceil(a));
        int last = int(std::floor(b));
        if (last - first >= 1) {
            for (int k = first; k <= last; ++k)
                ticks.push_back(std::pow(10.0, k));
            return ticks;
        }
        for (int k = 0; k <= 4; ++k)
            ticks.push_back(std::pow(10.0, a + (b - a) * k / 4.0));
        return ticks;
    }
    for (int k = 0; k <= 4; ++k)
        ticks.push_back(ax.lo + (ax.hi - ax.lo) * k / 4.0);
    return ticks;
}

} // namespace

std::string render_plot_svg(const Table& data, const PlotSpec& spec) {
    if (spec.series.empty())
        throw EmptyData("plot spec names no series");
    std::size_t xcol = data.col(spec.x_column);
    std::vector<std::size_t> ycols;
    for (const auto& s : spec.series)
        ycols.push_back(data.col(s.column));

    // collect per-series points, skipping unusable cells
    std::vector<std::vector<std::pair<double, double>>> pts(ycols.size());
    double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
    bool anypt = false;
    for (const auto& row : data.rows) {
        auto x = cell_num(row[xcol]);
        if (!x || (spec.log_x && *x <= 0.0))
            continue;
        for (std::size_t s = 0; s < ycols.size(); ++s) {
            auto y = cell_num(row[ycols[s]]);
            if (!y || (spec.log_y && *y <= 0.0))
                continue;
            pts[s].emplace_back(*x, *y);
            if (!anypt) {
                xmin = xmax = *x;
                ymin = ymax = *y;
                anypt = true;
            } else {
                xmin = std::min(xmin, *x);
                xmax = std::max(xmax, *x);
                ymin = std::min(ymin, *y);
                ymax = std::max(ymax, *y);
            }
        }
    }
    if (!anypt)
        throw EmptyData("no plottable rows for x column '" + spec.x_column + "'");

    Axis xa = make_axis(xmin, xmax, spec.log_x);
    Axis ya = make_axis(ymin, ymax, spec.log_y);
    double pw = kWidth - kLeft - kRight;
    double ph = kHeight - kTop - kBottom;
    auto px = [&](double v) { return kLeft + pw * xa.coord(v); };
    auto py = [&](double v) { return kTop + ph * (1.0 - ya.coord(v)); };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"440\" "
           "viewBox=\"0 0 640 440\">\n";
    svg += "<rect x=\"0\" y=\"0\" width=\"640\" height=\"440\" fill=\"#ffffff\"/>\n";
    svg += "<text x=\"320\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"15\" fill=\"#222222\">" +
           escape_xml(spec.title) + "</text>\n";

    // frame and ticks
    svg += "<rect x=\"" + fmt2(kLeft) + "\" y=\"" + fmt2(kTop) + "\" width=\"" +
           fmt2(pw) + "\" height=\"" + fmt2(ph) +
           "\" fill=\"none\" stroke=\"#444444\" stroke-width=\"1\"/>\n";
    for (double t : axis_ticks(xa)) {
        double cx = px(t);
        svg += "<line x1=\"" + fmt2(cx) + "\" y1=\"" + fmt2(kTop + ph) + "\" x2=\"" +
               fmt2(cx) + "\" y2=\"" + fmt2(kTop + ph + 5) +
               "\" stroke=\"#444444\" stroke-width=\"1\"/>\n";
        svg += "<text x=\"" + fmt2(cx) + "\" y=\"" + fmt2(kTop + ph + 20) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\" "
               "fill=\"#222222\">" +
               fmt_tick(t) + "</text>\n";
    }
    for (double t : axis_ticks(ya)) {
        double cy = py(t);
        svg += "<line x1=\"" + fmt2(kLeft - 5) + "\" y1=\"" + fmt2(cy) + "\" x2=\"" +
               fmt2(kLeft) + "\" y2=\"" + fmt2(cy) +
               "\" stroke=\"#444444\" stroke-width=\"1\"/>\n";
        svg += "<text x=\"" + fmt2(kLeft - 8) + "\" y=\"" + fmt2(cy + 4) +
               "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" "
               "fill=\"#222222\">" +
               fmt_tick(t) + "</text>\n";
    }
    if (!spec.x_label.empty())
        svg += "<text x=\"" + fmt2(kLeft + pw / 2) + "\" y=\"" +
               fmt2(kHeight - 14) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
               "fill=\"#222222\">" +
               escape_xml(spec.x_label) + "</text>\n";
    if (!spec.y_label.empty())
        svg += "<text x=\"18\" y=\"" + fmt2(kTop + ph / 2) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
               "fill=\"#222222\" transform=\"rotate(-90 18 " +
               fmt2(kTop + ph / 2) + ")\">" + escape_xml(spec.y_label) + "</text>\n";

    // series polylines with point markers
    for (std::size_t s = 0; s < pts.size(); ++s) {
        if (pts[s].empty())
            continue;
        const char* color = kPalette[s % 6];
        std::string poly;
        for (const auto& [x, y] : pts[s]) {
            if (!poly.empty())
                poly += ' ';
            poly += fmt2(px(x)) + "," + fmt2(py(y));
        }
        svg += "<polyline points=\"" + poly + "\" fill=\"none\" stroke=\"" + color +
               "\" stroke-width=\"1.5\"/>\n";
        for (const auto& [x, y] : pts[s])
            svg += "<circle cx=\"" + fmt2(px(x)) + "\" cy=\"" + fmt2(py(y)) +
                   "\" r=\"2.5\" fill=\"" + color + "\"/>\n";
    }

    // legend, top right inside the frame
    double lx = kLeft + pw - 170.0;
    double ly = kTop + 10.0;
    for (std::size_t s = 0; s < spec.series.size(); ++s) {
        const char* color = kPalette[s % 6];
        double cy = ly + 16.0 * double(s);
        svg += "<line x1=\"" + fmt2(lx) + "\" y1=\"" + fmt2(cy) + "\" x2=\"" +
               fmt2(lx + 22) + "\" y2=\"" + fmt2(cy) + "\" stroke=\"" + color +
               "\" stroke-width=\"1.5\"/>\n";
        svg += "<text x=\"" + fmt2(lx + 28) + "\" y=\"" + fmt2(cy + 4) +
               "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#222222\">" +
               escape_xml(spec.series[s].label) + "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

void emit_plot(const Table& data, const PlotSpec& spec, const std::string& path) {
    std::string svg = render_plot_svg(data, spec);
    std::filesystem::path p(path);
    if (p.has_parent_path())
        std::filesystem::create_directories(p.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw Error("cannot open '" + path + "' for writing");
    f.write(svg.data(), std::streamsize(svg.size()));
    if (!f)
        throw Error("short write to '" + path + "'");
}

} // namespace otcut
