#pragma once
#include "otcut/tabular.hpp"

#include <string>
#include <vector>

namespace otcut {

/// one plotted series: a numeric table column and its legend label
struct PlotSeries {
    std::string column;
    std::string label;
};

/// line plot layout: x column, any number of y series, optional log axes
struct PlotSpec {
    std::string title;
    std::string x_column;
    std::vector<PlotSeries> series;
    bool log_x = false;
    bool log_y = false;
    std::string x_label;
    std::string y_label;
};

/// Render the table as a self-contained SVG line plot. Output is a pure
/// function of (data, spec): fixed canvas, fixed palette, fixed numeric
/// formatting, so identical inputs give byte-identical SVG. Rows whose cells
/// do not parse as numbers (or are nonpositive on a log axis) are skipped;
/// throws MissingColumn for unknown columns and EmptyData when nothing
/// remains to draw.
std::string render_plot_svg(const Table& data, const PlotSpec& spec);

/// render and write to path (parent directories created)
void emit_plot(const Table& data, const PlotSpec& spec, const std::string& path);

} // namespace otcut
