#pragma once

#include <string>
#include <vector>

#include "carfollow/analysis.hpp"
#include "carfollow/sim.hpp"

namespace carfollow::io {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    std::string color = "#1f77b4";
    bool dashed = false;
};

struct Rect {
    double x0 = 0.0;
    double y0 = 0.0;
    double x1 = 0.0;
    double y1 = 0.0;
};

struct Panel {
    std::string title;
    std::string xlabel;
    std::string ylabel;
    std::vector<Series> series;
    std::vector<Rect> shaded;  ///< filled regions in data coordinates
    std::string shade_color = "#9ecae1";
};

/// Grid of panels, row-major.
struct Figure {
    std::string title;
    int rows = 1;
    int cols = 1;
    std::vector<Panel> panels;
};

/// Static SVG 1.1 document with polylines, axes, ticks and legends.
[[nodiscard]] std::string render_svg(const Figure& fig);

/// Distance / speeds / accelerations panels, one column per trace.
[[nodiscard]] Figure trace_figure(const std::string& title, const std::vector<const sim::SimTrace*>& traces);

/// Shaded string-stable region in the (k2, k1) plane, one panel per headway.
[[nodiscard]] Figure stability_figure(const std::vector<analysis::StabilityCell>& cells);

}  // namespace carfollow::io
