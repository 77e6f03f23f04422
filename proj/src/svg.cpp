#include "carfollow/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

namespace carfollow::io {
namespace {

constexpr double kPanelW = 420.0;
constexpr double kPanelH = 240.0;
constexpr double kMarginL = 60.0;
constexpr double kMarginR = 15.0;
constexpr double kMarginT = 28.0;
constexpr double kMarginB = 40.0;
constexpr double kTitleH = 30.0;

std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick_label(double v)
{
    if (std::abs(v) < 1e-12) {
        v = 0.0;
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

std::string escape(const std::string& s)
{
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

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void add(double v)
    {
        if (std::isfinite(v)) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    void finish()
    {
        if (!std::isfinite(lo)) {
            lo = 0.0;
            hi = 1.0;
        }
        if (hi - lo < 1e-9) {
            const double pad = std::max(std::abs(lo) * 0.1, 0.5);
            lo -= pad;
            hi += pad;
        }
    }
};

double nice_step(double span)
{
    const double raw = span / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double f = raw / mag;
    const double nice = f < 1.5 ? 1.0 : f < 3.5 ? 2.0 : f < 7.5 ? 5.0 : 10.0;
    return nice * mag;
}

void render_panel(std::ostringstream& o, const Panel& p, double ox, double oy)
{
    Range xr;
    Range yr;
    for (const auto& s : p.series) {
        for (double v : s.x) xr.add(v);
        for (double v : s.y) yr.add(v);
    }
    for (const auto& r : p.shaded) {
        xr.add(r.x0);
        xr.add(r.x1);
        yr.add(r.y0);
        yr.add(r.y1);
    }
    xr.finish();
    yr.finish();

    const double x0 = ox + kMarginL;
    const double y0 = oy + kMarginT;
    const double w = kPanelW - kMarginL - kMarginR;
    const double h = kPanelH - kMarginT - kMarginB;
    auto px = [&](double v) { return x0 + (v - xr.lo) / (xr.hi - xr.lo) * w; };
    auto py = [&](double v) { return y0 + h - (v - yr.lo) / (yr.hi - yr.lo) * h; };

    o << "<g>\n";
    o << "<text x=\"" << num(x0 + w / 2) << "\" y=\"" << num(oy + 18) << "\" text-anchor=\"middle\" font-size=\"13\">"
      << escape(p.title) << "</text>\n";

    for (const auto& r : p.shaded) {
        o << "<rect x=\"" << num(px(r.x0)) << "\" y=\"" << num(py(r.y1)) << "\" width=\""
          << num(px(r.x1) - px(r.x0)) << "\" height=\"" << num(py(r.y0) - py(r.y1)) << "\" fill=\"" << p.shade_color
          << "\" stroke=\"none\"/>\n";
    }

    o << "<rect x=\"" << num(x0) << "\" y=\"" << num(y0) << "\" width=\"" << num(w) << "\" height=\"" << num(h)
      << "\" fill=\"none\" stroke=\"#000\" stroke-width=\"1\"/>\n";

    const double xs = nice_step(xr.hi - xr.lo);
    for (double t = std::ceil(xr.lo / xs) * xs; t <= xr.hi + 1e-9 * xs; t += xs) {
        o << "<line x1=\"" << num(px(t)) << "\" y1=\"" << num(y0 + h) << "\" x2=\"" << num(px(t)) << "\" y2=\""
          << num(y0 + h + 4) << "\" stroke=\"#000\"/>\n";
        o << "<text x=\"" << num(px(t)) << "\" y=\"" << num(y0 + h + 16) << "\" text-anchor=\"middle\" font-size=\"10\">"
          << tick_label(t) << "</text>\n";
    }
    const double ys = nice_step(yr.hi - yr.lo);
    for (double t = std::ceil(yr.lo / ys) * ys; t <= yr.hi + 1e-9 * ys; t += ys) {
        o << "<line x1=\"" << num(x0 - 4) << "\" y1=\"" << num(py(t)) << "\" x2=\"" << num(x0) << "\" y2=\""
          << num(py(t)) << "\" stroke=\"#000\"/>\n";
        o << "<text x=\"" << num(x0 - 6) << "\" y=\"" << num(py(t) + 3) << "\" text-anchor=\"end\" font-size=\"10\">"
          << tick_label(t) << "</text>\n";
    }
    o << "<text x=\"" << num(x0 + w / 2) << "\" y=\"" << num(y0 + h + 32) << "\" text-anchor=\"middle\" font-size=\"11\">"
      << escape(p.xlabel) << "</text>\n";
    o << "<text x=\"" << num(ox + 14) << "\" y=\"" << num(y0 + h / 2) << "\" text-anchor=\"middle\" font-size=\"11\" "
      << "transform=\"rotate(-90 " << num(ox + 14) << ' ' << num(y0 + h / 2) << ")\">" << escape(p.ylabel)
      << "</text>\n";

    for (const auto& s : p.series) {
        o << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.4\"";
        if (s.dashed) {
            o << " stroke-dasharray=\"6,4\"";
        }
        o << " points=\"";
        const std::size_t n = std::min(s.x.size(), s.y.size());
        // thin long traces to at most ~2000 vertices
        const std::size_t stride = std::max<std::size_t>(1, n / 2000);
        bool first = true;
        for (std::size_t i = 0; i < n; i += stride) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            o << (first ? "" : " ") << num(px(s.x[i])) << ',' << num(py(s.y[i]));
            first = false;
        }
        if (n > 0 && (n - 1) % stride != 0 && std::isfinite(s.x[n - 1]) && std::isfinite(s.y[n - 1])) {
            o << ' ' << num(px(s.x[n - 1])) << ',' << num(py(s.y[n - 1]));
        }
        o << "\"/>\n";
    }

    double ly = y0 + 12;
    for (const auto& s : p.series) {
        if (s.label.empty()) continue;
        const double lx = x0 + w - 110;
        o << "<line x1=\"" << num(lx) << "\" y1=\"" << num(ly - 4) << "\" x2=\"" << num(lx + 18) << "\" y2=\""
          << num(ly - 4) << "\" stroke=\"" << s.color << "\" stroke-width=\"1.4\""
          << (s.dashed ? " stroke-dasharray=\"6,4\"" : "") << "/>\n";
        o << "<text x=\"" << num(lx + 22) << "\" y=\"" << num(ly) << "\" font-size=\"10\">" << escape(s.label)
          << "</text>\n";
        ly += 13;
    }
    o << "</g>\n";
}

}  // namespace

std::string render_svg(const Figure& fig)
{
    const int rows = std::max(fig.rows, 1);
    const int cols = std::max(fig.cols, 1);
    const double width = cols * kPanelW;
    const double height = kTitleH + rows * kPanelH;

    std::ostringstream o;
    o << "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n";
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << num(width) << "\" height=\""
      << num(height) << "\" viewBox=\"0 0 " << num(width) << ' ' << num(height) << "\" font-family=\"sans-serif\">\n";
    o << "<rect x=\"0\" y=\"0\" width=\"" << num(width) << "\" height=\"" << num(height) << "\" fill=\"#fff\"/>\n";
    o << "<text x=\"" << num(width / 2) << "\" y=\"20\" text-anchor=\"middle\" font-size=\"15\">" << escape(fig.title)
      << "</text>\n";
    for (std::size_t i = 0; i < fig.panels.size() && i < static_cast<std::size_t>(rows * cols); ++i) {
        const auto r = static_cast<double>(i / cols);
        const auto c = static_cast<double>(i % cols);
        render_panel(o, fig.panels[i], c * kPanelW, kTitleH + r * kPanelH);
    }
    o << "</svg>\n";
    return o.str();
}

Figure trace_figure(const std::string& title, const std::vector<const sim::SimTrace*>& traces)
{
    Figure fig;
    fig.title = title;
    fig.rows = 3;
    fig.cols = static_cast<int>(std::max<std::size_t>(traces.size(), 1));
    fig.panels.resize(static_cast<std::size_t>(fig.rows * fig.cols));

    for (std::size_t c = 0; c < traces.size(); ++c) {
        const auto& tr = *traces[c];
        const auto t = tr.column(&sim::TraceRow::t);

        Panel& top = fig.panels[c];
        top.title = tr.scenario;
        top.xlabel = "t [s]";
        top.ylabel = "distance [m]";
        top.series = {{"h", t, tr.column(&sim::TraceRow::h), "#1f77b4", false},
                      {"h_des", t, tr.column(&sim::TraceRow::h_des), "#d62728", true}};

        Panel& mid = fig.panels[static_cast<std::size_t>(fig.cols) + c];
        mid.xlabel = "t [s]";
        mid.ylabel = "speed [m/s]";
        mid.series = {{"v_P", t, tr.column(&sim::TraceRow::v_P), "#2ca02c", false},
                      {"v_F", t, tr.column(&sim::TraceRow::v_F), "#1f77b4", false},
                      {"v_des", t, tr.column(&sim::TraceRow::v_des), "#d62728", true},
                      {"S", t, tr.column(&sim::TraceRow::S), "#9467bd", false}};

        Panel& bot = fig.panels[static_cast<std::size_t>(2 * fig.cols) + c];
        bot.xlabel = "t [s]";
        bot.ylabel = "acceleration [m/s^2]";
        bot.series = {{"a_des", t, tr.column(&sim::TraceRow::a_des), "#1f77b4", false},
                      {"a_cf", t, tr.column(&sim::TraceRow::a_cf), "#d62728", true},
                      {"a_fb", t, tr.column(&sim::TraceRow::a_fb), "#2ca02c", false}};
    }
    return fig;
}

Figure stability_figure(const std::vector<analysis::StabilityCell>& cells)
{
    std::map<double, std::vector<const analysis::StabilityCell*>> by_headway;
    for (const auto& c : cells) {
        by_headway[c.t_h].push_back(&c);
    }

    Figure fig;
    fig.title = "string stable region in the (k2, k1) plane";
    fig.cols = static_cast<int>(std::min<std::size_t>(by_headway.size(), 2));
    fig.rows = static_cast<int>((by_headway.size() + 1) / 2);

    // larger headways first
    for (auto it = by_headway.rbegin(); it != by_headway.rend(); ++it) {
        const double t_h = it->first;
        auto& group = it->second;

        std::vector<double> k2s;
        std::vector<double> k1s;
        for (const auto* c : group) {
            k2s.push_back(c->k2);
            k1s.push_back(c->k1);
        }
        std::sort(k2s.begin(), k2s.end());
        k2s.erase(std::unique(k2s.begin(), k2s.end()), k2s.end());
        std::sort(k1s.begin(), k1s.end());
        k1s.erase(std::unique(k1s.begin(), k1s.end()), k1s.end());
        const double dk2 = k2s.size() > 1 ? k2s[1] - k2s[0] : 1.0;
        const double dk1 = k1s.size() > 1 ? k1s[1] - k1s[0] : 1.0;

        Panel p;
        p.title = "t_h = " + tick_label(t_h) + " s";
        p.xlabel = "k2 [1/s]";
        p.ylabel = "k1 [1/s]";

        // cells arrive sorted by (k2, k1); merge vertical runs per column
        std::sort(group.begin(), group.end(), [](const auto* a, const auto* b) {
            return a->k2 != b->k2 ? a->k2 < b->k2 : a->k1 < b->k1;
        });
        for (std::size_t i = 0; i < group.size();) {
            if (!group[i]->string_stable) {
                ++i;
                continue;
            }
            std::size_t j = i;
            while (j + 1 < group.size() && group[j + 1]->k2 == group[i]->k2 && group[j + 1]->string_stable) {
                ++j;
            }
            p.shaded.push_back({group[i]->k2 - dk2 / 2, group[i]->k1 - dk1 / 2, group[i]->k2 + dk2 / 2,
                                group[j]->k1 + dk1 / 2});
            i = j + 1;
        }

        if (!k1s.empty()) {
            const double k2_star = 1.0 / t_h;
            p.series.push_back({"k2* = 1/t_h", {k2_star, k2_star}, {k1s.front(), k1s.back()}, "#d62728", true});
        }
        fig.panels.push_back(std::move(p));
    }
    return fig;
}

}  // namespace carfollow::io
