#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sharpscope/io/csv.hpp"

namespace sharpscope::io {

/// Static line/scatter plots with optional log axes. Pure presentation over
/// values that already live in a CSV: no state, deterministic byte output.
struct Series {
    std::vector<double> x;
    std::vector<double> y;
    std::string label;
    std::string color = "#1f77b4";
    bool dashed = false;
    bool points = false;
    std::vector<std::string> point_titles;  // optional hover titles per point
    // optional horizontal error-bar extents (used for quantile bars)
    std::vector<double> bar_lo, bar_hi;
};

struct Axis {
    std::string label;
    int log_base = 0;  // 0 = linear, otherwise 2 or 10
};

inline const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                 "#ff7f0e", "#8c564b", "#17becf"};

struct Panel {
    std::string title;
    Axis x_axis, y_axis;
    std::vector<Series> series;
    std::vector<double> hlines;  // dashed horizontal reference lines
    std::vector<double> vlines;

    static constexpr double kW = 420, kH = 320, kMarginL = 62, kMarginR = 14, kMarginT = 30,
                            kMarginB = 46;
};

namespace detail {

inline double tf(double v, int log_base) {
    if (log_base == 0) return v;
    return std::log(v) / std::log(static_cast<double>(log_base));
}

inline std::string fmt_tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    void take(double v) {
        if (!std::isfinite(v)) return;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    bool ok() const { return lo <= hi; }
    void pad() {
        if (!ok()) {
            lo = 0;
            hi = 1;
        }
        if (lo == hi) {
            lo -= 0.5;
            hi += 0.5;
        }
        const double m = 0.04 * (hi - lo);
        lo -= m;
        hi += m;
    }
};

inline std::vector<double> ticks_linear(double lo, double hi, int target = 5) {
    const double span = hi - lo;
    const double raw = span / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (mag * m >= raw) {
            step = mag * m;
            break;
        }
    std::vector<double> out;
    for (double t = std::ceil(lo / step) * step; t <= hi + 1e-12 * span; t += step)
        out.push_back(t);
    return out;
}

}  // namespace detail

inline std::string render_panel(const Panel& panel, double x_off) {
    using detail::tf;
    detail::Range xr, yr;
    for (const auto& s : panel.series) {
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            const double tx = tf(s.x[i], panel.x_axis.log_base);
            const double ty = tf(s.y[i], panel.y_axis.log_base);
            if (panel.y_axis.log_base != 0 && !(s.y[i] > 0.0)) continue;
            xr.take(tx);
            yr.take(ty);
        }
        for (double b : s.bar_lo) xr.take(tf(b, panel.x_axis.log_base));
        for (double b : s.bar_hi) xr.take(tf(b, panel.x_axis.log_base));
    }
    for (double h : panel.hlines) yr.take(tf(h, panel.y_axis.log_base));
    for (double v : panel.vlines) xr.take(tf(v, panel.x_axis.log_base));
    xr.pad();
    yr.pad();

    const double plot_w = Panel::kW - Panel::kMarginL - Panel::kMarginR;
    const double plot_h = Panel::kH - Panel::kMarginT - Panel::kMarginB;
    auto px = [&](double v) {
        return Panel::kMarginL + plot_w * (tf(v, panel.x_axis.log_base) - xr.lo) / (xr.hi - xr.lo);
    };
    auto py = [&](double v) {
        return Panel::kMarginT +
               plot_h * (1.0 - (tf(v, panel.y_axis.log_base) - yr.lo) / (yr.hi - yr.lo));
    };

    std::ostringstream out;
    out << "<g transform=\"translate(" << format_double(x_off) << ",0)\">\n";
    out << "<rect x=\"" << Panel::kMarginL << "\" y=\"" << Panel::kMarginT << "\" width=\""
        << plot_w << "\" height=\"" << plot_h << "\" fill=\"white\" stroke=\"#444\"/>\n";
    out << "<text x=\"" << Panel::kW / 2 << "\" y=\"18\" text-anchor=\"middle\" font-size=\"13\">"
        << panel.title << "</text>\n";

    auto axis_ticks = [&](const Axis& axis, const detail::Range& r) {
        std::vector<double> ticks;
        if (axis.log_base == 0) {
            ticks = detail::ticks_linear(r.lo, r.hi);
        } else {
            for (double e = std::ceil(r.lo); e <= std::floor(r.hi) + 1e-9; e += 1.0)
                ticks.push_back(std::pow(static_cast<double>(axis.log_base), e));
        }
        return ticks;
    };

    for (double t : axis_ticks(panel.x_axis, xr)) {
        const double x = Panel::kMarginL +
                         plot_w * (tf(t, panel.x_axis.log_base) - xr.lo) / (xr.hi - xr.lo);
        out << "<line x1=\"" << format_double(x) << "\" y1=\"" << Panel::kMarginT + plot_h
            << "\" x2=\"" << format_double(x) << "\" y2=\"" << Panel::kMarginT + plot_h + 4
            << "\" stroke=\"#444\"/>\n";
        out << "<text x=\"" << format_double(x) << "\" y=\"" << Panel::kMarginT + plot_h + 17
            << "\" text-anchor=\"middle\" font-size=\"10\">" << detail::fmt_tick(t)
            << "</text>\n";
    }
    for (double t : axis_ticks(panel.y_axis, yr)) {
        const double y = Panel::kMarginT +
                         plot_h * (1.0 - (tf(t, panel.y_axis.log_base) - yr.lo) / (yr.hi - yr.lo));
        out << "<line x1=\"" << Panel::kMarginL - 4 << "\" y1=\"" << format_double(y) << "\" x2=\""
            << Panel::kMarginL << "\" y2=\"" << format_double(y) << "\" stroke=\"#444\"/>\n";
        out << "<text x=\"" << Panel::kMarginL - 7 << "\" y=\"" << format_double(y + 3)
            << "\" text-anchor=\"end\" font-size=\"10\">" << detail::fmt_tick(t) << "</text>\n";
    }
    out << "<text x=\"" << Panel::kMarginL + plot_w / 2 << "\" y=\"" << Panel::kH - 10
        << "\" text-anchor=\"middle\" font-size=\"11\">" << panel.x_axis.label << "</text>\n";
    out << "<text x=\"16\" y=\"" << Panel::kMarginT + plot_h / 2
        << "\" text-anchor=\"middle\" font-size=\"11\" transform=\"rotate(-90 16 "
        << Panel::kMarginT + plot_h / 2 << ")\">" << panel.y_axis.label << "</text>\n";

    for (double h : panel.hlines) {
        const double y = py(h);
        out << "<line x1=\"" << Panel::kMarginL << "\" y1=\"" << format_double(y) << "\" x2=\""
            << Panel::kMarginL + plot_w << "\" y2=\"" << format_double(y)
            << "\" stroke=\"#888\" stroke-dasharray=\"5,4\"/>\n";
    }
    for (double v : panel.vlines) {
        const double x = px(v);
        out << "<line x1=\"" << format_double(x) << "\" y1=\"" << Panel::kMarginT << "\" x2=\""
            << format_double(x) << "\" y2=\"" << Panel::kMarginT + plot_h
            << "\" stroke=\"#888\" stroke-dasharray=\"2,3\"/>\n";
    }

    int legend_row = 0;
    for (const auto& s : panel.series) {
        auto visible = [&](std::size_t i) {
            if (panel.y_axis.log_base != 0 && !(s.y[i] > 0.0)) return false;
            if (panel.x_axis.log_base != 0 && !(s.x[i] > 0.0)) return false;
            return std::isfinite(s.x[i]) && std::isfinite(s.y[i]);
        };
        std::ostringstream path;
        bool pen_down = false;
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!visible(i)) {
                pen_down = false;
                continue;
            }
            path << (pen_down ? "L" : "M") << format_double(px(s.x[i])) << " "
                 << format_double(py(s.y[i])) << " ";
            pen_down = true;
        }
        out << "<path d=\"" << path.str() << "\" fill=\"none\" stroke=\"" << s.color
            << "\" stroke-width=\"1.5\"";
        if (s.dashed) out << " stroke-dasharray=\"6,3\"";
        out << "/>\n";

        for (std::size_t i = 0; i < s.bar_lo.size() && i < s.x.size(); ++i) {
            if (!visible(i)) continue;
            const double y = py(s.y[i]);
            out << "<line x1=\"" << format_double(px(s.bar_lo[i])) << "\" y1=\""
                << format_double(y) << "\" x2=\"" << format_double(px(s.bar_hi[i])) << "\" y2=\""
                << format_double(y) << "\" stroke=\"" << s.color << "\" stroke-width=\"1\"/>\n";
        }
        if (s.points) {
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (!visible(i)) continue;
                out << "<circle cx=\"" << format_double(px(s.x[i])) << "\" cy=\""
                    << format_double(py(s.y[i])) << "\" r=\"2.5\" fill=\"" << s.color << "\">";
                if (i < s.point_titles.size())
                    out << "<title>" << s.point_titles[i] << "</title>";
                else
                    out << "<title>(" << format_double(s.x[i]) << ", " << format_double(s.y[i])
                        << ")</title>";
                out << "</circle>\n";
            }
        }
        if (!s.label.empty()) {
            const double ly = Panel::kMarginT + 12 + 13 * legend_row++;
            out << "<line x1=\"" << Panel::kMarginL + 8 << "\" y1=\"" << ly - 3 << "\" x2=\""
                << Panel::kMarginL + 26 << "\" y2=\"" << ly - 3 << "\" stroke=\"" << s.color
                << "\" stroke-width=\"2\"" << (s.dashed ? " stroke-dasharray=\"6,3\"" : "")
                << "/>\n";
            out << "<text x=\"" << Panel::kMarginL + 30 << "\" y=\"" << ly
                << "\" font-size=\"10\">" << s.label << "</text>\n";
        }
    }
    out << "</g>\n";
    return out.str();
}

/// Horizontal row of panels in one SVG document, with the manifest hash in a
/// leading comment.
inline std::string render_svg(const std::vector<Panel>& panels,
                              const std::string& manifest_hash) {
    std::ostringstream out;
    const double total_w = Panel::kW * static_cast<double>(panels.size());
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<!-- manifest=" << manifest_hash << " -->\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << total_w << " "
        << Panel::kH << "\" width=\"" << total_w << "\" height=\"" << Panel::kH
        << "\" font-family=\"sans-serif\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (std::size_t i = 0; i < panels.size(); ++i)
        out << render_panel(panels[i], Panel::kW * static_cast<double>(i));
    out << "</svg>\n";
    return out.str();
}

}  // namespace sharpscope::io
