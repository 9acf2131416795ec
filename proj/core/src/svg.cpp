#include "dlma/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <locale>
#include <ostream>
#include <stdexcept>

namespace dlma::harness {

namespace {

constexpr double width = 800.0;
constexpr double height = 480.0;
constexpr double margin_left = 70.0;
constexpr double margin_right = 160.0;
constexpr double margin_top = 46.0;
constexpr double margin_bottom = 56.0;

constexpr const char* palette[] = {"#1f6fb2", "#d1495b", "#2e8b57", "#8e5fa8",
                                   "#d18700", "#3f7f7f", "#7a5230", "#555555"};
constexpr int palette_size = static_cast<int>(sizeof(palette) / sizeof(palette[0]));

std::string escape(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string num(double v) {
    char buffer[48];
    std::snprintf(buffer, sizeof(buffer), "%.6g", v);
    return buffer;
}

struct Range {
    double lo = 0.0;
    double hi = 1.0;
    void widen(double v) {
        if (!std::isfinite(v)) return;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void finalize() {
        if (!(hi > lo)) hi = lo + 1.0;
    }
    double at(double v) const { return (v - lo) / (hi - lo); }
};

void open_svg(std::ostream& out, const std::string& title) {
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\""
        << num(height) << "\" viewBox=\"0 0 " << num(width) << ' ' << num(height) << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
    out << "<text x=\"" << num(width / 2) << "\" y=\"24\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"16\">" << escape(title) << "</text>\n";
}

void draw_axes(std::ostream& out, const Range& xr, const Range& yr, const std::string& x_label,
               const std::string& y_label) {
    const double x0 = margin_left;
    const double x1 = width - margin_right;
    const double y0 = height - margin_bottom;
    const double y1 = margin_top;
    out << "<line x1=\"" << num(x0) << "\" y1=\"" << num(y0) << "\" x2=\"" << num(x1)
        << "\" y2=\"" << num(y0) << "\" stroke=\"#222\"/>\n";
    out << "<line x1=\"" << num(x0) << "\" y1=\"" << num(y0) << "\" x2=\"" << num(x0)
        << "\" y2=\"" << num(y1) << "\" stroke=\"#222\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double f = i / 5.0;
        const double px = x0 + f * (x1 - x0);
        const double py = y0 - f * (y0 - y1);
        out << "<line x1=\"" << num(px) << "\" y1=\"" << num(y0) << "\" x2=\"" << num(px)
            << "\" y2=\"" << num(y0 + 5) << "\" stroke=\"#222\"/>\n";
        out << "<text x=\"" << num(px) << "\" y=\"" << num(y0 + 20)
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
            << num(xr.lo + f * (xr.hi - xr.lo)) << "</text>\n";
        out << "<line x1=\"" << num(x0 - 5) << "\" y1=\"" << num(py) << "\" x2=\"" << num(x0)
            << "\" y2=\"" << num(py) << "\" stroke=\"#222\"/>\n";
        out << "<text x=\"" << num(x0 - 9) << "\" y=\"" << num(py + 4)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
            << num(yr.lo + f * (yr.hi - yr.lo)) << "</text>\n";
    }
    out << "<text x=\"" << num((x0 + x1) / 2) << "\" y=\"" << num(height - 14)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
        << escape(x_label) << "</text>\n";
    out << "<text x=\"18\" y=\"" << num((y0 + y1) / 2)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
        << "transform=\"rotate(-90 18 " << num((y0 + y1) / 2) << ")\">" << escape(y_label)
        << "</text>\n";
}

void write_to_file(const std::filesystem::path& path, auto&& writer) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    writer(out);
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace

void write_line_chart(std::ostream& out, std::span<const Series> series, const std::string& title,
                      const std::string& x_label, const std::string& y_label) {
    out.imbue(std::locale::classic());
    Range xr, yr;
    bool any = false;
    for (const Series& s : series) {
        if (s.x.size() != s.y.size())
            throw std::invalid_argument("write_line_chart: series '" + s.label +
                                        "' has mismatched x/y lengths");
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.y[i])) continue;
            if (!any) {
                xr.lo = xr.hi = s.x[i];
                yr.lo = 0.0;
                yr.hi = s.y[i];
                any = true;
            }
            xr.widen(s.x[i]);
            yr.widen(s.y[i]);
        }
    }
    xr.finalize();
    yr.finalize();

    const double x0 = margin_left;
    const double x1 = width - margin_right;
    const double y0 = height - margin_bottom;
    const double y1 = margin_top;

    open_svg(out, title);
    draw_axes(out, xr, yr, x_label, y_label);
    int color = 0;
    for (const Series& s : series) {
        const char* stroke = palette[color % palette_size];
        ++color;
        bool in_run = false;
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.y[i])) {
                if (in_run) out << "\"/>\n";
                in_run = false;
                continue;
            }
            const double px = x0 + xr.at(s.x[i]) * (x1 - x0);
            const double py = y0 - yr.at(s.y[i]) * (y0 - y1);
            if (!in_run) {
                out << "<polyline fill=\"none\" stroke=\"" << stroke
                    << "\" stroke-width=\"1.5\" points=\"";
                in_run = true;
            } else {
                out << ' ';
            }
            out << num(px) << ',' << num(py);
        }
        if (in_run) out << "\"/>\n";
    }
    // legend
    double ly = margin_top + 8;
    color = 0;
    for (const Series& s : series) {
        const char* stroke = palette[color % palette_size];
        ++color;
        out << "<line x1=\"" << num(x1 + 12) << "\" y1=\"" << num(ly) << "\" x2=\""
            << num(x1 + 34) << "\" y2=\"" << num(ly) << "\" stroke=\"" << stroke
            << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << num(x1 + 40) << "\" y=\"" << num(ly + 4)
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << escape(s.label)
            << "</text>\n";
        ly += 18;
    }
    out << "</svg>\n";
    if (!out) throw std::runtime_error("write_line_chart: stream failure");
}

void write_line_chart(const std::filesystem::path& path, std::span<const Series> series,
                      const std::string& title, const std::string& x_label,
                      const std::string& y_label) {
    write_to_file(path, [&](std::ostream& out) {
        write_line_chart(out, series, title, x_label, y_label);
    });
}

void write_bar_chart(std::ostream& out, std::span<const BarGroup> groups, const std::string& title,
                     const std::string& y_label) {
    out.imbue(std::locale::classic());
    Range yr;
    yr.lo = 0.0;
    yr.hi = 0.0;
    for (const BarGroup& g : groups) {
        yr.widen(g.achieved);
        yr.widen(g.oracle);
    }
    yr.finalize();

    const double x0 = margin_left;
    const double x1 = width - margin_right;
    const double y0 = height - margin_bottom;
    const double y1 = margin_top;

    open_svg(out, title);
    Range xr;
    xr.lo = 0.0;
    xr.hi = std::max<std::size_t>(groups.size(), 1);
    draw_axes(out, xr, yr, "", y_label);

    const double cell = (x1 - x0) / std::max<std::size_t>(groups.size(), 1);
    const double bar = cell * 0.32;
    for (std::size_t i = 0; i < groups.size(); ++i) {
        const BarGroup& g = groups[i];
        const double cx = x0 + (static_cast<double>(i) + 0.5) * cell;
        const double ha = yr.at(std::max(g.achieved, 0.0)) * (y0 - y1);
        const double ho = yr.at(std::max(g.oracle, 0.0)) * (y0 - y1);
        out << "<rect x=\"" << num(cx - bar - 1) << "\" y=\"" << num(y0 - ha) << "\" width=\""
            << num(bar) << "\" height=\"" << num(ha) << "\" fill=\"" << palette[0] << "\"/>\n";
        out << "<rect x=\"" << num(cx + 1) << "\" y=\"" << num(y0 - ho) << "\" width=\""
            << num(bar) << "\" height=\"" << num(ho)
            << "\" fill=\"none\" stroke=\"#444\" stroke-width=\"1.5\"/>\n";
        out << "<text x=\"" << num(cx) << "\" y=\"" << num(y0 + 20)
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
            << escape(g.category) << "</text>\n";
    }
    out << "<rect x=\"" << num(x1 + 12) << "\" y=\"" << num(margin_top) << "\" width=\"14\" "
        << "height=\"12\" fill=\"" << palette[0] << "\"/>\n";
    out << "<text x=\"" << num(x1 + 32) << "\" y=\"" << num(margin_top + 10)
        << "\" font-family=\"sans-serif\" font-size=\"12\">achieved</text>\n";
    out << "<rect x=\"" << num(x1 + 12) << "\" y=\"" << num(margin_top + 20)
        << "\" width=\"14\" height=\"12\" fill=\"none\" stroke=\"#444\"/>\n";
    out << "<text x=\"" << num(x1 + 32) << "\" y=\"" << num(margin_top + 30)
        << "\" font-family=\"sans-serif\" font-size=\"12\">benchmark</text>\n";
    out << "</svg>\n";
    if (!out) throw std::runtime_error("write_bar_chart: stream failure");
}

void write_bar_chart(const std::filesystem::path& path, std::span<const BarGroup> groups,
                     const std::string& title, const std::string& y_label) {
    write_to_file(path, [&](std::ostream& out) { write_bar_chart(out, groups, title, y_label); });
}

}  // namespace dlma::harness
