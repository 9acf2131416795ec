#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace dlma::harness {

// One polyline on a line chart. NaN y-values break the line (used for the
// not-yet-filled short-term window).
struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

// One category on an achieved-vs-benchmark bar chart.
struct BarGroup {
    std::string category;
    double achieved = 0.0;
    double oracle = 0.0;
};

void write_line_chart(std::ostream& out, std::span<const Series> series, const std::string& title,
                      const std::string& x_label, const std::string& y_label);
void write_line_chart(const std::filesystem::path& path, std::span<const Series> series,
                      const std::string& title, const std::string& x_label,
                      const std::string& y_label);

void write_bar_chart(std::ostream& out, std::span<const BarGroup> groups, const std::string& title,
                     const std::string& y_label);
void write_bar_chart(const std::filesystem::path& path, std::span<const BarGroup> groups,
                     const std::string& title, const std::string& y_label);

}  // namespace dlma::harness
