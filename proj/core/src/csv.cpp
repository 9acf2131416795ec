#include "dlma/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <locale>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace dlma::harness {

namespace {

constexpr const char* run_header = "t,node_id,reward,short_tp,cum_tp,distinct_states,prior_visits";
constexpr const char* sweep_header = "param,seed,node_id,achieved_tp,oracle_tp";

void print_float(std::ostream& out, double x) {
    if (std::isnan(x)) {
        out << "nan";
        return;
    }
    out << std::fixed << std::setprecision(6) << x;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
    return in;
}

std::vector<std::string> split_fields(const std::string& line, std::size_t expect,
                                      std::size_t line_no) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        fields.push_back(line.substr(start, comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (fields.size() != expect) {
        throw std::runtime_error("csv line " + std::to_string(line_no) + ": expected " +
                                 std::to_string(expect) + " fields, got " +
                                 std::to_string(fields.size()));
    }
    return fields;
}

template <typename Int>
Int parse_int(const std::string& field, std::size_t line_no) {
    Int value{};
    const char* end = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(field.data(), end, value);
    if (ec != std::errc{} || ptr != end)
        throw std::runtime_error("csv line " + std::to_string(line_no) + ": bad integer '" +
                                 field + "'");
    return value;
}

double parse_float(const std::string& field, std::size_t line_no) {
    if (field == "nan") return std::numeric_limits<double>::quiet_NaN();
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(field, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != field.size())
        throw std::runtime_error("csv line " + std::to_string(line_no) + ": bad number '" +
                                 field + "'");
    return value;
}

void expect_header(std::istream& in, const char* header) {
    std::string line;
    if (!std::getline(in, line) || line != header)
        throw std::runtime_error(std::string("csv: missing header '") + header + "'");
}

}  // namespace

void write_run_csv(std::ostream& out, const MetricsRecord& metrics, int window) {
    if (window < 1) throw std::invalid_argument("write_run_csv: window must be >= 1");
    out.imbue(std::locale::classic());
    out << run_header << '\n';

    const int nodes = metrics.node_count();
    std::vector<std::int64_t> cum(static_cast<std::size_t>(nodes), 0);
    std::vector<std::int64_t> win(static_cast<std::size_t>(nodes), 0);
    for (std::int64_t t = 1; t <= metrics.slots; ++t) {
        for (int n = 0; n < nodes; ++n) {
            const auto& row = metrics.success[static_cast<std::size_t>(n)];
            const int r = row[static_cast<std::size_t>(t - 1)];
            cum[static_cast<std::size_t>(n)] += r;
            win[static_cast<std::size_t>(n)] += r;
            if (t > window)
                win[static_cast<std::size_t>(n)] -= row[static_cast<std::size_t>(t - 1 - window)];

            out << t << ',' << n << ',' << r << ',';
            if (t < window)
                out << "nan";
            else
                print_float(out, static_cast<double>(win[static_cast<std::size_t>(n)]) / window);
            out << ',';
            print_float(out, static_cast<double>(cum[static_cast<std::size_t>(n)]) /
                                 static_cast<double>(t));
            const int learner = metrics.node_learner[static_cast<std::size_t>(n)];
            if (learner < 0) {
                out << ",0,0\n";
            } else {
                out << ',' << metrics.distinct[static_cast<std::size_t>(learner)][static_cast<std::size_t>(t - 1)]
                    << ',' << metrics.prior[static_cast<std::size_t>(learner)][static_cast<std::size_t>(t - 1)]
                    << '\n';
            }
        }
    }
    if (!out) throw std::runtime_error("write_run_csv: stream failure");
}

void write_run_csv(const std::filesystem::path& path, const MetricsRecord& metrics, int window) {
    auto out = open_out(path);
    write_run_csv(out, metrics, window);
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<RunCsvRow> read_run_csv(std::istream& in) {
    expect_header(in, run_header);
    std::vector<RunCsvRow> rows;
    std::string line;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split_fields(line, 7, line_no);
        RunCsvRow row;
        row.t = parse_int<std::int64_t>(f[0], line_no);
        row.node_id = parse_int<int>(f[1], line_no);
        row.reward = parse_int<int>(f[2], line_no);
        row.short_tp = parse_float(f[3], line_no);
        row.cum_tp = parse_float(f[4], line_no);
        row.distinct_states = parse_int<std::uint32_t>(f[5], line_no);
        row.prior_visits = parse_int<std::uint32_t>(f[6], line_no);
        rows.push_back(row);
    }
    return rows;
}

std::vector<RunCsvRow> read_run_csv(const std::filesystem::path& path) {
    auto in = open_in(path);
    return read_run_csv(in);
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
    out.imbue(std::locale::classic());
    out << sweep_header << '\n';
    for (const SweepRow& row : rows) {
        out << row.param << ',' << row.seed << ',' << row.node_id << ',';
        print_float(out, row.achieved);
        out << ',';
        print_float(out, row.oracle);
        out << '\n';
    }
    if (!out) throw std::runtime_error("write_sweep_csv: stream failure");
}

void write_sweep_csv(const std::filesystem::path& path, std::span<const SweepRow> rows) {
    auto out = open_out(path);
    write_sweep_csv(out, rows);
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<SweepRow> read_sweep_csv(std::istream& in) {
    expect_header(in, sweep_header);
    std::vector<SweepRow> rows;
    std::string line;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split_fields(line, 5, line_no);
        SweepRow row;
        row.param = f[0];
        row.seed = parse_int<std::int64_t>(f[1], line_no);
        row.node_id = parse_int<int>(f[2], line_no);
        row.achieved = parse_float(f[3], line_no);
        row.oracle = parse_float(f[4], line_no);
        rows.push_back(row);
    }
    return rows;
}

std::vector<SweepRow> read_sweep_csv(const std::filesystem::path& path) {
    auto in = open_in(path);
    return read_sweep_csv(in);
}

}  // namespace dlma::harness
