#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "dlma/metrics.hpp"
#include "dlma/sweep.hpp"

namespace dlma::harness {

// One line of the per-run table. Rows are emitted slot-major (all nodes of
// slot 1, then slot 2, ...). `short_tp` is NaN until the window has filled.
// Legacy nodes carry zeros in the two state-statistics columns.
struct RunCsvRow {
    std::int64_t t = 0;  // 1-based slot index
    int node_id = 0;
    int reward = 0;
    double short_tp = 0.0;
    double cum_tp = 0.0;
    std::uint32_t distinct_states = 0;
    std::uint32_t prior_visits = 0;
};

// Header: t,node_id,reward,short_tp,cum_tp,distinct_states,prior_visits
// Floats use '.' and 6 fractional digits; lines end with '\n'.
void write_run_csv(std::ostream& out, const MetricsRecord& metrics, int window);
void write_run_csv(const std::filesystem::path& path, const MetricsRecord& metrics, int window);
std::vector<RunCsvRow> read_run_csv(std::istream& in);
std::vector<RunCsvRow> read_run_csv(const std::filesystem::path& path);

// Header: param,seed,node_id,achieved_tp,oracle_tp
void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);
void write_sweep_csv(const std::filesystem::path& path, std::span<const SweepRow> rows);
std::vector<SweepRow> read_sweep_csv(std::istream& in);
std::vector<SweepRow> read_sweep_csv(const std::filesystem::path& path);

}  // namespace dlma::harness
