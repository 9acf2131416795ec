#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace dlma::harness {

// Everything a run records. Node rows are ordered legacy nodes first
// (declaration order), then the physical learner-backed nodes. For the fused
// big agent, one learner backs several node rows.
struct MetricsRecord {
    std::int64_t slots = 0;
    int legacy_count = 0;
    int agent_count = 0;  // physical learner-backed nodes

    // success[node][slot] is that node's reward bit r^(i) in {0,1}.
    std::vector<std::vector<std::uint8_t>> success;
    // node_learner[node]: -1 for legacy rows, else the backing learner index.
    std::vector<int> node_learner;
    // Per learner and slot: distinct states seen so far, and how many times
    // the slot's state had been visited before.
    std::vector<std::vector<std::uint32_t>> distinct;
    std::vector<std::vector<std::uint32_t>> prior;

    int node_count() const { return legacy_count + agent_count; }
};

// Mean reward over slots t-n+1 .. t (1-based); empty before the window fills.
std::optional<double> short_term_throughput(std::span<const std::uint8_t> rewards, std::int64_t t,
                                            int n);

// Mean reward over slots 1 .. t; empty at t = 0.
std::optional<double> cumulative_throughput(std::span<const std::uint8_t> rewards, std::int64_t t);

// Per-slot indicator that the channel carried a packet (sum of node rows).
std::vector<std::uint8_t> channel_series(const MetricsRecord& metrics);

}  // namespace dlma::harness
