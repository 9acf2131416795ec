#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dlma/config.hpp"

namespace dlma::harness {

// One measurement of a sweep. `param` is the swept value verbatim. Rows with
// node_id == -1 cover the whole channel; rows with seed == -1 aggregate the
// mean over all seeds of that (param, node_id) cell.
struct SweepRow {
    std::string param;
    std::int64_t seed = 0;
    int node_id = 0;
    double achieved = 0.0;
    double oracle = 0.0;
};

struct SweepSpec {
    std::string key;                  // config key to vary
    std::vector<std::string> values;  // one run batch per value
    int seeds = 10;                   // consecutive seeds starting at the config's
    int jobs = 1;                     // worker threads
};

// Runs every (value, seed) combination of `spec` on top of the `base` config
// text and compares the achieved throughput of every node against the
// model-aware benchmark for that scenario. Row order: for each value, per-seed
// node rows then the channel row, followed by the seed == -1 aggregates.
std::vector<SweepRow> sweep(const KvMap& base, const SweepSpec& spec);

}  // namespace dlma::harness
