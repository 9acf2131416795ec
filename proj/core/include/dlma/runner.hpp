#pragma once

#include "dlma/config.hpp"
#include "dlma/metrics.hpp"

namespace dlma::harness {

// Execute one seeded experiment: build the channel and learners, drive the
// slot loop, record per-node rewards and state-visit statistics. The single
// run RNG is consumed in a fixed order (channel bootstrap, learner weight
// init, then per slot: action draws in learner order, legacy node draws in
// node order, training draws in learner order), so a config and seed pin the
// whole trajectory.
MetricsRecord run(const ScenarioConfig& cfg);

}  // namespace dlma::harness
