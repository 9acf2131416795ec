#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "dlma/config.hpp"

namespace dlma::oracle {

enum class Method { closed_form, grid_search, dp };

// What a protocol-aware agent could achieve against the configured legacy
// nodes. per_node lists the legacy nodes in declaration order followed by one
// fused entry covering all learner-driven transmitters together.
struct BenchmarkResult {
    double sum = 0.0;
    std::vector<double> per_node;
    std::string policy;
    Method method = Method::closed_form;
};

struct UnsupportedScenario : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Best achievable long-run sum throughput. Supports any mix of TDMA and
// q-ALOHA nodes (closed form over frame positions) and a single windowed
// ALOHA node (average-reward dynamic programming over its counter state).
BenchmarkResult optimal_sum(const harness::ScenarioConfig& cfg);

// Best achievable alpha-fairness objective value, maximizing
// sum_i f_alpha(x_i) + k * f_alpha(x_agent / k) over stationary agent
// policies (one transmit probability per frame-position class). TDMA and
// q-ALOHA mixes only; alpha = 0 collapses to optimal_sum.
BenchmarkResult optimal_alpha_fair(const harness::ScenarioConfig& cfg, double alpha, int k);

// A fixed agent policy: transmit probability indexed by slot mod p.size().
struct StationaryAgentPolicy {
    std::vector<double> p;
};

// Empirical long-run per-node throughput (legacy order, agent last) under a
// fixed policy; the seeded simulation backs the analytic results in tests.
std::vector<double> policy_value(const harness::ScenarioConfig& cfg,
                                 const StationaryAgentPolicy& policy, std::int64_t horizon,
                                 std::uint64_t seed = 12345);

std::string to_string(Method m);

}  // namespace dlma::oracle
