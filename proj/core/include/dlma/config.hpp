#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "dlma/env.hpp"
#include "dlma/nn.hpp"

namespace dlma::harness {

enum class AgentMode { tabular_rl, dqn_sum, dqn_fair, multi_independent };

// Complete declarative description of one experiment. Field names double as
// the config-file keys. Numeric defaults are the protocol's standard
// hyper-parameter set.
struct ScenarioConfig {
    std::vector<env::ProtocolSpec> nodes;  // legacy nodes, declaration order

    AgentMode mode = AgentMode::dqn_sum;
    double alpha = 0.0;  // fairness exponent (dqn_fair)
    int k = 1;           // physical learner-driven nodes (dqn_fair / multi_independent)

    int m = 20;            // state history length
    double gamma = 0.9;    // discount factor
    double eps_initial = 0.1;
    double eps_decay = 0.995;
    double eps_floor = 0.005;
    double rho = 0.01;     // network learning rate
    double beta = 0.5;     // tabular learning rate
    int f = 200;           // target-network refresh period (slots)
    int batch = 32;        // minibatch size
    int capacity = 500;    // replay memory capacity
    nn::Arch arch = nn::Arch::resnet;
    int hidden_layers = 6;
    int hidden_width = 64;

    std::int64_t t = 50000;  // total slots
    std::uint64_t seed = 1;
    int window = 1000;       // short-term throughput window

    void validate() const;  // throws std::invalid_argument naming the field

    // Transmitters the channel arbitrates for the learning side.
    int transmitter_count() const;
    // Learner-backed rows in metrics and CSV output.
    int physical_agents() const;
};

std::string to_string(AgentMode m);

// Raw key/value layer beneath ScenarioConfig: lines of `key = value`,
// '#' comments, indexed node groups (node.0.kind = tdma, node.0.x = 1,3 ...).
using KvMap = std::map<std::string, std::string>;

KvMap parse_kv_text(const std::string& text);
KvMap parse_kv_file(const std::filesystem::path& path);

// In-place `key=value` assignment, as given on the command line.
void apply_override(KvMap& kv, const std::string& assignment);

// Slot sets: comma- or semicolon-separated entries, each either one position
// or an inclusive range `a-b` (so "0-1" is {0,1} and "1;3" is {1,3}).
std::vector<int> parse_slot_set(const std::string& text);

// Builds and validates a ScenarioConfig; unknown keys are rejected by name.
ScenarioConfig config_from_kv(const KvMap& kv);

}  // namespace dlma::harness
