#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "dlma/env.hpp"
#include "dlma/nn.hpp"
#include "dlma/rng.hpp"

namespace dlma::agents {

// One slot of agent history is an (action, observation) pair. Five of the six
// combinations can occur; a transmitting agent never observes an idle channel.
// A sixth code pads histories before the first real slot.
inline constexpr int pair_symbols = 6;
inline constexpr int uninit_pair = 5;

// Codes 0..4 enumerate (transmit, success), (transmit, collision),
// (wait, success), (wait, collision), (wait, idleness).
int pair_code(env::AgentAction a, env::Observation z);

// The learner's Markov state: the last `history_len` pair codes, oldest first.
class AgentState {
public:
    explicit AgentState(int history_len);

    int history_len() const { return static_cast<int>(codes_.size()); }
    const std::vector<std::uint8_t>& codes() const { return codes_; }

    // Drop the oldest pair, append the newest.
    void update(env::AgentAction a, env::Observation z);

    // Base-6 packing of the history; injective, so it doubles as a hash-map
    // key for tabular learning and state-visit statistics. Limited to
    // history_len <= 24 (6^24 < 2^64).
    std::uint64_t key() const;

    static constexpr int max_keyed_history = 24;

private:
    std::vector<std::uint8_t> codes_;
};

// Encoded network-input width for a history of length m.
inline int encoded_width(int m) { return pair_symbols * m; }

// One-hot encode a history into dst[0 .. 6*len), oldest pair first.
void encode_state(std::span<const std::uint8_t> codes, double* dst);

// (s, a, r, s') transition; r has one entry per reward dimension.
struct Experience {
    std::vector<std::uint8_t> s;
    int a = 0;
    std::vector<double> r;
    std::vector<std::uint8_t> s2;
};

// Bounded FIFO of experiences; index 0 is always the oldest entry.
class ReplayMemory {
public:
    explicit ReplayMemory(int capacity);

    int capacity() const { return capacity_; }
    int size() const { return static_cast<int>(buf_.size()); }
    const Experience& operator[](int i) const { return buf_.at(static_cast<std::size_t>(i)); }

    void push(Experience e);

    // n distinct indices, uniform without replacement. Requires n <= size().
    std::vector<int> sample_indices(int n, Rng& rng) const;

private:
    int capacity_;
    std::deque<Experience> buf_;
};

// Exploration rate: eps(t) = max(floor, initial * decay^t).
struct EpsilonSchedule {
    double initial = 0.1;
    double decay = 0.995;
    double floor = 0.005;

    double at(std::int64_t t) const;
};

// Pick argmax of `scores` with probability 1 - eps (ties broken uniformly at
// random), otherwise a uniform random action.
int epsilon_greedy(std::span<const double> scores, double eps, Rng& rng);

// Sparse action-value table over packed state keys; unseen entries read 0.
class TabularQ {
public:
    double get(std::uint64_t state, int action) const;
    void set(std::uint64_t state, int action, double value);
    double max_over_actions(std::uint64_t state) const;
    std::size_t visited_states() const { return table_.size(); }

private:
    std::unordered_map<std::uint64_t, std::array<double, env::action_count>> table_;
};

// One-step bootstrap update: q(s,a) += beta * (r + gamma * max_a' q(s',a') - q(s,a)).
void tabular_update(TabularQ& q, std::uint64_t s, int a, double r, std::uint64_t s2, double beta,
                    double gamma);

// Bootstrap target r + gamma * max_a' q(s', a'; target_net).
double dqn_target(const nn::Params& target_net, const Eigen::VectorXd& s2_encoded, double r,
                  double gamma);

// One minibatch update of the scalar action-value network. Samples
// `batch_size` experiences, regresses the taken action's output toward the
// bootstrap target, and applies one RMSProp step scaled by 1/batch_size.
// Returns the pre-update mean squared error, or nothing if the replay holds
// fewer than `batch_size` entries (no RNG is consumed in that case).
std::optional<double> dqn_train_step(const ReplayMemory& replay, nn::NetworkParams& net,
                                     nn::OptimizerState& opt, double gamma, int batch_size,
                                     Rng& rng);

// alpha-parameterized utility: log(x) at alpha = 1, x^(1-alpha)/(1-alpha)
// otherwise. alpha = 0 is the identity and is applied to x untouched; for
// alpha > 0 the argument is clamped to at least floor_delta first, keeping the
// function defined for the nonpositive values an untrained network produces.
double alpha_utility(double x, double alpha, double floor_delta = 1e-6);

// Objective for the multi-dimensional learner: `legacy_nodes` (L) per-node
// value estimates plus one fused estimate covering `big_agent_nodes` (K)
// learner-driven transmitters.
struct FairnessObjective {
    double alpha = 0.0;
    int big_agent_nodes = 1;  // K
    int legacy_nodes = 0;     // L
    double value_floor = 1e-6;
};

// Vector-valued network outputs are laid out as L+1 contiguous groups of
// env::action_count entries; group i holds dimension i's values per action.
inline int vector_q_width(int legacy_nodes) {
    return (legacy_nodes + 1) * env::action_count;
}

// Per-action objective score: sum_i f_alpha(q_i(a)) + K * f_alpha(q_last(a) / K).
std::vector<double> fairness_scores(std::span<const double> q_vector,
                                    const FairnessObjective& obj);

// Deterministic argmax of fairness_scores (first maximizer on ties); the rule
// used for bootstrap-target action selection.
int fairness_select(std::span<const double> q_vector, const FairnessObjective& obj);

// Minibatch update of the vector-valued network: the next action is chosen by
// fairness_select on the target net, every dimension regresses toward its own
// r_i + gamma * q_i(s', a'), and the squared errors are averaged over
// batch_size * (L+1) terms. Returns the pre-update loss, or nothing while the
// replay is underfull.
std::optional<double> multiq_train_step(const ReplayMemory& replay, nn::NetworkParams& net,
                                        nn::OptimizerState& opt, double gamma, int batch_size,
                                        const FairnessObjective& obj, Rng& rng);

// Round-robin mapping from the fused learner's transmit decisions to the K
// physical transmitters it fronts.
class RoundRobinDispatcher {
public:
    explicit RoundRobinDispatcher(int k);

    // transmit -> index of the node that carries this transmission (cursor
    // advances); wait -> nothing, cursor untouched.
    std::optional<int> dispatch(env::AgentAction a);
    int cursor() const { return cursor_; }

private:
    int k_;
    int cursor_ = 0;
};

// Common driver interface the experiment loop talks to. Per slot the runner
// calls select_action on every learner, steps the channel, then hands each
// learner its action, the shared observation, and its reward view.
class Learner {
public:
    virtual ~Learner() = default;

    virtual env::AgentAction select_action(std::int64_t t, Rng& rng) = 0;
    virtual void observe(env::AgentAction a, env::Observation z, std::span<const double> rewards,
                         std::int64_t t, Rng& rng) = 0;

    // Key of the state the learner is currently in (before acting).
    virtual std::uint64_t state_key() const = 0;
};

struct TabularSettings {
    int history_len = 20;
    double beta = 0.5;
    double gamma = 0.9;
    EpsilonSchedule eps;
};

class TabularLearner final : public Learner {
public:
    explicit TabularLearner(const TabularSettings& st);

    env::AgentAction select_action(std::int64_t t, Rng& rng) override;
    void observe(env::AgentAction a, env::Observation z, std::span<const double> rewards,
                 std::int64_t t, Rng& rng) override;
    std::uint64_t state_key() const override { return state_.key(); }

    const TabularQ& table() const { return q_; }

private:
    TabularSettings st_;
    AgentState state_;
    TabularQ q_;
};

struct DqnSettings {
    int history_len = 20;       // M
    double gamma = 0.9;
    EpsilonSchedule eps;
    double learning_rate = 0.01;  // rho
    int target_sync = 200;        // F
    int batch_size = 32;          // N_E
    int replay_capacity = 500;
    nn::Arch arch = nn::Arch::resnet;
    int hidden_layers = 6;  // plain depth h, or resnet h = 2 + 2 * blocks
    int hidden_width = 64;
};

// Translate hidden-layer count into a NetworkSpec (resnet depth must be even
// and >= 2 so it splits into two leading layers plus whole blocks).
nn::NetworkSpec network_spec_for(const DqnSettings& st, int output_width);

// Scalar-objective deep Q learner: reward 1 when the slot carried a packet.
class DqnLearner final : public Learner {
public:
    DqnLearner(const DqnSettings& st, Rng& rng);

    env::AgentAction select_action(std::int64_t t, Rng& rng) override;
    void observe(env::AgentAction a, env::Observation z, std::span<const double> rewards,
                 std::int64_t t, Rng& rng) override;
    std::uint64_t state_key() const override { return state_.key(); }

    const nn::NetworkParams& network() const { return net_; }
    const ReplayMemory& replay() const { return replay_; }
    std::optional<double> last_loss() const { return last_loss_; }

private:
    DqnSettings st_;
    AgentState state_;
    nn::NetworkParams net_;
    nn::OptimizerState opt_;
    ReplayMemory replay_;
    std::optional<double> last_loss_;
};

// Multi-dimensional learner optimizing the alpha-fairness objective over the
// L legacy nodes plus the fused big agent.
class FairDqnLearner final : public Learner {
public:
    FairDqnLearner(const DqnSettings& st, const FairnessObjective& obj, Rng& rng);

    env::AgentAction select_action(std::int64_t t, Rng& rng) override;
    void observe(env::AgentAction a, env::Observation z, std::span<const double> rewards,
                 std::int64_t t, Rng& rng) override;
    std::uint64_t state_key() const override { return state_.key(); }

    const nn::NetworkParams& network() const { return net_; }
    const FairnessObjective& objective() const { return obj_; }
    std::optional<double> last_loss() const { return last_loss_; }

private:
    DqnSettings st_;
    FairnessObjective obj_;
    AgentState state_;
    nn::NetworkParams net_;
    nn::OptimizerState opt_;
    ReplayMemory replay_;
    std::optional<double> last_loss_;
};

}  // namespace dlma::agents
