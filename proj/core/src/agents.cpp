#include "dlma/agents.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace dlma::agents {

int pair_code(env::AgentAction a, env::Observation z) {
    if (a == env::AgentAction::transmit) {
        switch (z) {
            case env::Observation::success: return 0;
            case env::Observation::collision: return 1;
            case env::Observation::idleness:
                throw std::invalid_argument(
                    "pair_code: a transmitting agent cannot observe an idle channel");
        }
    } else {
        switch (z) {
            case env::Observation::success: return 2;
            case env::Observation::collision: return 3;
            case env::Observation::idleness: return 4;
        }
    }
    throw std::invalid_argument("pair_code: unknown action/observation");
}

AgentState::AgentState(int history_len) {
    if (history_len < 1 || history_len > max_keyed_history)
        throw std::invalid_argument("history_len must lie in [1, 24]");
    codes_.assign(static_cast<std::size_t>(history_len), uninit_pair);
}

void AgentState::update(env::AgentAction a, env::Observation z) {
    const int code = pair_code(a, z);
    codes_.erase(codes_.begin());
    codes_.push_back(static_cast<std::uint8_t>(code));
}

std::uint64_t AgentState::key() const {
    std::uint64_t k = 0;
    for (std::uint8_t c : codes_) k = k * pair_symbols + c;
    return k;
}

void encode_state(std::span<const std::uint8_t> codes, double* dst) {
    std::fill(dst, dst + codes.size() * pair_symbols, 0.0);
    for (std::size_t i = 0; i < codes.size(); ++i)
        dst[i * pair_symbols + codes[i]] = 1.0;
}

ReplayMemory::ReplayMemory(int capacity) : capacity_(capacity) {
    if (capacity < 1) throw std::invalid_argument("replay capacity must be >= 1");
}

void ReplayMemory::push(Experience e) {
    if (static_cast<int>(buf_.size()) == capacity_) buf_.pop_front();
    buf_.push_back(std::move(e));
}

std::vector<int> ReplayMemory::sample_indices(int n, Rng& rng) const {
    if (n < 1 || n > size())
        throw std::invalid_argument("sample_indices: n must lie in [1, size()]");
    std::vector<int> idx(static_cast<std::size_t>(size()));
    std::iota(idx.begin(), idx.end(), 0);
    // Partial Fisher-Yates: exactly n draws regardless of memory size.
    for (int i = 0; i < n; ++i) {
        const auto j =
            i + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(size() - i)));
        std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }
    idx.resize(static_cast<std::size_t>(n));
    return idx;
}

double EpsilonSchedule::at(std::int64_t t) const {
    return std::max(floor, initial * std::pow(decay, static_cast<double>(t)));
}

int epsilon_greedy(std::span<const double> scores, double eps, Rng& rng) {
    if (scores.empty()) throw std::invalid_argument("epsilon_greedy: empty action set");
    if (!(eps >= 0.0 && eps <= 1.0)) throw std::invalid_argument("epsilon_greedy: eps not in [0, 1]");
    if (uniform01(rng) < eps)
        return static_cast<int>(uniform_index(rng, scores.size()));
    const double best = *std::max_element(scores.begin(), scores.end());
    int ties = 0;
    for (double v : scores) ties += v == best ? 1 : 0;
    if (ties == 1)
        return static_cast<int>(std::max_element(scores.begin(), scores.end()) - scores.begin());
    int pick = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(ties)));
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (scores[i] == best && pick-- == 0) return static_cast<int>(i);
    }
    return 0;  // unreachable
}

double TabularQ::get(std::uint64_t state, int action) const {
    const auto it = table_.find(state);
    return it == table_.end() ? 0.0 : it->second[static_cast<std::size_t>(action)];
}

void TabularQ::set(std::uint64_t state, int action, double value) {
    auto [it, inserted] = table_.try_emplace(state, std::array<double, env::action_count>{});
    it->second[static_cast<std::size_t>(action)] = value;
}

double TabularQ::max_over_actions(std::uint64_t state) const {
    const auto it = table_.find(state);
    if (it == table_.end()) return 0.0;
    return *std::max_element(it->second.begin(), it->second.end());
}

void tabular_update(TabularQ& q, std::uint64_t s, int a, double r, std::uint64_t s2, double beta,
                    double gamma) {
    const double cur = q.get(s, a);
    q.set(s, a, cur + beta * (r + gamma * q.max_over_actions(s2) - cur));
}

double dqn_target(const nn::Params& target_net, const Eigen::VectorXd& s2_encoded, double r,
                  double gamma) {
    const Eigen::MatrixXd q2 = nn::forward(target_net, s2_encoded);
    return r + gamma * q2.col(0).maxCoeff();
}

namespace {

void encode_batch(const ReplayMemory& replay, const std::vector<int>& idx, int input_width,
                  Eigen::MatrixXd& s, Eigen::MatrixXd& s2) {
    const int n = static_cast<int>(idx.size());
    s.resize(input_width, n);
    s2.resize(input_width, n);
    for (int j = 0; j < n; ++j) {
        const Experience& e = replay[idx[static_cast<std::size_t>(j)]];
        if (static_cast<int>(e.s.size()) * pair_symbols != input_width)
            throw std::invalid_argument("train step: experience history does not match network");
        encode_state(e.s, s.col(j).data());
        encode_state(e.s2, s2.col(j).data());
    }
}

}  // namespace

std::optional<double> dqn_train_step(const ReplayMemory& replay, nn::NetworkParams& net,
                                     nn::OptimizerState& opt, double gamma, int batch_size,
                                     Rng& rng) {
    if (replay.size() < batch_size) return std::nullopt;
    const std::vector<int> idx = replay.sample_indices(batch_size, rng);
    const int n = batch_size;

    Eigen::MatrixXd s, s2;
    encode_batch(replay, idx, net.live.spec.input, s, s2);

    const Eigen::MatrixXd q2 = nn::forward(net.target, s2);
    Eigen::VectorXd y(n);
    std::vector<int> acts(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        const Experience& e = replay[idx[static_cast<std::size_t>(j)]];
        if (e.r.empty()) throw std::invalid_argument("train step: experience has no reward");
        acts[static_cast<std::size_t>(j)] = e.a;
        y(j) = e.r[0] + gamma * q2.col(j).maxCoeff();
    }

    nn::ForwardCache cache;
    const Eigen::MatrixXd q = nn::forward(net.live, s, cache);
    Eigen::MatrixXd d_out = Eigen::MatrixXd::Zero(q.rows(), n);
    double loss = 0.0;
    for (int j = 0; j < n; ++j) {
        const int a = acts[static_cast<std::size_t>(j)];
        const double diff = q(a, j) - y(j);
        loss += diff * diff;
        // Semi-gradient of the taken action's error, averaged over the batch.
        d_out(a, j) = diff / n;
    }
    loss /= n;

    nn::Params grads = nn::make_zero_params(net.live.spec);
    nn::gradient(net.live, cache, d_out, grads);
    nn::rmsprop_step(net.live, grads, opt);
    return loss;
}

double alpha_utility(double x, double alpha, double floor_delta) {
    if (alpha < 0.0) throw std::invalid_argument("alpha must be >= 0");
    if (alpha == 0.0) return x;  // identity; applied to the raw value
    const double v = std::max(x, floor_delta);
    if (alpha == 1.0) return std::log(v);
    return std::pow(v, 1.0 - alpha) / (1.0 - alpha);
}

namespace {

void check_objective(const FairnessObjective& obj) {
    if (obj.big_agent_nodes < 1) throw std::invalid_argument("big_agent_nodes must be >= 1");
    if (obj.legacy_nodes < 0) throw std::invalid_argument("legacy_nodes must be >= 0");
    if (obj.alpha < 0.0) throw std::invalid_argument("alpha must be >= 0");
    if (!(obj.value_floor > 0.0)) throw std::invalid_argument("value_floor must be > 0");
}

}  // namespace

std::vector<double> fairness_scores(std::span<const double> q_vector,
                                    const FairnessObjective& obj) {
    check_objective(obj);
    const int dims = obj.legacy_nodes + 1;
    if (static_cast<int>(q_vector.size()) != dims * env::action_count)
        throw std::invalid_argument("fairness_scores: q_vector size does not match L+1 groups");
    const double k = static_cast<double>(obj.big_agent_nodes);
    std::vector<double> scores(env::action_count);
    for (int a = 0; a < env::action_count; ++a) {
        double v = 0.0;
        for (int i = 0; i < obj.legacy_nodes; ++i)
            v += alpha_utility(q_vector[static_cast<std::size_t>(i * env::action_count + a)],
                               obj.alpha, obj.value_floor);
        const double fused =
            q_vector[static_cast<std::size_t>((dims - 1) * env::action_count + a)];
        v += k * alpha_utility(fused / k, obj.alpha, obj.value_floor);
        scores[static_cast<std::size_t>(a)] = v;
    }
    return scores;
}

int fairness_select(std::span<const double> q_vector, const FairnessObjective& obj) {
    const std::vector<double> scores = fairness_scores(q_vector, obj);
    return static_cast<int>(std::max_element(scores.begin(), scores.end()) - scores.begin());
}

std::optional<double> multiq_train_step(const ReplayMemory& replay, nn::NetworkParams& net,
                                        nn::OptimizerState& opt, double gamma, int batch_size,
                                        const FairnessObjective& obj, Rng& rng) {
    check_objective(obj);
    if (replay.size() < batch_size) return std::nullopt;
    const std::vector<int> idx = replay.sample_indices(batch_size, rng);
    const int n = batch_size;
    const int dims = obj.legacy_nodes + 1;
    if (net.live.spec.output != dims * env::action_count)
        throw std::invalid_argument("multiq_train_step: network output does not match objective");

    Eigen::MatrixXd s, s2;
    encode_batch(replay, idx, net.live.spec.input, s, s2);

    const Eigen::MatrixXd q2 = nn::forward(net.target, s2);
    Eigen::MatrixXd y(dims, n);
    std::vector<int> acts(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        const Experience& e = replay[idx[static_cast<std::size_t>(j)]];
        if (static_cast<int>(e.r.size()) != dims)
            throw std::invalid_argument("multiq_train_step: reward vector length must be L+1");
        acts[static_cast<std::size_t>(j)] = e.a;
        const std::span<const double> col(q2.col(j).data(), static_cast<std::size_t>(q2.rows()));
        const int a2 = fairness_select(col, obj);
        for (int i = 0; i < dims; ++i)
            y(i, j) = e.r[static_cast<std::size_t>(i)] + gamma * q2(i * env::action_count + a2, j);
    }

    nn::ForwardCache cache;
    const Eigen::MatrixXd q = nn::forward(net.live, s, cache);
    Eigen::MatrixXd d_out = Eigen::MatrixXd::Zero(q.rows(), n);
    const double denom = static_cast<double>(n) * dims;
    double loss = 0.0;
    for (int j = 0; j < n; ++j) {
        const int a = acts[static_cast<std::size_t>(j)];
        for (int i = 0; i < dims; ++i) {
            const double diff = q(i * env::action_count + a, j) - y(i, j);
            loss += diff * diff;
            d_out(i * env::action_count + a, j) = diff / denom;
        }
    }
    loss /= denom;

    nn::Params grads = nn::make_zero_params(net.live.spec);
    nn::gradient(net.live, cache, d_out, grads);
    nn::rmsprop_step(net.live, grads, opt);
    return loss;
}

RoundRobinDispatcher::RoundRobinDispatcher(int k) : k_(k) {
    if (k < 1) throw std::invalid_argument("dispatcher k must be >= 1");
}

std::optional<int> RoundRobinDispatcher::dispatch(env::AgentAction a) {
    if (a != env::AgentAction::transmit) return std::nullopt;
    const int node = cursor_;
    cursor_ = (cursor_ + 1) % k_;
    return node;
}

TabularLearner::TabularLearner(const TabularSettings& st) : st_(st), state_(st.history_len) {
    if (!(st.beta > 0.0 && st.beta <= 1.0))
        throw std::invalid_argument("beta must lie in (0, 1]");
    if (!(st.gamma >= 0.0 && st.gamma < 1.0))
        throw std::invalid_argument("gamma must lie in [0, 1)");
}

env::AgentAction TabularLearner::select_action(std::int64_t t, Rng& rng) {
    const std::uint64_t s = state_.key();
    const std::array<double, env::action_count> q{q_.get(s, 0), q_.get(s, 1)};
    return static_cast<env::AgentAction>(epsilon_greedy(q, st_.eps.at(t), rng));
}

void TabularLearner::observe(env::AgentAction a, env::Observation z,
                             std::span<const double> rewards, std::int64_t, Rng&) {
    if (rewards.empty()) throw std::invalid_argument("observe: missing reward");
    const std::uint64_t s = state_.key();
    state_.update(a, z);
    tabular_update(q_, s, static_cast<int>(a), rewards[0], state_.key(), st_.beta, st_.gamma);
}

nn::NetworkSpec network_spec_for(const DqnSettings& st, int output_width) {
    nn::NetworkSpec spec;
    spec.arch = st.arch;
    spec.input = encoded_width(st.history_len);
    spec.hidden_width = st.hidden_width;
    spec.output = output_width;
    if (st.arch == nn::Arch::plain) {
        if (st.hidden_layers < 1)
            throw std::invalid_argument("hidden_layers must be >= 1 for the plain architecture");
        spec.hidden_layers = st.hidden_layers;
    } else {
        if (st.hidden_layers < 2 || st.hidden_layers % 2 != 0)
            throw std::invalid_argument(
                "hidden_layers must be even and >= 2 for the residual architecture");
        spec.blocks = (st.hidden_layers - 2) / 2;
        spec.hidden_layers = 0;
    }
    spec.validate();
    return spec;
}

namespace {

void check_dqn_settings(const DqnSettings& st) {
    if (!(st.gamma >= 0.0 && st.gamma < 1.0))
        throw std::invalid_argument("gamma must lie in [0, 1)");
    if (st.target_sync < 1) throw std::invalid_argument("target_sync must be >= 1");
    if (st.batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
    if (st.batch_size > st.replay_capacity)
        throw std::invalid_argument("batch_size must not exceed replay_capacity");
}

}  // namespace

DqnLearner::DqnLearner(const DqnSettings& st, Rng& rng)
    : st_(st),
      state_(st.history_len),
      net_(nn::make_network(network_spec_for(st, env::action_count), rng)),
      opt_(nn::make_optimizer(net_.live.spec, st.learning_rate)),
      replay_(st.replay_capacity) {
    check_dqn_settings(st);
}

env::AgentAction DqnLearner::select_action(std::int64_t t, Rng& rng) {
    Eigen::VectorXd x(net_.live.spec.input);
    encode_state(state_.codes(), x.data());
    const Eigen::MatrixXd q = nn::forward(net_.live, x);
    const std::span<const double> scores(q.col(0).data(), static_cast<std::size_t>(q.rows()));
    return static_cast<env::AgentAction>(epsilon_greedy(scores, st_.eps.at(t), rng));
}

void DqnLearner::observe(env::AgentAction a, env::Observation z, std::span<const double> rewards,
                         std::int64_t t, Rng& rng) {
    if (rewards.empty()) throw std::invalid_argument("observe: missing reward");
    Experience e;
    e.s = state_.codes();
    e.a = static_cast<int>(a);
    e.r = {rewards[0]};
    state_.update(a, z);
    e.s2 = state_.codes();
    replay_.push(std::move(e));
    last_loss_ = dqn_train_step(replay_, net_, opt_, st_.gamma, st_.batch_size, rng);
    if (t % st_.target_sync == 0) nn::sync_target(net_);
}

FairDqnLearner::FairDqnLearner(const DqnSettings& st, const FairnessObjective& obj, Rng& rng)
    : st_(st),
      obj_(obj),
      state_(st.history_len),
      net_(nn::make_network(network_spec_for(st, vector_q_width(obj.legacy_nodes)), rng)),
      opt_(nn::make_optimizer(net_.live.spec, st.learning_rate)),
      replay_(st.replay_capacity) {
    check_dqn_settings(st);
    check_objective(obj);
}

env::AgentAction FairDqnLearner::select_action(std::int64_t t, Rng& rng) {
    Eigen::VectorXd x(net_.live.spec.input);
    encode_state(state_.codes(), x.data());
    const Eigen::MatrixXd q = nn::forward(net_.live, x);
    const std::span<const double> qs(q.col(0).data(), static_cast<std::size_t>(q.rows()));
    const std::vector<double> scores = fairness_scores(qs, obj_);
    return static_cast<env::AgentAction>(epsilon_greedy(scores, st_.eps.at(t), rng));
}

void FairDqnLearner::observe(env::AgentAction a, env::Observation z,
                             std::span<const double> rewards, std::int64_t t, Rng& rng) {
    if (static_cast<int>(rewards.size()) != obj_.legacy_nodes + 1)
        throw std::invalid_argument("observe: reward vector length must be L+1");
    Experience e;
    e.s = state_.codes();
    e.a = static_cast<int>(a);
    e.r.assign(rewards.begin(), rewards.end());
    state_.update(a, z);
    e.s2 = state_.codes();
    replay_.push(std::move(e));
    last_loss_ = multiq_train_step(replay_, net_, opt_, st_.gamma, st_.batch_size, obj_, rng);
    if (t % st_.target_sync == 0) nn::sync_target(net_);
}

}  // namespace dlma::agents
