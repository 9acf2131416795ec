#include "dlma/runner.hpp"

#include <memory>
#include <unordered_map>

#include "dlma/agents.hpp"

namespace dlma::harness {

namespace {

agents::DqnSettings dqn_settings_from(const ScenarioConfig& cfg) {
    agents::DqnSettings st;
    st.history_len = cfg.m;
    st.gamma = cfg.gamma;
    st.eps = {cfg.eps_initial, cfg.eps_decay, cfg.eps_floor};
    st.learning_rate = cfg.rho;
    st.target_sync = cfg.f;
    st.batch_size = cfg.batch;
    st.replay_capacity = cfg.capacity;
    st.arch = cfg.arch;
    st.hidden_layers = cfg.hidden_layers;
    st.hidden_width = cfg.hidden_width;
    return st;
}

}  // namespace

MetricsRecord run(const ScenarioConfig& cfg) {
    cfg.validate();
    Rng rng(cfg.seed);

    env::Channel channel(cfg.nodes, cfg.transmitter_count(), rng);
    const int legacy = channel.legacy_count();
    const int transmitters = cfg.transmitter_count();
    const int physical = cfg.physical_agents();

    std::vector<std::unique_ptr<agents::Learner>> learners;
    switch (cfg.mode) {
        case AgentMode::tabular_rl: {
            agents::TabularSettings st;
            st.history_len = cfg.m;
            st.beta = cfg.beta;
            st.gamma = cfg.gamma;
            st.eps = {cfg.eps_initial, cfg.eps_decay, cfg.eps_floor};
            learners.push_back(std::make_unique<agents::TabularLearner>(st));
            break;
        }
        case AgentMode::dqn_sum:
            learners.push_back(std::make_unique<agents::DqnLearner>(dqn_settings_from(cfg), rng));
            break;
        case AgentMode::dqn_fair: {
            agents::FairnessObjective obj;
            obj.alpha = cfg.alpha;
            obj.big_agent_nodes = cfg.k;
            obj.legacy_nodes = legacy;
            learners.push_back(
                std::make_unique<agents::FairDqnLearner>(dqn_settings_from(cfg), obj, rng));
            break;
        }
        case AgentMode::multi_independent:
            for (int i = 0; i < cfg.k; ++i)
                learners.push_back(
                    std::make_unique<agents::DqnLearner>(dqn_settings_from(cfg), rng));
            break;
    }
    const int learner_count = static_cast<int>(learners.size());

    MetricsRecord rec;
    rec.slots = cfg.t;
    rec.legacy_count = legacy;
    rec.agent_count = physical;
    rec.success.assign(static_cast<std::size_t>(rec.node_count()),
                       std::vector<std::uint8_t>(static_cast<std::size_t>(cfg.t), 0));
    rec.node_learner.assign(static_cast<std::size_t>(rec.node_count()), -1);
    for (int j = 0; j < physical; ++j)
        rec.node_learner[static_cast<std::size_t>(legacy + j)] =
            cfg.mode == AgentMode::multi_independent ? j : 0;
    rec.distinct.assign(static_cast<std::size_t>(learner_count),
                        std::vector<std::uint32_t>(static_cast<std::size_t>(cfg.t), 0));
    rec.prior.assign(static_cast<std::size_t>(learner_count),
                     std::vector<std::uint32_t>(static_cast<std::size_t>(cfg.t), 0));

    std::vector<std::unordered_map<std::uint64_t, std::uint32_t>> visits(
        static_cast<std::size_t>(learner_count));
    agents::RoundRobinDispatcher dispatcher(cfg.k);
    std::vector<env::AgentAction> actions(static_cast<std::size_t>(transmitters),
                                          env::AgentAction::wait);
    std::vector<double> reward_view;

    for (std::int64_t t = 0; t < cfg.t; ++t) {
        for (int li = 0; li < learner_count; ++li) {
            auto& vm = visits[static_cast<std::size_t>(li)];
            const std::uint64_t key = learners[static_cast<std::size_t>(li)]->state_key();
            auto [it, fresh] = vm.try_emplace(key, 0u);
            rec.prior[static_cast<std::size_t>(li)][static_cast<std::size_t>(t)] = it->second;
            ++it->second;
            rec.distinct[static_cast<std::size_t>(li)][static_cast<std::size_t>(t)] =
                static_cast<std::uint32_t>(vm.size());
        }

        for (int li = 0; li < learner_count; ++li)
            actions[static_cast<std::size_t>(li)] =
                learners[static_cast<std::size_t>(li)]->select_action(t, rng);

        const env::SlotOutcome outcome = channel.step(actions, rng);

        for (int i = 0; i < legacy; ++i)
            rec.success[static_cast<std::size_t>(i)][static_cast<std::size_t>(t)] =
                outcome.success[static_cast<std::size_t>(i)];
        if (cfg.mode == AgentMode::dqn_fair) {
            // The fused learner is one transmitter; round-robin decides which
            // physical node carried the slot (the cursor advances on every
            // transmission, successful or not).
            const auto carrier = dispatcher.dispatch(actions[0]);
            if (carrier && outcome.success[static_cast<std::size_t>(legacy)])
                rec.success[static_cast<std::size_t>(legacy + *carrier)]
                           [static_cast<std::size_t>(t)] = 1;
        } else {
            for (int j = 0; j < transmitters; ++j)
                rec.success[static_cast<std::size_t>(legacy + j)][static_cast<std::size_t>(t)] =
                    outcome.success[static_cast<std::size_t>(legacy + j)];
        }

        const double channel_reward = outcome.z == env::Observation::success ? 1.0 : 0.0;
        for (int li = 0; li < learner_count; ++li) {
            if (cfg.mode == AgentMode::dqn_fair) {
                reward_view.resize(static_cast<std::size_t>(legacy) + 1);
                for (int i = 0; i <= legacy; ++i)
                    reward_view[static_cast<std::size_t>(i)] =
                        outcome.success[static_cast<std::size_t>(i)];
            } else {
                reward_view.assign(1, channel_reward);
            }
            learners[static_cast<std::size_t>(li)]->observe(
                actions[static_cast<std::size_t>(li)], outcome.z, reward_view, t, rng);
        }
    }
    return rec;
}

}  // namespace dlma::harness
