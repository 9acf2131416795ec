#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "dlma/agents.hpp"

using namespace dlma;
using env::AgentAction;
using env::Observation;

namespace {

bool nets_equal(const nn::Params& a, const nn::Params& b) {
    if (a.layers.size() != b.layers.size()) return false;
    for (std::size_t l = 0; l < a.layers.size(); ++l)
        if (a.layers[l].W != b.layers[l].W || a.layers[l].b != b.layers[l].b) return false;
    return true;
}

Eigen::VectorXd encoded(const agents::AgentState& state) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(agents::encoded_width(state.history_len()));
    agents::encode_state(state.codes(), v.data());
    return v;
}

}  // namespace

TEST_CASE("channel-state pairs enumerate the five valid combinations") {
    CHECK(agents::pair_code(AgentAction::transmit, Observation::success) == 0);
    CHECK(agents::pair_code(AgentAction::transmit, Observation::collision) == 1);
    CHECK(agents::pair_code(AgentAction::wait, Observation::success) == 2);
    CHECK(agents::pair_code(AgentAction::wait, Observation::collision) == 3);
    CHECK(agents::pair_code(AgentAction::wait, Observation::idleness) == 4);
    // a transmitting node can never observe an idle channel
    CHECK_THROWS_AS(agents::pair_code(AgentAction::transmit, Observation::idleness),
                    std::invalid_argument);
}

TEST_CASE("agent state slides a fixed-length history") {
    agents::AgentState s(2);
    CHECK(s.codes() == std::vector<std::uint8_t>{5, 5});  // padding before any slot

    s.update(AgentAction::wait, Observation::idleness);
    CHECK(s.codes() == std::vector<std::uint8_t>{5, 4});
    CHECK(s.key() == 5 * 6 + 4);

    s.update(AgentAction::transmit, Observation::success);
    CHECK(s.codes() == std::vector<std::uint8_t>{4, 0});  // padding fully flushed

    s.update(AgentAction::wait, Observation::collision);
    s.update(AgentAction::transmit, Observation::collision);
    CHECK(s.codes() == std::vector<std::uint8_t>{3, 1});  // only the two newest remain

    CHECK_THROWS_AS(agents::AgentState(0), std::invalid_argument);
    CHECK_THROWS_AS(agents::AgentState(25), std::invalid_argument);
}

TEST_CASE("state keys distinguish every short history") {
    std::vector<std::uint64_t> keys;
    agents::AgentState s(3);
    for (int c0 = 0; c0 < 5; ++c0)
        for (int c1 = 0; c1 < 5; ++c1)
            for (int c2 = 0; c2 < 5; ++c2) {
                // reconstruct the history by feeding three pairs
                agents::AgentState t(3);
                for (int c : {c0, c1, c2}) {
                    const auto a = c < 2 ? AgentAction::transmit : AgentAction::wait;
                    const auto z = c == 0 || c == 2
                                       ? Observation::success
                                       : (c == 4 ? Observation::idleness : Observation::collision);
                    t.update(a, z);
                }
                keys.push_back(t.key());
            }
    std::sort(keys.begin(), keys.end());
    CHECK(std::adjacent_find(keys.begin(), keys.end()) == keys.end());  // all distinct
}

TEST_CASE("one-hot encoding puts a single 1 per history element") {
    agents::AgentState s(2);
    s.update(AgentAction::wait, Observation::idleness);  // codes {5, 4}
    const Eigen::VectorXd v = encoded(s);
    REQUIRE(v.size() == 12);
    CHECK(v.sum() == 2.0);
    CHECK(v(5) == 1.0);       // oldest element, padding symbol
    CHECK(v(6 + 4) == 1.0);   // newest element, (wait, idleness)
}

TEST_CASE("replay memory evicts strictly oldest-first") {
    agents::ReplayMemory replay(5);
    CHECK_THROWS_AS(agents::ReplayMemory(0), std::invalid_argument);

    for (int i = 0; i < 8; ++i) {
        agents::Experience e;
        e.s = {0};
        e.a = 0;
        e.r = {static_cast<double>(i)};
        e.s2 = {0};
        replay.push(std::move(e));
        CHECK(replay.size() == std::min(i + 1, 5));
    }
    // pushes 3..7 survive, in order
    for (int i = 0; i < 5; ++i) CHECK(replay[i].r[0] == doctest::Approx(3.0 + i));
}

TEST_CASE("minibatch sampling is without replacement") {
    Rng rng(21);
    agents::ReplayMemory replay(16);
    for (int i = 0; i < 10; ++i) {
        agents::Experience e;
        e.s = {0};
        e.r = {0.0};
        e.s2 = {0};
        replay.push(std::move(e));
    }
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<int> idx = replay.sample_indices(7, rng);
        REQUIRE(idx.size() == 7);
        std::sort(idx.begin(), idx.end());
        CHECK(std::adjacent_find(idx.begin(), idx.end()) == idx.end());
        CHECK(idx.front() >= 0);
        CHECK(idx.back() < 10);
    }
    // drawing everything returns a permutation
    std::vector<int> all = replay.sample_indices(10, rng);
    std::sort(all.begin(), all.end());
    std::vector<int> expect(10);
    std::iota(expect.begin(), expect.end(), 0);
    CHECK(all == expect);
    CHECK_THROWS_AS(replay.sample_indices(11, rng), std::invalid_argument);
    CHECK_THROWS_AS(replay.sample_indices(0, rng), std::invalid_argument);
}

TEST_CASE("exploration rate decays multiplicatively to its floor") {
    const agents::EpsilonSchedule eps{0.1, 0.995, 0.005};
    CHECK(eps.at(0) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(eps.at(1) == doctest::Approx(0.0995).epsilon(1e-12));
    CHECK(eps.at(100) == doctest::Approx(0.1 * std::pow(0.995, 100)).epsilon(1e-12));
    // 0.1 * 0.995^t crosses 0.005 just before t = 598
    CHECK(eps.at(597) > 0.005);
    CHECK(eps.at(598) == 0.005);
    CHECK(eps.at(100000) == 0.005);
}

TEST_CASE("greedy selection takes the best score") {
    Rng rng(22);
    const double scores[] = {0.2, 0.7};
    CHECK(agents::epsilon_greedy(scores, 0.0, rng) == 1);
    CHECK_THROWS_AS(agents::epsilon_greedy(std::span<const double>{}, 0.0, rng),
                    std::invalid_argument);
}

TEST_CASE("full exploration is uniform over actions") {
    Rng rng(23);
    const double scores[] = {0.0, 9.9};
    int picked0 = 0;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i)
        if (agents::epsilon_greedy(scores, 1.0, rng) == 0) ++picked0;
    const double sigma = std::sqrt(draws * 0.25);
    CHECK(std::abs(picked0 - draws / 2) < 3 * sigma);
}

TEST_CASE("exact ties are broken uniformly at random") {
    Rng rng(24);
    const double scores[] = {0.4, 0.4};
    int picked0 = 0;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i)
        if (agents::epsilon_greedy(scores, 0.0, rng) == 0) ++picked0;
    const double sigma = std::sqrt(draws * 0.25);
    CHECK(std::abs(picked0 - draws / 2) < 3 * sigma);
}

TEST_CASE("tabular updates follow the one-step bootstrap rule") {
    agents::TabularQ q;

    agents::tabular_update(q, 1, 0, 1.0, 2, 1.0, 0.0);  // beta=1, gamma=0, r=1
    CHECK(q.get(1, 0) == doctest::Approx(1.0));

    q.set(3, 1, 1.0);
    agents::tabular_update(q, 3, 1, 0.0, 4, 0.5, 0.9);  // next state unseen, max q = 0
    CHECK(q.get(3, 1) == doctest::Approx(0.5));

    // a value already equal to its target is a fixed point
    q.set(5, 0, 2.0);
    q.set(6, 0, 1.5);
    q.set(6, 1, 0.5);
    agents::tabular_update(q, 5, 0, 2.0 - 0.9 * 1.5, 6, 0.7, 0.9);
    CHECK(q.get(5, 0) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("tabular learning solves a two-state toy problem exactly") {
    // deterministic MDP: state A (key 0), state B (key 1)
    //   A: action 0 -> r=0,   goto B;  action 1 -> r=0.2, stay A
    //   B: action 0 -> r=1.0, goto A;  action 1 -> r=0,   stay B
    const double gamma = 0.9;
    auto step = [](std::uint64_t s, int a) -> std::pair<double, std::uint64_t> {
        if (s == 0) return a == 0 ? std::pair{0.0, std::uint64_t{1}} : std::pair{0.2, std::uint64_t{0}};
        return a == 0 ? std::pair{1.0, std::uint64_t{0}} : std::pair{0.0, std::uint64_t{1}};
    };

    // value-iteration reference on the same table
    std::array<std::array<double, 2>, 2> ref{};
    for (int it = 0; it < 3000; ++it) {
        std::array<std::array<double, 2>, 2> next{};
        for (std::uint64_t s = 0; s < 2; ++s)
            for (int a = 0; a < 2; ++a) {
                const auto [r, s2] = step(s, a);
                next[s][a] = r + gamma * std::max(ref[s2][0], ref[s2][1]);
            }
        ref = next;
    }

    agents::TabularQ q;
    Rng rng(25);
    std::uint64_t s = 0;
    for (int t = 0; t < 60000; ++t) {
        const int a = static_cast<int>(uniform_index(rng, 2));  // pure exploration
        const auto [r, s2] = step(s, a);
        agents::tabular_update(q, s, a, r, s2, 0.5, gamma);
        s = s2;
    }
    for (std::uint64_t state = 0; state < 2; ++state)
        for (int a = 0; a < 2; ++a)
            CHECK(q.get(state, a) == doctest::Approx(ref[state][a]).epsilon(1e-6));
}

TEST_CASE("bootstrap targets blend reward and discounted target-net value") {
    const int m = 1;
    agents::AgentState s2(m);
    s2.update(AgentAction::wait, Observation::idleness);
    const Eigen::VectorXd x = encoded(s2);

    nn::NetworkSpec spec;
    spec.arch = nn::Arch::plain;
    spec.input = agents::encoded_width(m);
    spec.hidden_width = 1;
    spec.hidden_layers = 0;
    spec.output = 2;
    nn::Params target = nn::make_zero_params(spec);

    CHECK(agents::dqn_target(target, x, 0.3, 0.9) == doctest::Approx(0.3));  // zero net
    target.layers[0].b(0) = 2.0;
    target.layers[0].b(1) = -1.0;
    CHECK(agents::dqn_target(target, x, 1.0, 0.0) == doctest::Approx(1.0));  // gamma 0
    CHECK(agents::dqn_target(target, x, 1.0, 0.9) == doctest::Approx(2.8));  // 1 + 0.9 * 2
}

namespace {

agents::Experience make_exp(const agents::AgentState& s, int a, std::vector<double> r,
                            const agents::AgentState& s2) {
    agents::Experience e;
    e.s = s.codes();
    e.a = a;
    e.r = std::move(r);
    e.s2 = s2.codes();
    return e;
}

nn::NetworkSpec tiny_spec(int m, int hidden_layers, int output) {
    nn::NetworkSpec spec;
    spec.arch = nn::Arch::plain;
    spec.input = agents::encoded_width(m);
    spec.hidden_width = 8;
    spec.hidden_layers = hidden_layers;
    spec.output = output;
    return spec;
}

}  // namespace

TEST_CASE("a network already satisfying its targets sees zero loss and no update") {
    Rng rng(26);
    agents::AgentState s(1);
    s.update(AgentAction::transmit, Observation::success);

    const nn::NetworkSpec spec = tiny_spec(1, 0, 2);
    nn::NetworkParams net = nn::make_network(spec, rng);
    for (auto& layer : net.live.layers) {
        layer.W.setZero();
        layer.b.setZero();
    }
    net.live.layers[0].b(0) = 1.0;  // q(s, transmit) = 1 = reward with gamma = 0
    nn::sync_target(net);
    const nn::Params before = net.live;

    agents::ReplayMemory replay(4);
    replay.push(make_exp(s, 0, {1.0}, s));
    nn::OptimizerState opt = nn::make_optimizer(spec, 0.01);

    const auto loss = agents::dqn_train_step(replay, net, opt, 0.0, 1, rng);
    REQUIRE(loss.has_value());
    CHECK(*loss == doctest::Approx(0.0));
    CHECK(nets_equal(net.live, before));  // zero gradient, optimizer no-op
}

TEST_CASE("a single-experience batch reproduces the squared error") {
    Rng rng(27);
    agents::AgentState s(1);
    s.update(AgentAction::wait, Observation::idleness);

    const nn::NetworkSpec spec = tiny_spec(1, 0, 2);
    nn::NetworkParams net = nn::make_network(spec, rng);
    for (auto& layer : net.live.layers) {
        layer.W.setZero();
        layer.b.setZero();
    }
    nn::sync_target(net);

    agents::ReplayMemory replay(4);
    replay.push(make_exp(s, 0, {1.0}, s));
    nn::OptimizerState opt = nn::make_optimizer(spec, 0.01);

    const auto loss = agents::dqn_train_step(replay, net, opt, 0.0, 1, rng);
    REQUIRE(loss.has_value());
    CHECK(*loss == doctest::Approx(1.0));  // (y - q)^2 = (1 - 0)^2
}

TEST_CASE("an underfull replay skips training without consuming randomness") {
    Rng rng(28);
    const nn::NetworkSpec spec = tiny_spec(1, 1, 2);
    nn::NetworkParams net = nn::make_network(spec, rng);
    nn::OptimizerState opt = nn::make_optimizer(spec, 0.01);
    agents::AgentState s(1);
    s.update(AgentAction::wait, Observation::idleness);
    agents::ReplayMemory replay(64);
    for (int i = 0; i < 5; ++i) replay.push(make_exp(s, 0, {0.0}, s));

    Rng probe = rng;  // identical state
    const auto loss = agents::dqn_train_step(replay, net, opt, 0.9, 32, rng);
    CHECK_FALSE(loss.has_value());
    CHECK(rng() == probe());  // the generator was not touched
}

TEST_CASE("training on a fixed batch drives the loss down") {
    Rng rng(29);
    const nn::NetworkSpec spec = tiny_spec(2, 1, 2);
    nn::NetworkParams net = nn::make_network(spec, rng);
    nn::OptimizerState opt = nn::make_optimizer(spec, 0.01);

    agents::ReplayMemory replay(16);
    agents::AgentState s(2);
    for (int i = 0; i < 16; ++i) {
        agents::AgentState s2 = s;
        const int a = i % 2;
        const auto z = a == 0 ? Observation::collision : Observation::idleness;
        s2.update(a == 0 ? AgentAction::transmit : AgentAction::wait, z);
        replay.push(make_exp(s, a, {i % 3 == 0 ? 1.0 : 0.0}, s2));
        s = s2;
    }

    // batch == replay size, so every step regresses the same 16 experiences
    // against the frozen target copy
    std::vector<double> losses;
    for (int step = 0; step < 100; ++step)
        losses.push_back(*agents::dqn_train_step(replay, net, opt, 0.9, 16, rng));
    CHECK(losses.back() < losses.front());
    CHECK(losses.back() < 0.9 * losses.front());
}

TEST_CASE("utility functions cover the alpha family") {
    CHECK(agents::alpha_utility(1.0, 1.0) == doctest::Approx(0.0));
    CHECK(agents::alpha_utility(0.37, 0.0) == doctest::Approx(0.37));
    CHECK(agents::alpha_utility(0.5, 2.0) == doctest::Approx(-2.0));
    // alpha = 0 passes even nonpositive values through untouched
    CHECK(agents::alpha_utility(-0.25, 0.0) == doctest::Approx(-0.25));
    // alpha >= 1 diverges at 0, so arguments are floored first
    CHECK(agents::alpha_utility(0.0, 1.0) == doctest::Approx(std::log(1e-6)));
    CHECK(agents::alpha_utility(-5.0, 1.0) == doctest::Approx(std::log(1e-6)));
    CHECK_THROWS_AS(agents::alpha_utility(0.5, -1.0), std::invalid_argument);
}

TEST_CASE("fairness selection generalizes the plain argmax") {
    // layout: group i holds dimension i's values per action
    SUBCASE("alpha 0 sums the dimensions") {
        agents::FairnessObjective obj{0.0, 1, 1, 1e-6};
        const double q[] = {0.5, 0.9, 0.3, 0.1};  // sums: action 0 -> 0.8, action 1 -> 1.0
        CHECK(agents::fairness_select(q, obj) == 1);
    }
    SUBCASE("alpha 1 prefers the balanced allocation") {
        agents::FairnessObjective obj{1.0, 1, 1, 1e-6};
        const double q[] = {0.5, 0.9, 0.5, 0.1};
        CHECK(agents::fairness_select(q, obj) == 0);  // log 0.5+log 0.5 > log 0.9+log 0.1
    }
    SUBCASE("no legacy dimensions reduces to scalar argmax for any alpha") {
        for (double alpha : {0.0, 0.5, 1.0, 2.0, 7.0}) {
            agents::FairnessObjective obj{alpha, 1, 0, 1e-6};
            Rng rng(31);
            for (int trial = 0; trial < 200; ++trial) {
                const double q[] = {0.01 + uniform01(rng), 0.01 + uniform01(rng)};
                const int plain = q[0] >= q[1] ? 0 : 1;
                CHECK(agents::fairness_select(q, obj) == plain);
            }
        }
    }
}

TEST_CASE("fairness scores validate their input width") {
    agents::FairnessObjective obj{1.0, 1, 1, 1e-6};
    const double wrong[] = {0.1, 0.2};
    CHECK_THROWS_AS(agents::fairness_scores(wrong, obj), std::invalid_argument);
}

TEST_CASE("sum-dimension ties fall back to the first action") {
    agents::FairnessObjective obj{0.0, 1, 1, 1e-6};
    const double q[] = {0.5, 0.5, 0.3, 0.3};
    CHECK(agents::fairness_select(q, obj) == 0);
}

TEST_CASE("vector targets reduce to rewards at gamma zero") {
    Rng rng(32);
    agents::AgentState s(1);
    s.update(AgentAction::transmit, Observation::success);

    const nn::NetworkSpec spec = tiny_spec(1, 0, 4);  // one legacy dimension
    nn::NetworkParams net = nn::make_network(spec, rng);
    for (auto& layer : net.live.layers) {
        layer.W.setZero();
        layer.b.setZero();
    }
    nn::sync_target(net);

    agents::ReplayMemory replay(4);
    replay.push(make_exp(s, 0, {1.0, 0.0}, s));
    nn::OptimizerState opt = nn::make_optimizer(spec, 0.01);
    agents::FairnessObjective obj{0.0, 1, 1, 1e-6};

    const auto loss = agents::multiq_train_step(replay, net, opt, 0.0, 1, obj, rng);
    REQUIRE(loss.has_value());
    // squared errors (1-0)^2 and (0-0)^2 averaged over batch * dims = 2 terms
    CHECK(*loss == doctest::Approx(0.5));
}

TEST_CASE("vector experiences must carry one reward per dimension") {
    Rng rng(33);
    agents::AgentState s(1);
    s.update(AgentAction::wait, Observation::idleness);
    const nn::NetworkSpec spec = tiny_spec(1, 0, 4);
    nn::NetworkParams net = nn::make_network(spec, rng);
    nn::OptimizerState opt = nn::make_optimizer(spec, 0.01);
    agents::ReplayMemory replay(4);
    replay.push(make_exp(s, 0, {1.0}, s));  // only one reward, two dimensions
    agents::FairnessObjective obj{0.0, 1, 1, 1e-6};
    CHECK_THROWS_AS(agents::multiq_train_step(replay, net, opt, 0.0, 1, obj, rng),
                    std::invalid_argument);
}

TEST_CASE("vector learning converges to the one-state fixed point") {
    // one state S, rewards fixed at (1, 0) regardless of action; the stationary
    // solution of y_i = r_i + gamma * q_i(S, a') is q_1 = 10, q_2 = 0 at
    // gamma = 0.9 for both actions
    Rng rng(34);
    agents::AgentState s(1);
    s.update(AgentAction::wait, Observation::idleness);

    // tabular iteration of the same recursion as an independent reference
    const double gamma = 0.9;
    agents::FairnessObjective obj{0.0, 1, 1, 1e-6};
    std::array<double, 4> ref{};  // layout matches the network output
    for (int it = 0; it < 2000; ++it) {
        const int a2 = agents::fairness_select(std::span<const double>(ref.data(), 4), obj);
        std::array<double, 4> next{};
        for (int a = 0; a < 2; ++a) {
            next[a] = 1.0 + gamma * ref[a2];          // dimension 1
            next[2 + a] = 0.0 + gamma * ref[2 + a2];  // dimension 2
        }
        ref = next;
    }
    CHECK(ref[0] == doctest::Approx(10.0).epsilon(1e-9));
    CHECK(ref[2] == doctest::Approx(0.0));

    const nn::NetworkSpec spec = tiny_spec(1, 1, 4);
    nn::NetworkParams net = nn::make_network(spec, rng);
    nn::OptimizerState opt = nn::make_optimizer(spec, 3e-4);
    agents::ReplayMemory replay(4);
    replay.push(make_exp(s, 0, {1.0, 0.0}, s));
    replay.push(make_exp(s, 1, {1.0, 0.0}, s));

    for (int step = 0; step < 40000; ++step) {
        if (step == 30000) opt.learning_rate = 3e-5;  // anneal away the step wobble
        agents::multiq_train_step(replay, net, opt, gamma, 2, obj, rng);
        if (step % 200 == 199) nn::sync_target(net);
    }

    const Eigen::VectorXd x = encoded(s);
    const Eigen::MatrixXd q = nn::forward(net.live, x);
    for (int i = 0; i < 4; ++i)
        CHECK(q(i, 0) == doctest::Approx(ref[static_cast<std::size_t>(i)]).epsilon(1e-2));
}

TEST_CASE("the gateway hands transmissions to its nodes in rotation") {
    agents::RoundRobinDispatcher rr(3);
    CHECK(rr.dispatch(AgentAction::transmit) == 0);
    CHECK(rr.dispatch(AgentAction::transmit) == 1);
    CHECK_FALSE(rr.dispatch(AgentAction::wait).has_value());
    CHECK(rr.cursor() == 2);  // waiting leaves the rotation alone
    CHECK(rr.dispatch(AgentAction::transmit) == 2);
    CHECK(rr.dispatch(AgentAction::transmit) == 0);  // wrapped

    agents::RoundRobinDispatcher solo(1);
    for (int i = 0; i < 4; ++i) CHECK(solo.dispatch(AgentAction::transmit) == 0);
    CHECK_THROWS_AS(agents::RoundRobinDispatcher(0), std::invalid_argument);
}

namespace {

// Feed a learner synthetic slots: it waits on an idle channel, transmits into
// a success, per its own chosen action.
void drive_synthetic(agents::Learner& learner, std::int64_t slots, Rng& rng,
                     const std::function<void(std::int64_t)>& probe = {}) {
    for (std::int64_t t = 0; t < slots; ++t) {
        const AgentAction a = learner.select_action(t, rng);
        const Observation z =
            a == AgentAction::transmit ? Observation::success : Observation::idleness;
        const double reward = a == AgentAction::transmit ? 1.0 : 0.0;
        const double r[] = {reward};
        learner.observe(a, z, r, t, rng);
        if (probe) probe(t);
    }
}

}  // namespace

TEST_CASE("the target copy snaps to the live network exactly on schedule") {
    agents::DqnSettings st;
    st.history_len = 3;
    st.arch = nn::Arch::plain;
    st.hidden_layers = 1;
    st.hidden_width = 8;
    st.batch_size = 4;
    st.replay_capacity = 50;
    st.target_sync = 50;

    Rng rng(35);
    agents::DqnLearner learner(st, rng);
    std::vector<std::int64_t> equal_at, differ_at;
    drive_synthetic(learner, 121, rng, [&](std::int64_t t) {
        if (nets_equal(learner.network().live, learner.network().target))
            equal_at.push_back(t);
        else
            differ_at.push_back(t);
    });

    auto contains = [](const std::vector<std::int64_t>& v, std::int64_t x) {
        return std::find(v.begin(), v.end(), x) != v.end();
    };
    CHECK(contains(equal_at, 0));
    CHECK(contains(equal_at, 50));
    CHECK(contains(equal_at, 100));
    CHECK(contains(differ_at, 49));
    CHECK(contains(differ_at, 99));
    CHECK(contains(differ_at, 120));
}

TEST_CASE("the replay memory plateaus at its capacity") {
    agents::DqnSettings st;
    st.history_len = 2;
    st.arch = nn::Arch::plain;
    st.hidden_layers = 1;
    st.hidden_width = 8;

    Rng rng(36);
    agents::DqnLearner learner(st, rng);
    REQUIRE(st.replay_capacity == 500);
    drive_synthetic(learner, 600, rng, [&](std::int64_t t) {
        CHECK(learner.replay().size() == std::min<std::int64_t>(t + 1, 500));
    });
    CHECK(learner.replay().size() == 500);
}

TEST_CASE("resnet depth must split into two leading layers plus blocks") {
    agents::DqnSettings st;
    st.arch = nn::Arch::resnet;
    st.hidden_layers = 5;
    CHECK_THROWS_AS(agents::network_spec_for(st, 2), std::invalid_argument);
    st.hidden_layers = 0;
    CHECK_THROWS_AS(agents::network_spec_for(st, 2), std::invalid_argument);
    st.hidden_layers = 6;
    const nn::NetworkSpec spec = agents::network_spec_for(st, 2);
    CHECK(spec.blocks == 2);
    CHECK(spec.affine_layer_count() == 7);  // 2 leading + 2*2 block + output

    st.arch = nn::Arch::plain;
    st.hidden_layers = 0;
    CHECK_THROWS_AS(agents::network_spec_for(st, 2), std::invalid_argument);
}

TEST_CASE("the vector learner with trivial objective mirrors the scalar learner") {
    // No legacy dimensions, one physical node, alpha 0: the two learners make
    // the same random draws, the same decisions, and land on bitwise-equal
    // weights when driven by identical channels.
    agents::DqnSettings st;
    st.history_len = 5;
    st.arch = nn::Arch::resnet;
    st.hidden_layers = 2;
    st.hidden_width = 16;
    st.batch_size = 8;
    st.replay_capacity = 100;
    st.target_sync = 40;

    const std::uint64_t seed = 99;
    Rng rng_a(seed), rng_b(seed);
    agents::DqnLearner scalar(st, rng_a);
    agents::FairDqnLearner vector(st, agents::FairnessObjective{0.0, 1, 0, 1e-6}, rng_b);

    env::Channel ch_a({}, 1, rng_a);
    env::Channel ch_b({}, 1, rng_b);

    for (std::int64_t t = 0; t < 3000; ++t) {
        const AgentAction a = scalar.select_action(t, rng_a);
        const AgentAction b = vector.select_action(t, rng_b);
        REQUIRE(a == b);

        const AgentAction acts_a[] = {a};
        const AgentAction acts_b[] = {b};
        const env::SlotOutcome out_a = ch_a.step(acts_a, rng_a);
        const env::SlotOutcome out_b = ch_b.step(acts_b, rng_b);
        REQUIRE(out_a.z == out_b.z);

        const double ra[] = {out_a.z == Observation::success ? 1.0 : 0.0};
        const double rb[] = {static_cast<double>(out_b.success[0])};
        REQUIRE(ra[0] == rb[0]);  // alone on the channel, the two coincide
        scalar.observe(a, out_a.z, ra, t, rng_a);
        vector.observe(b, out_b.z, rb, t, rng_b);
    }
    CHECK(nets_equal(scalar.network().live, vector.network().live));
    CHECK(nets_equal(scalar.network().target, vector.network().target));
}

TEST_CASE("learner settings are validated") {
    agents::TabularSettings bad;
    bad.beta = 0.0;
    CHECK_THROWS_AS(agents::TabularLearner{bad}, std::invalid_argument);
    bad.beta = 0.5;
    bad.gamma = 1.0;
    CHECK_THROWS_AS(agents::TabularLearner{bad}, std::invalid_argument);

    Rng rng(37);
    agents::DqnSettings st;
    st.history_len = 0;
    CHECK_THROWS_AS(agents::DqnLearner(st, rng), std::invalid_argument);
}
