#include "dlma/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "dlma/agents.hpp"

namespace dlma::oracle {

namespace {

constexpr std::int64_t max_frame_period = 1'000'000;
constexpr std::int64_t max_dp_states = 2'000'000;

// One equivalence class of frame positions: the same set of TDMA nodes is
// scheduled in each of them, so one agent transmit probability covers all.
struct SlotClass {
    std::vector<int> scheduled;  // legacy indices of the TDMA nodes on the air
    std::vector<int> positions;
    double weight = 0.0;
};

struct ClassModel {
    int legacy_count = 0;
    int period = 1;
    std::vector<SlotClass> classes;
    std::vector<int> aloha_ids;
    std::vector<double> aloha_q;
    double prod_all = 1.0;            // P(every q-ALOHA node silent)
    std::vector<double> solo;         // P(exactly node j of the q-ALOHA set transmits)
    double solo_sum = 0.0;
};

ClassModel build_class_model(const harness::ScenarioConfig& cfg) {
    ClassModel mod;
    mod.legacy_count = static_cast<int>(cfg.nodes.size());
    std::vector<int> tdma_ids;
    for (int i = 0; i < mod.legacy_count; ++i) {
        const auto& node = cfg.nodes[static_cast<std::size_t>(i)];
        switch (node.kind) {
            case env::Protocol::tdma: tdma_ids.push_back(i); break;
            case env::Protocol::q_aloha:
                mod.aloha_ids.push_back(i);
                mod.aloha_q.push_back(node.q);
                break;
            default:
                throw UnsupportedScenario(
                    "frame-position analysis handles tdma and q_aloha nodes only");
        }
    }

    std::int64_t period = 1;
    for (int id : tdma_ids) {
        period = std::lcm(period,
                          static_cast<std::int64_t>(cfg.nodes[static_cast<std::size_t>(id)].period));
        if (period > max_frame_period)
            throw UnsupportedScenario("combined TDMA frame period exceeds 1e6 positions");
    }
    mod.period = static_cast<int>(period);

    std::map<std::vector<int>, SlotClass> by_set;
    for (int pos = 0; pos < mod.period; ++pos) {
        std::vector<int> scheduled;
        for (int id : tdma_ids) {
            const auto& node = cfg.nodes[static_cast<std::size_t>(id)];
            if (std::binary_search(node.slots.begin(), node.slots.end(), pos % node.period))
                scheduled.push_back(id);
        }
        auto& cls = by_set[scheduled];
        cls.scheduled = scheduled;
        cls.positions.push_back(pos);
    }
    for (auto& [_, cls] : by_set) {
        cls.weight = static_cast<double>(cls.positions.size()) / mod.period;
        mod.classes.push_back(std::move(cls));
    }

    for (double q : mod.aloha_q) mod.prod_all *= 1.0 - q;
    for (std::size_t j = 0; j < mod.aloha_q.size(); ++j) {
        double s = mod.aloha_q[j];
        for (std::size_t l = 0; l < mod.aloha_q.size(); ++l)
            if (l != j) s *= 1.0 - mod.aloha_q[l];
        mod.solo.push_back(s);
        mod.solo_sum += s;
    }
    return mod;
}

struct Throughputs {
    std::vector<double> legacy;
    double agent = 0.0;
};

// Long-run per-node throughput when the agent transmits with probability p[c]
// in the positions of class c.
Throughputs eval_classes(const ClassModel& mod, std::span<const double> p) {
    Throughputs th;
    th.legacy.assign(static_cast<std::size_t>(mod.legacy_count), 0.0);
    for (std::size_t c = 0; c < mod.classes.size(); ++c) {
        const SlotClass& cls = mod.classes[c];
        const double w = cls.weight;
        const double pc = p[c];
        if (cls.scheduled.size() >= 2) continue;  // collision regardless of the agent
        if (cls.scheduled.size() == 1) {
            th.legacy[static_cast<std::size_t>(cls.scheduled[0])] +=
                w * (1.0 - pc) * mod.prod_all;
            continue;
        }
        th.agent += w * pc * mod.prod_all;
        for (std::size_t j = 0; j < mod.aloha_ids.size(); ++j)
            th.legacy[static_cast<std::size_t>(mod.aloha_ids[j])] += w * (1.0 - pc) * mod.solo[j];
    }
    return th;
}

std::string describe_positions(const SlotClass& cls, int period) {
    if (static_cast<int>(cls.positions.size()) == period) return "all positions";
    std::ostringstream out;
    out << "positions {";
    const std::size_t shown = std::min<std::size_t>(cls.positions.size(), 12);
    for (std::size_t i = 0; i < shown; ++i)
        out << (i ? "," : "") << cls.positions[i];
    if (shown < cls.positions.size()) out << ",...";
    out << "}";
    return out.str();
}

BenchmarkResult from_throughputs(const Throughputs& th) {
    BenchmarkResult r;
    r.per_node = th.legacy;
    r.per_node.push_back(th.agent);
    r.sum = std::accumulate(r.per_node.begin(), r.per_node.end(), 0.0);
    return r;
}

// Average-reward optimal value against a single windowed-ALOHA node whose
// counter and backoff stage the oracle can observe (relative value iteration
// over the node's (stage, counter) chain).
BenchmarkResult windowed_dp(const env::ProtocolSpec& proto) {
    const int max_stage = proto.kind == env::Protocol::eb_aloha ? proto.max_stage : 0;
    const int w0 = proto.window;

    std::vector<std::int64_t> offset(static_cast<std::size_t>(max_stage) + 2, 0);
    for (int kk = 0; kk <= max_stage; ++kk)
        offset[static_cast<std::size_t>(kk) + 1] =
            offset[static_cast<std::size_t>(kk)] + (static_cast<std::int64_t>(w0) << kk);
    const std::int64_t states = offset[static_cast<std::size_t>(max_stage) + 1];
    if (states > max_dp_states)
        throw UnsupportedScenario("windowed-ALOHA state space exceeds 2e6 entries");

    std::vector<double> h(static_cast<std::size_t>(states), 0.0);
    std::vector<double> hn(static_cast<std::size_t>(states), 0.0);
    std::vector<double> stage_mean(static_cast<std::size_t>(max_stage) + 1, 0.0);
    double gain = 0.0;
    bool converged = false;

    for (int iter = 0; iter < 500000 && !converged; ++iter) {
        for (int kk = 0; kk <= max_stage; ++kk) {
            const auto begin = static_cast<std::size_t>(offset[static_cast<std::size_t>(kk)]);
            const auto count = static_cast<std::size_t>(static_cast<std::int64_t>(w0) << kk);
            double s = 0.0;
            for (std::size_t i = 0; i < count; ++i) s += h[begin + i];
            stage_mean[static_cast<std::size_t>(kk)] = s / static_cast<double>(count);
        }
        for (int kk = 0; kk <= max_stage; ++kk) {
            const std::int64_t wmax = static_cast<std::int64_t>(w0) << kk;
            const std::int64_t base = offset[static_cast<std::size_t>(kk)];
            // Counter 0: the node transmits. Waiting hands it a success and
            // resets it; transmitting collides and escalates its stage.
            const int k_next = std::min(kk + 1, max_stage);
            const double wait_v = 1.0 + stage_mean[0];
            const double tx_v = stage_mean[static_cast<std::size_t>(k_next)];
            hn[static_cast<std::size_t>(base)] = std::max(wait_v, tx_v);
            // Counter > 0: the node is silent, so transmitting scores 1.
            for (std::int64_t w = 1; w < wmax; ++w)
                hn[static_cast<std::size_t>(base + w)] =
                    1.0 + h[static_cast<std::size_t>(base + w - 1)];
        }
        double dmin = hn[0] - h[0];
        double dmax = dmin;
        for (std::size_t i = 1; i < h.size(); ++i) {
            const double d = hn[i] - h[i];
            dmin = std::min(dmin, d);
            dmax = std::max(dmax, d);
        }
        gain = 0.5 * (dmin + dmax);
        converged = dmax - dmin < 1e-11;
        const double ref = hn[0];
        for (std::size_t i = 0; i < h.size(); ++i) h[i] = hn[i] - ref;
    }
    if (!converged)
        throw std::runtime_error("windowed-ALOHA value iteration did not converge");

    // Under the optimal policy the node is never collided with, so its stage
    // stays 0 and it renews every (counter + 1) slots: mean (W+1)/2.
    const double node_tp = 2.0 / (w0 + 1.0);
    BenchmarkResult r;
    r.sum = gain;
    r.per_node = {node_tp, gain - node_tp};
    r.policy = "transmit exactly when the node's backoff counter is nonzero";
    r.method = Method::dp;
    return r;
}

}  // namespace

BenchmarkResult optimal_sum(const harness::ScenarioConfig& cfg) {
    cfg.validate();
    int windowed = 0;
    for (const auto& node : cfg.nodes)
        if (node.kind == env::Protocol::fw_aloha || node.kind == env::Protocol::eb_aloha)
            ++windowed;
    if (windowed > 0) {
        if (windowed == 1 && cfg.nodes.size() == 1) return windowed_dp(cfg.nodes[0]);
        throw UnsupportedScenario(
            "optimal_sum supports a windowed-ALOHA node only as the sole legacy node");
    }

    const ClassModel mod = build_class_model(cfg);
    std::vector<double> p(mod.classes.size(), 0.0);
    std::ostringstream policy;
    for (std::size_t c = 0; c < mod.classes.size(); ++c) {
        const SlotClass& cls = mod.classes[c];
        if (cls.scheduled.empty())
            p[c] = mod.prod_all >= mod.solo_sum ? 1.0 : 0.0;
        if (c) policy << "; ";
        policy << describe_positions(cls, mod.period) << ": p=" << p[c];
    }

    BenchmarkResult r = from_throughputs(eval_classes(mod, p));
    r.policy = policy.str();
    r.method = Method::closed_form;
    return r;
}

namespace {

double fair_objective(const Throughputs& th, double alpha, int k) {
    double v = 0.0;
    for (double x : th.legacy) v += agents::alpha_utility(x, alpha);
    v += k * agents::alpha_utility(th.agent / k, alpha);
    return v;
}

}  // namespace

BenchmarkResult optimal_alpha_fair(const harness::ScenarioConfig& cfg, double alpha, int k) {
    cfg.validate();
    if (alpha < 0.0) throw std::invalid_argument("alpha must be >= 0");
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    for (const auto& node : cfg.nodes)
        if (node.kind == env::Protocol::fw_aloha || node.kind == env::Protocol::eb_aloha)
            throw UnsupportedScenario("the fairness oracle supports tdma and q_aloha nodes only");

    const ClassModel mod = build_class_model(cfg);
    // Transmitting into a position where several TDMA nodes already collide
    // helps nobody, and into a singly-occupied position only destroys that
    // node's slot; still, singly-occupied classes stay in the search so the
    // optimum is found rather than argued.
    std::vector<std::size_t> vary;
    for (std::size_t c = 0; c < mod.classes.size(); ++c)
        if (mod.classes[c].scheduled.size() <= 1) vary.push_back(c);
    if (vary.size() > 3)
        throw UnsupportedScenario("fairness oracle limited to 3 frame-position classes");

    std::vector<double> p(mod.classes.size(), 0.0);
    std::vector<double> best_p = p;
    double best_v = -std::numeric_limits<double>::infinity();

    auto search_box = [&](const std::vector<double>& lo, const std::vector<double>& hi,
                          double res) {
        std::vector<int> steps(vary.size());
        for (std::size_t d = 0; d < vary.size(); ++d)
            steps[d] = static_cast<int>(std::lround((hi[d] - lo[d]) / res));
        std::vector<int> idx(vary.size(), 0);
        while (true) {
            for (std::size_t d = 0; d < vary.size(); ++d)
                p[vary[d]] = std::clamp(lo[d] + idx[d] * res, 0.0, 1.0);
            const double v = fair_objective(eval_classes(mod, p), alpha, k);
            if (v > best_v) {
                best_v = v;
                best_p = p;
            }
            std::size_t d = 0;
            for (; d < vary.size(); ++d) {
                if (++idx[d] <= steps[d]) break;
                idx[d] = 0;
            }
            if (d == vary.size()) break;
        }
    };

    if (vary.empty()) {
        best_v = fair_objective(eval_classes(mod, p), alpha, k);
        best_p = p;
    } else {
        double res = vary.size() <= 2 ? 1e-3 : 1e-2;
        search_box(std::vector<double>(vary.size(), 0.0), std::vector<double>(vary.size(), 1.0),
                   res);
        for (int round = 0; round < 2; ++round) {
            res /= 10.0;
            std::vector<double> lo(vary.size()), hi(vary.size());
            for (std::size_t d = 0; d < vary.size(); ++d) {
                lo[d] = std::max(0.0, best_p[vary[d]] - 10.0 * res);
                hi[d] = std::min(1.0, best_p[vary[d]] + 10.0 * res);
            }
            search_box(lo, hi, res);
        }
    }

    BenchmarkResult r = from_throughputs(eval_classes(mod, best_p));
    std::ostringstream policy;
    for (std::size_t c = 0; c < mod.classes.size(); ++c) {
        if (c) policy << "; ";
        policy << describe_positions(mod.classes[c], mod.period) << ": p=" << best_p[c];
    }
    policy << " (objective " << best_v << ")";
    r.policy = policy.str();
    r.method = Method::grid_search;
    return r;
}

std::vector<double> policy_value(const harness::ScenarioConfig& cfg,
                                 const StationaryAgentPolicy& policy, std::int64_t horizon,
                                 std::uint64_t seed) {
    if (horizon < 1) throw std::invalid_argument("policy_value: horizon must be >= 1");
    if (policy.p.empty()) throw std::invalid_argument("policy_value: empty policy");
    for (double pp : policy.p)
        if (!(pp >= 0.0 && pp <= 1.0))
            throw std::invalid_argument("policy_value: probabilities must lie in [0, 1]");

    Rng rng(seed);
    env::Channel channel(cfg.nodes, 1, rng);
    std::vector<std::int64_t> wins(static_cast<std::size_t>(channel.node_count()), 0);
    std::array<env::AgentAction, 1> action{};
    for (std::int64_t t = 0; t < horizon; ++t) {
        const double pp = policy.p[static_cast<std::size_t>(t % static_cast<std::int64_t>(policy.p.size()))];
        action[0] = bernoulli(rng, pp) ? env::AgentAction::transmit : env::AgentAction::wait;
        const env::SlotOutcome out = channel.step(action, rng);
        for (std::size_t i = 0; i < wins.size(); ++i) wins[i] += out.success[i];
    }
    std::vector<double> tp(wins.size());
    for (std::size_t i = 0; i < wins.size(); ++i)
        tp[i] = static_cast<double>(wins[i]) / static_cast<double>(horizon);
    return tp;
}

std::string to_string(Method m) {
    switch (m) {
        case Method::closed_form: return "closed_form";
        case Method::grid_search: return "grid_search";
        case Method::dp: return "dp";
    }
    return "?";
}

}  // namespace dlma::oracle
