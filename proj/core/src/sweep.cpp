#include "dlma/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <stdexcept>
#include <thread>

#include "dlma/metrics.hpp"
#include "dlma/oracle.hpp"
#include "dlma/runner.hpp"

namespace dlma::harness {

namespace {

double final_window_tp(std::span<const std::uint8_t> rewards, int window) {
    const auto t = static_cast<std::int64_t>(rewards.size());
    if (t == 0) return 0.0;
    const int n = static_cast<int>(std::min<std::int64_t>(window, t));
    return short_term_throughput(rewards, t, n).value_or(0.0);
}

struct RunSlot {
    std::vector<double> node_tp;
    double channel_tp = 0.0;
};

}  // namespace

std::vector<SweepRow> sweep(const KvMap& base, const SweepSpec& spec) {
    if (spec.key.empty()) throw std::invalid_argument("sweep: key must not be empty");
    if (spec.values.empty()) throw std::invalid_argument("sweep: values must not be empty");
    if (spec.seeds < 1) throw std::invalid_argument("sweep: seeds must be >= 1");
    if (spec.jobs < 1) throw std::invalid_argument("sweep: jobs must be >= 1");

    struct ValuePlan {
        ScenarioConfig cfg;
        oracle::BenchmarkResult best;
    };
    std::vector<ValuePlan> plans;
    plans.reserve(spec.values.size());
    for (const std::string& value : spec.values) {
        KvMap kv = base;
        kv[spec.key] = value;
        ValuePlan plan;
        plan.cfg = config_from_kv(kv);
        plan.best = plan.cfg.mode == AgentMode::dqn_fair
                        ? oracle::optimal_alpha_fair(plan.cfg, plan.cfg.alpha, plan.cfg.k)
                        : oracle::optimal_sum(plan.cfg);
        plans.push_back(std::move(plan));
    }

    const std::size_t seeds = static_cast<std::size_t>(spec.seeds);
    std::vector<RunSlot> slots(plans.size() * seeds);
    std::atomic<std::size_t> cursor{0};
    auto worker = [&] {
        while (true) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= slots.size()) return;
            ScenarioConfig cfg = plans[i / seeds].cfg;
            cfg.seed += i % seeds;
            const MetricsRecord rec = run(cfg);
            RunSlot& slot = slots[i];
            slot.node_tp.reserve(rec.success.size());
            for (const auto& row : rec.success)
                slot.node_tp.push_back(final_window_tp(row, cfg.window));
            slot.channel_tp = final_window_tp(channel_series(rec), cfg.window);
        }
    };
    const std::size_t threads =
        std::min<std::size_t>(static_cast<std::size_t>(spec.jobs), slots.size());
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    std::vector<SweepRow> rows;
    for (std::size_t v = 0; v < plans.size(); ++v) {
        const ValuePlan& plan = plans[v];
        const int legacy = static_cast<int>(plan.cfg.nodes.size());
        const int physical = plan.cfg.physical_agents();
        const int nodes = legacy + physical;
        auto oracle_of = [&](int node_id) {
            if (node_id < 0) return plan.best.sum;
            if (node_id < legacy) return plan.best.per_node[static_cast<std::size_t>(node_id)];
            return plan.best.per_node.back() / physical;
        };
        std::vector<double> mean_by_node(static_cast<std::size_t>(nodes) + 1, 0.0);
        for (std::size_t s = 0; s < seeds; ++s) {
            const RunSlot& slot = slots[v * seeds + s];
            const std::int64_t seed =
                plan.cfg.seed + static_cast<std::int64_t>(s);
            for (int n = 0; n < nodes; ++n) {
                const double tp = slot.node_tp[static_cast<std::size_t>(n)];
                rows.push_back({spec.values[v], seed, n, tp, oracle_of(n)});
                mean_by_node[static_cast<std::size_t>(n)] += tp;
            }
            rows.push_back({spec.values[v], seed, -1, slot.channel_tp, oracle_of(-1)});
            mean_by_node[static_cast<std::size_t>(nodes)] += slot.channel_tp;
        }
        for (int n = 0; n < nodes; ++n)
            rows.push_back({spec.values[v], -1, n,
                            mean_by_node[static_cast<std::size_t>(n)] / static_cast<double>(seeds),
                            oracle_of(n)});
        rows.push_back({spec.values[v], -1, -1,
                        mean_by_node[static_cast<std::size_t>(nodes)] / static_cast<double>(seeds),
                        oracle_of(-1)});
    }
    return rows;
}

}  // namespace dlma::harness
