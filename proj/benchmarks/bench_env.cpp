#include <benchmark/benchmark.h>

#include "dlma/config.hpp"
#include "dlma/env.hpp"
#include "dlma/rng.hpp"
#include "dlma/runner.hpp"

namespace {

using namespace dlma;

void bench_channel_step(benchmark::State& state) {
    Rng rng(11);
    std::vector<env::ProtocolSpec> legacy;
    legacy.push_back(env::ProtocolSpec::make_tdma({0, 1}, 10));
    legacy.push_back(env::ProtocolSpec::make_q_aloha(0.1));
    legacy.push_back(env::ProtocolSpec::make_eb_aloha(4, 2));
    env::Channel channel(legacy, 2, rng);
    std::vector<env::AgentAction> actions = {env::AgentAction::transmit,
                                             env::AgentAction::wait};
    for (auto _ : state) {
        const env::SlotOutcome out = channel.step(actions, rng);
        benchmark::DoNotOptimize(out.transmit_count);
    }
}
BENCHMARK(bench_channel_step);

void bench_short_tabular_run(benchmark::State& state) {
    harness::KvMap kv = {
        {"mode", "tabular_rl"}, {"m", "10"},          {"t", "2000"},
        {"node.0.kind", "tdma"}, {"node.0.x", "0-1"}, {"node.0.y", "10"},
    };
    const harness::ScenarioConfig cfg = harness::config_from_kv(kv);
    for (auto _ : state) {
        const harness::MetricsRecord rec = harness::run(cfg);
        benchmark::DoNotOptimize(rec.slots);
    }
}
BENCHMARK(bench_short_tabular_run);

}  // namespace

BENCHMARK_MAIN();
