#include <benchmark/benchmark.h>

#include "dlma/agents.hpp"
#include "dlma/nn.hpp"
#include "dlma/rng.hpp"

namespace {

using namespace dlma;

// Production-sized value network: 6*20 one-hot inputs, 64-wide residual
// stack with 6 hidden affine layers, 2 outputs.
nn::NetworkSpec value_net_spec() {
    nn::NetworkSpec spec;
    spec.arch = nn::Arch::resnet;
    spec.input = 120;
    spec.hidden_width = 64;
    spec.hidden_layers = 6;
    spec.blocks = 2;
    spec.output = 2;
    return spec;
}

void bench_forward_batch32(benchmark::State& state) {
    Rng rng(7);
    const nn::Params params = nn::make_params(value_net_spec(), rng);
    Eigen::MatrixXd batch = Eigen::MatrixXd::Zero(params.spec.input, 32);
    for (int j = 0; j < batch.cols(); ++j)
        for (int i = 0; i < params.spec.input; i += 6)
            batch(i + static_cast<int>(uniform_index(rng, 6)), j) = 1.0;
    for (auto _ : state) {
        Eigen::MatrixXd out = nn::forward(params, batch);
        benchmark::DoNotOptimize(out.data());
    }
}
BENCHMARK(bench_forward_batch32);

void bench_backward_batch32(benchmark::State& state) {
    Rng rng(7);
    const nn::Params params = nn::make_params(value_net_spec(), rng);
    Eigen::MatrixXd batch = Eigen::MatrixXd::Zero(params.spec.input, 32);
    for (int j = 0; j < batch.cols(); ++j)
        for (int i = 0; i < params.spec.input; i += 6)
            batch(i + static_cast<int>(uniform_index(rng, 6)), j) = 1.0;
    Eigen::MatrixXd d_out = Eigen::MatrixXd::Constant(params.spec.output, 32, 0.01);
    nn::Params grads = nn::make_zero_params(params.spec);
    nn::ForwardCache cache;
    for (auto _ : state) {
        nn::forward(params, batch, cache);
        for (auto& layer : grads.layers) {
            layer.W.setZero();
            layer.b.setZero();
        }
        nn::gradient(params, cache, d_out, grads);
        benchmark::DoNotOptimize(grads.layers.back().b.data());
    }
}
BENCHMARK(bench_backward_batch32);

void bench_train_step(benchmark::State& state) {
    Rng rng(7);
    agents::DqnSettings st;
    st.history_len = 20;
    agents::DqnLearner learner(st, rng);
    // Fill the replay memory with synthetic single-agent experience.
    agents::AgentState s(st.history_len);
    for (int t = 0; t < 600; ++t) {
        const auto a = static_cast<env::AgentAction>(uniform_index(rng, 2));
        const env::Observation z = a == env::AgentAction::transmit
                                       ? env::Observation::success
                                       : env::Observation::idleness;
        const double r[] = {z == env::Observation::success ? 1.0 : 0.0};
        learner.observe(a, z, r, t, rng);
    }
    std::int64_t t = 600;
    for (auto _ : state) {
        const double r[] = {1.0};
        learner.observe(env::AgentAction::transmit, env::Observation::success, r, t++, rng);
        benchmark::DoNotOptimize(learner.last_loss());
    }
}
BENCHMARK(bench_train_step);

}  // namespace

BENCHMARK_MAIN();
