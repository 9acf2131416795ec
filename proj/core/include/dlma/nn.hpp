#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <vector>

#include "dlma/rng.hpp"

namespace dlma::nn {

enum class Arch { plain, resnet };

// Shape of a dense action-value network.
//
// plain:  input -> [hidden_layers x (affine H + ReLU)] -> affine output
// resnet: input -> 2 x (affine H + ReLU)
//               -> blocks x { y = x + ReLU(W2 ReLU(W1 x + b1) + b2) }
//               -> affine output
// The residual branch is ReLU-activated on both of its layers; the shortcut
// is added raw, with no activation after the sum. Total hidden layers for the
// residual form: 2 + 2 * blocks.
struct NetworkSpec {
    Arch arch = Arch::plain;
    int input = 1;
    int hidden_width = 64;
    int hidden_layers = 1;  // plain only
    int blocks = 0;         // resnet only
    int output = 1;

    void validate() const;          // throws std::invalid_argument naming the field
    int affine_layer_count() const; // total affine layers including the output layer

    bool operator==(const NetworkSpec&) const = default;
};

struct Layer {
    Eigen::MatrixXd W;  // out x in
    Eigen::VectorXd b;  // out
};

// One full set of weights theta.
struct Params {
    NetworkSpec spec;
    std::vector<Layer> layers;
};

// Random weights: uniform in +-1/sqrt(fan_in), biases zero.
Params make_params(const NetworkSpec& spec, Rng& rng);

// All-zero weights with the same shapes (gradient accumulators).
Params make_zero_params(const NetworkSpec& spec);

// Activations recorded during a forward pass, needed for the backward pass.
struct ForwardCache {
    std::vector<Eigen::MatrixXd> inputs;  // inputs[l]: input fed to affine layer l
    std::vector<Eigen::MatrixXd> preact;  // preact[l]: W x + b of layer l
};

// Batched forward pass. Input is (spec.input x batch); output (spec.output x batch).
Eigen::MatrixXd forward(const Params& params, const Eigen::MatrixXd& input);
Eigen::MatrixXd forward(const Params& params, const Eigen::MatrixXd& input, ForwardCache& cache);

// Reverse-mode gradients. `d_output` is dL/d(network output) for the same
// batch the cache was filled with; parameter gradients are summed over the
// batch and accumulated (+=) into `grads`, which must be zero-initialized or
// carry a previous partial sum of the same shapes.
void gradient(const Params& params, const ForwardCache& cache, const Eigen::MatrixXd& d_output,
              Params& grads);

// RMSProp optimizer state: running average of squared gradients per parameter.
struct OptimizerState {
    double learning_rate = 0.01;
    double decay = 0.9;
    double stability = 1e-6;
    std::vector<Layer> avg;
};

OptimizerState make_optimizer(const NetworkSpec& spec, double learning_rate,
                              double decay = 0.9, double stability = 1e-6);

// avg <- decay * avg + (1 - decay) * g^2;  theta <- theta - lr * g / (sqrt(avg) + stability)
void rmsprop_step(Params& params, const Params& grads, OptimizerState& opt);

// Live network theta plus its quasi-static target copy theta^-.
struct NetworkParams {
    Params live;
    Params target;
};

NetworkParams make_network(const NetworkSpec& spec, Rng& rng);  // target starts equal to live

// Deep-copy live into target; later updates to live leave target untouched.
void sync_target(NetworkParams& net);

// Text header line describing the architecture, then the raw 64-bit floats of
// every layer in order (W row-major, then b). Grammar documented in the README.
void save_network(const Params& params, const std::filesystem::path& path);
Params load_network(const std::filesystem::path& path);

}  // namespace dlma::nn
