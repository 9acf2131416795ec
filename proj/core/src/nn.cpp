#include "dlma/nn.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace dlma::nn {

void NetworkSpec::validate() const {
    if (input < 1) throw std::invalid_argument("network input width must be >= 1");
    if (hidden_width < 1) throw std::invalid_argument("network hidden_width must be >= 1");
    if (output < 1) throw std::invalid_argument("network output width must be >= 1");
    if (arch == Arch::plain) {
        if (hidden_layers < 0) throw std::invalid_argument("network hidden_layers must be >= 0");
    } else {
        if (blocks < 0) throw std::invalid_argument("network blocks must be >= 0");
    }
}

int NetworkSpec::affine_layer_count() const {
    return arch == Arch::plain ? hidden_layers + 1 : 3 + 2 * blocks;
}

namespace {

std::pair<int, int> layer_dims(const NetworkSpec& s, int l) {
    const int n = s.affine_layer_count();
    const int in = l == 0 ? s.input : s.hidden_width;
    const int out = l == n - 1 ? s.output : s.hidden_width;
    return {in, out};
}

Eigen::MatrixXd affine(const Layer& layer, const Eigen::MatrixXd& x) {
    return (layer.W * x).colwise() + layer.b;
}

Eigen::MatrixXd relu(const Eigen::MatrixXd& z) {
    return z.cwiseMax(0.0);
}

// Subgradient 0 at the kink.
Eigen::ArrayXXd relu_mask(const Eigen::MatrixXd& z) {
    return (z.array() > 0.0).cast<double>();
}

void check_same_shapes(const Params& a, const Params& b, const char* what) {
    if (a.layers.size() != b.layers.size())
        throw std::invalid_argument(std::string(what) + ": layer count mismatch");
    for (std::size_t l = 0; l < a.layers.size(); ++l) {
        if (a.layers[l].W.rows() != b.layers[l].W.rows() ||
            a.layers[l].W.cols() != b.layers[l].W.cols() ||
            a.layers[l].b.size() != b.layers[l].b.size())
            throw std::invalid_argument(std::string(what) + ": layer shape mismatch");
    }
}

}  // namespace

Params make_params(const NetworkSpec& spec, Rng& rng) {
    spec.validate();
    Params p;
    p.spec = spec;
    const int n = spec.affine_layer_count();
    p.layers.resize(static_cast<std::size_t>(n));
    for (int l = 0; l < n; ++l) {
        const auto [in, out] = layer_dims(spec, l);
        Layer& layer = p.layers[static_cast<std::size_t>(l)];
        layer.W.resize(out, in);
        layer.b = Eigen::VectorXd::Zero(out);
        const double bound = 1.0 / std::sqrt(static_cast<double>(in));
        // Row-major fill so the draw order is independent of storage layout.
        for (int i = 0; i < out; ++i)
            for (int j = 0; j < in; ++j)
                layer.W(i, j) = (2.0 * uniform01(rng) - 1.0) * bound;
    }
    return p;
}

Params make_zero_params(const NetworkSpec& spec) {
    spec.validate();
    Params p;
    p.spec = spec;
    const int n = spec.affine_layer_count();
    p.layers.resize(static_cast<std::size_t>(n));
    for (int l = 0; l < n; ++l) {
        const auto [in, out] = layer_dims(spec, l);
        p.layers[static_cast<std::size_t>(l)].W = Eigen::MatrixXd::Zero(out, in);
        p.layers[static_cast<std::size_t>(l)].b = Eigen::VectorXd::Zero(out);
    }
    return p;
}

namespace {

Eigen::MatrixXd forward_impl(const Params& params, const Eigen::MatrixXd& input,
                             ForwardCache* cache) {
    const NetworkSpec& s = params.spec;
    if (input.rows() != s.input)
        throw std::invalid_argument("forward: input row count does not match network input width");
    const int n = s.affine_layer_count();
    if (static_cast<int>(params.layers.size()) != n)
        throw std::invalid_argument("forward: params layer count does not match spec");

    if (cache) {
        cache->inputs.assign(static_cast<std::size_t>(n), {});
        cache->preact.assign(static_cast<std::size_t>(n), {});
    }
    auto run_layer = [&](int l, const Eigen::MatrixXd& x) {
        Eigen::MatrixXd z = affine(params.layers[static_cast<std::size_t>(l)], x);
        if (cache) {
            cache->inputs[static_cast<std::size_t>(l)] = x;
            cache->preact[static_cast<std::size_t>(l)] = z;
        }
        return z;
    };

    if (s.arch == Arch::plain) {
        Eigen::MatrixXd x = input;
        for (int l = 0; l + 1 < n; ++l) x = relu(run_layer(l, x));
        return run_layer(n - 1, x);
    }

    Eigen::MatrixXd x = relu(run_layer(0, input));
    x = relu(run_layer(1, x));
    for (int blk = 0; blk < s.blocks; ++blk) {
        const int l1 = 2 + 2 * blk;
        Eigen::MatrixXd branch = relu(run_layer(l1, x));
        branch = relu(run_layer(l1 + 1, branch));
        x += branch;  // raw shortcut, no activation after the sum
    }
    return run_layer(n - 1, x);
}

}  // namespace

Eigen::MatrixXd forward(const Params& params, const Eigen::MatrixXd& input) {
    return forward_impl(params, input, nullptr);
}

Eigen::MatrixXd forward(const Params& params, const Eigen::MatrixXd& input, ForwardCache& cache) {
    return forward_impl(params, input, &cache);
}

void gradient(const Params& params, const ForwardCache& cache, const Eigen::MatrixXd& d_output,
              Params& grads) {
    const NetworkSpec& s = params.spec;
    const int n = s.affine_layer_count();
    if (static_cast<int>(cache.inputs.size()) != n || static_cast<int>(cache.preact.size()) != n)
        throw std::invalid_argument("gradient: cache does not match network depth");
    if (d_output.rows() != s.output || d_output.cols() != cache.inputs[0].cols())
        throw std::invalid_argument("gradient: d_output shape does not match cached batch");
    check_same_shapes(params, grads, "gradient");

    auto accumulate = [&](int l, const Eigen::MatrixXd& dz) {
        grads.layers[static_cast<std::size_t>(l)].W.noalias() +=
            dz * cache.inputs[static_cast<std::size_t>(l)].transpose();
        grads.layers[static_cast<std::size_t>(l)].b += dz.rowwise().sum();
    };
    auto back_through = [&](int l, const Eigen::MatrixXd& d_out_of_l) {
        // d w.r.t. the ReLU layer l's input, accumulating its parameter grads.
        Eigen::MatrixXd dz =
            (d_out_of_l.array() * relu_mask(cache.preact[static_cast<std::size_t>(l)])).matrix();
        accumulate(l, dz);
        return Eigen::MatrixXd(params.layers[static_cast<std::size_t>(l)].W.transpose() * dz);
    };

    // Output layer is linear in both architectures.
    accumulate(n - 1, d_output);
    Eigen::MatrixXd d = params.layers[static_cast<std::size_t>(n - 1)].W.transpose() * d_output;

    if (s.arch == Arch::plain) {
        for (int l = n - 2; l >= 0; --l) {
            Eigen::MatrixXd dz =
                (d.array() * relu_mask(cache.preact[static_cast<std::size_t>(l)])).matrix();
            accumulate(l, dz);
            if (l > 0) d = params.layers[static_cast<std::size_t>(l)].W.transpose() * dz;
        }
        return;
    }

    for (int blk = s.blocks - 1; blk >= 0; --blk) {
        const int l1 = 2 + 2 * blk;
        const Eigen::MatrixXd dy = d;  // gradient w.r.t. the block output
        Eigen::MatrixXd d_branch = back_through(l1 + 1, dy);
        d = back_through(l1, d_branch) + dy;  // branch path plus identity shortcut
    }
    d = back_through(1, d);
    Eigen::MatrixXd dz0 =
        (d.array() * relu_mask(cache.preact[0])).matrix();
    accumulate(0, dz0);
}

OptimizerState make_optimizer(const NetworkSpec& spec, double learning_rate, double decay,
                              double stability) {
    if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be > 0");
    if (!(decay >= 0.0 && decay < 1.0)) throw std::invalid_argument("decay must lie in [0, 1)");
    if (!(stability > 0.0)) throw std::invalid_argument("stability must be > 0");
    OptimizerState opt;
    opt.learning_rate = learning_rate;
    opt.decay = decay;
    opt.stability = stability;
    const Params zeros = make_zero_params(spec);
    opt.avg = zeros.layers;
    return opt;
}

void rmsprop_step(Params& params, const Params& grads, OptimizerState& opt) {
    check_same_shapes(params, grads, "rmsprop_step");
    if (opt.avg.size() != params.layers.size())
        throw std::invalid_argument("rmsprop_step: optimizer state does not match network");
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        auto& avg = opt.avg[l];
        const auto& g = grads.layers[l];
        avg.W.array() = opt.decay * avg.W.array() + (1.0 - opt.decay) * g.W.array().square();
        avg.b.array() = opt.decay * avg.b.array() + (1.0 - opt.decay) * g.b.array().square();
        params.layers[l].W.array() -=
            opt.learning_rate * g.W.array() / (avg.W.array().sqrt() + opt.stability);
        params.layers[l].b.array() -=
            opt.learning_rate * g.b.array() / (avg.b.array().sqrt() + opt.stability);
    }
}

NetworkParams make_network(const NetworkSpec& spec, Rng& rng) {
    NetworkParams net;
    net.live = make_params(spec, rng);
    net.target = net.live;
    return net;
}

void sync_target(NetworkParams& net) {
    net.target = net.live;
}

void save_network(const Params& params, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_network: cannot open " + path.string());
    const NetworkSpec& s = params.spec;
    out << "dlma-net v1 arch=" << (s.arch == Arch::plain ? "plain" : "resnet")
        << " input=" << s.input << " width=" << s.hidden_width << " hidden=" << s.hidden_layers
        << " blocks=" << s.blocks << " output=" << s.output << "\n";
    for (const Layer& layer : params.layers) {
        for (Eigen::Index i = 0; i < layer.W.rows(); ++i)
            for (Eigen::Index j = 0; j < layer.W.cols(); ++j) {
                const double v = layer.W(i, j);
                out.write(reinterpret_cast<const char*>(&v), sizeof v);
            }
        for (Eigen::Index i = 0; i < layer.b.size(); ++i) {
            const double v = layer.b(i);
            out.write(reinterpret_cast<const char*>(&v), sizeof v);
        }
    }
    if (!out) throw std::runtime_error("save_network: write failed for " + path.string());
}

Params load_network(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_network: cannot open " + path.string());
    std::string header;
    if (!std::getline(in, header)) throw std::runtime_error("load_network: missing header line");

    std::istringstream hs(header);
    std::string magic, version;
    hs >> magic >> version;
    if (magic != "dlma-net" || version != "v1")
        throw std::runtime_error("load_network: unrecognized header '" + header + "'");
    NetworkSpec spec;
    std::string token;
    while (hs >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("load_network: malformed header token '" + token + "'");
        const std::string key = token.substr(0, eq);
        const std::string val = token.substr(eq + 1);
        if (key == "arch") {
            if (val == "plain") spec.arch = Arch::plain;
            else if (val == "resnet") spec.arch = Arch::resnet;
            else throw std::runtime_error("load_network: unknown arch '" + val + "'");
        } else if (key == "input") spec.input = std::stoi(val);
        else if (key == "width") spec.hidden_width = std::stoi(val);
        else if (key == "hidden") spec.hidden_layers = std::stoi(val);
        else if (key == "blocks") spec.blocks = std::stoi(val);
        else if (key == "output") spec.output = std::stoi(val);
        else throw std::runtime_error("load_network: unknown header key '" + key + "'");
    }
    spec.validate();

    Params p = make_zero_params(spec);
    for (Layer& layer : p.layers) {
        for (Eigen::Index i = 0; i < layer.W.rows(); ++i)
            for (Eigen::Index j = 0; j < layer.W.cols(); ++j) {
                double v = 0.0;
                in.read(reinterpret_cast<char*>(&v), sizeof v);
                layer.W(i, j) = v;
            }
        for (Eigen::Index i = 0; i < layer.b.size(); ++i) {
            double v = 0.0;
            in.read(reinterpret_cast<char*>(&v), sizeof v);
            layer.b(i) = v;
        }
    }
    if (!in) throw std::runtime_error("load_network: truncated weight data in " + path.string());
    return p;
}

}  // namespace dlma::nn
