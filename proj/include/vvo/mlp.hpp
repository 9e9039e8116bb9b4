#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "vvo/phase.hpp"
#include "vvo/rng.hpp"

namespace vvo {

enum class Activation { linear, relu, sigmoid };

struct DenseLayer {
    int in = 0, out = 0;
    std::vector<double> w;  // row-major, out x in
    std::vector<double> b;

    bool operator==(const DenseLayer&) const = default;
};

// Small fully connected value network: ReLU hidden layers, linear output by
// default (a sigmoid output mode exists for fidelity experiments, but cannot
// represent negative or unbounded targets).
struct MlpNetwork {
    std::vector<DenseLayer> layers;
    Activation output_activation = Activation::linear;

    static MlpNetwork make(const std::vector<int>& dims, Rng& rng,
                           Activation output = Activation::linear) {
        if (dims.size() < 2) throw Error("network needs at least input and output dims");
        MlpNetwork net;
        net.output_activation = output;
        for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
            DenseLayer layer;
            layer.in = dims[l];
            layer.out = dims[l + 1];
            layer.w.resize(std::size_t(layer.in) * layer.out);
            layer.b.assign(std::size_t(layer.out), 0.0);
            const double bound = std::sqrt(6.0 / (layer.in + layer.out));
            for (auto& x : layer.w) x = rng.uniform(-bound, bound);
            net.layers.push_back(std::move(layer));
        }
        return net;
    }

    int input_dim() const { return layers.front().in; }
    int output_dim() const { return layers.back().out; }

    std::vector<int> dims() const {
        std::vector<int> d = {layers.front().in};
        for (const auto& l : layers) d.push_back(l.out);
        return d;
    }

    std::vector<double> forward(std::span<const double> x) const {
        if (int(x.size()) != input_dim()) throw Error("state dimension mismatch");
        std::vector<double> cur(x.begin(), x.end());
        for (std::size_t l = 0; l < layers.size(); ++l) {
            cur = affine(layers[l], cur);
            apply_activation(cur, l + 1 == layers.size() ? output_activation : Activation::relu);
        }
        return cur;
    }

    static std::vector<double> affine(const DenseLayer& layer, const std::vector<double>& x) {
        std::vector<double> y(layer.out);
        for (int r = 0; r < layer.out; ++r) {
            const double* row = layer.w.data() + std::size_t(r) * layer.in;
            double acc = layer.b[std::size_t(r)];
            for (int c = 0; c < layer.in; ++c) acc += row[c] * x[std::size_t(c)];
            y[std::size_t(r)] = acc;
        }
        return y;
    }

    static void apply_activation(std::vector<double>& v, Activation act) {
        switch (act) {
            case Activation::linear: break;
            case Activation::relu:
                for (auto& x : v) x = x > 0.0 ? x : 0.0;
                break;
            case Activation::sigmoid:
                for (auto& x : v) x = 1.0 / (1.0 + std::exp(-x));
                break;
        }
    }
};

struct ForwardCache {
    std::vector<std::vector<double>> inputs;  // per layer: the layer's input
    std::vector<std::vector<double>> outputs;  // per layer: post-activation output
};

inline std::vector<double> forward_cached(const MlpNetwork& net, std::span<const double> x,
                                          ForwardCache& cache) {
    if (int(x.size()) != net.input_dim()) throw Error("state dimension mismatch");
    cache.inputs.assign(net.layers.size(), {});
    cache.outputs.assign(net.layers.size(), {});
    std::vector<double> cur(x.begin(), x.end());
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        cache.inputs[l] = cur;
        cur = MlpNetwork::affine(net.layers[l], cur);
        MlpNetwork::apply_activation(
            cur, l + 1 == net.layers.size() ? net.output_activation : Activation::relu);
        cache.outputs[l] = cur;
    }
    return cur;
}

struct Gradients {
    std::vector<std::vector<double>> w;
    std::vector<std::vector<double>> b;

    static Gradients zeros_like(const MlpNetwork& net) {
        Gradients g;
        for (const auto& l : net.layers) {
            g.w.emplace_back(l.w.size(), 0.0);
            g.b.emplace_back(l.b.size(), 0.0);
        }
        return g;
    }

    void scale(double s) {
        for (auto& v : w)
            for (auto& x : v) x *= s;
        for (auto& v : b)
            for (auto& x : v) x *= s;
    }
};

// Backpropagates dL/d(output) through the cached forward pass, accumulating
// parameter gradients.
inline void backward_accumulate(const MlpNetwork& net, const ForwardCache& cache,
                                std::vector<double> d_out, Gradients& grads) {
    for (int l = int(net.layers.size()) - 1; l >= 0; --l) {
        const auto& layer = net.layers[std::size_t(l)];
        const Activation act =
            l + 1 == int(net.layers.size()) ? net.output_activation : Activation::relu;
        const auto& out = cache.outputs[std::size_t(l)];
        // activation derivative in terms of the post-activation value
        for (int r = 0; r < layer.out; ++r) {
            switch (act) {
                case Activation::linear: break;
                case Activation::relu:
                    if (out[std::size_t(r)] <= 0.0) d_out[std::size_t(r)] = 0.0;
                    break;
                case Activation::sigmoid:
                    d_out[std::size_t(r)] *= out[std::size_t(r)] * (1.0 - out[std::size_t(r)]);
                    break;
            }
        }
        const auto& in = cache.inputs[std::size_t(l)];
        auto& gw = grads.w[std::size_t(l)];
        auto& gb = grads.b[std::size_t(l)];
        for (int r = 0; r < layer.out; ++r) {
            const double d = d_out[std::size_t(r)];
            gb[std::size_t(r)] += d;
            double* grow = gw.data() + std::size_t(r) * layer.in;
            for (int c = 0; c < layer.in; ++c) grow[c] += d * in[std::size_t(c)];
        }
        if (l > 0) {
            std::vector<double> d_in(std::size_t(layer.in), 0.0);
            for (int r = 0; r < layer.out; ++r) {
                const double d = d_out[std::size_t(r)];
                if (d == 0.0) continue;
                const double* row = layer.w.data() + std::size_t(r) * layer.in;
                for (int c = 0; c < layer.in; ++c) d_in[std::size_t(c)] += d * row[c];
            }
            d_out = std::move(d_in);
        }
    }
}

enum class OptimizerKind { sgd, adam };

inline const char* optimizer_name(OptimizerKind k) {
    return k == OptimizerKind::sgd ? "sgd" : "adam";
}
inline OptimizerKind optimizer_parse(const std::string& s) {
    if (s == "sgd") return OptimizerKind::sgd;
    if (s == "adam") return OptimizerKind::adam;
    throw Error("unknown optimizer '" + s + "'");
}

struct Optimizer {
    OptimizerKind kind = OptimizerKind::sgd;
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    std::int64_t t = 0;
    Gradients m, v;  // adam moments

    static Optimizer make(OptimizerKind kind, const MlpNetwork& net) {
        Optimizer opt;
        opt.kind = kind;
        if (kind == OptimizerKind::adam) {
            opt.m = Gradients::zeros_like(net);
            opt.v = Gradients::zeros_like(net);
        }
        return opt;
    }

    void apply(MlpNetwork& net, const Gradients& grads, double lr) {
        if (kind == OptimizerKind::sgd) {
            for (std::size_t l = 0; l < net.layers.size(); ++l) {
                auto& layer = net.layers[l];
                for (std::size_t i = 0; i < layer.w.size(); ++i) layer.w[i] -= lr * grads.w[l][i];
                for (std::size_t i = 0; i < layer.b.size(); ++i) layer.b[i] -= lr * grads.b[l][i];
            }
            return;
        }
        ++t;
        const double c1 = 1.0 - std::pow(beta1, double(t));
        const double c2 = 1.0 - std::pow(beta2, double(t));
        auto update = [&](std::vector<double>& p, const std::vector<double>& g,
                          std::vector<double>& mm, std::vector<double>& vv) {
            for (std::size_t i = 0; i < p.size(); ++i) {
                mm[i] = beta1 * mm[i] + (1.0 - beta1) * g[i];
                vv[i] = beta2 * vv[i] + (1.0 - beta2) * g[i] * g[i];
                p[i] -= lr * (mm[i] / c1) / (std::sqrt(vv[i] / c2) + eps);
            }
        };
        for (std::size_t l = 0; l < net.layers.size(); ++l) {
            update(net.layers[l].w, grads.w[l], m.w[l], v.w[l]);
            update(net.layers[l].b, grads.b[l], m.b[l], v.b[l]);
        }
    }
};

// One Q-learning regression sample: predict Q(state)[action] towards target.
struct TrainSample {
    std::vector<double> state;
    int action = 0;
    double target = 0.0;
};

// Minibatch squared-error step on the taken-action outputs; targets are held
// fixed. Returns the minibatch loss before the update.
inline double grad_step(MlpNetwork& net, Optimizer& opt, const std::vector<TrainSample>& batch,
                        double lr) {
    if (batch.empty()) return 0.0;
    Gradients grads = Gradients::zeros_like(net);
    double loss = 0.0;
    ForwardCache cache;
    for (const auto& s : batch) {
        const auto q = forward_cached(net, s.state, cache);
        const double err = q[std::size_t(s.action)] - s.target;
        loss += err * err;
        std::vector<double> d_out(q.size(), 0.0);
        d_out[std::size_t(s.action)] = 2.0 * err / double(batch.size());
        backward_accumulate(net, cache, std::move(d_out), grads);
    }
    loss /= double(batch.size());
    if (!std::isfinite(loss)) throw Error("non-finite training loss");
    opt.apply(net, grads, lr);
    return loss;
}

}  // namespace vvo
