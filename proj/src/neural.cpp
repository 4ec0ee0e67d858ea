#include "qbmrl/neural.hpp"

#include <cmath>
#include <json.hpp>
#include <stdexcept>

#include "qbmrl/rng.hpp"

namespace qbmrl {

namespace {

double activate(Activation a, double x) {
    switch (a) {
        case Activation::Tanh: return std::tanh(x);
        case Activation::Relu: return x > 0.0 ? x : 0.0;
        default: return x;
    }
}

// derivative expressed through the activated value y (tanh) or pre-act x (relu)
double activate_grad(Activation a, double pre, double post) {
    switch (a) {
        case Activation::Tanh: return 1.0 - post * post;
        case Activation::Relu: return pre > 0.0 ? 1.0 : 0.0;
        default: return 1.0;
    }
}

std::string activation_name(Activation a) {
    switch (a) {
        case Activation::Tanh: return "tanh";
        case Activation::Relu: return "relu";
        default: return "identity";
    }
}

Activation activation_from_name(const std::string& s) {
    if (s == "tanh") return Activation::Tanh;
    if (s == "relu") return Activation::Relu;
    if (s == "identity") return Activation::Identity;
    throw std::invalid_argument("unknown activation: " + s);
}

}  // namespace

DenseNet make_dense_net(std::vector<int> layer_sizes, std::vector<Activation> activations,
                        std::uint64_t seed) {
    if (layer_sizes.size() < 2) throw std::invalid_argument("make_dense_net: need >= 2 layers");
    if (activations.size() != layer_sizes.size() - 1)
        throw std::invalid_argument("make_dense_net: one activation per non-input layer");
    DenseNet net;
    net.layer_sizes = std::move(layer_sizes);
    net.activations = std::move(activations);
    CounterRng rng(derive_stream(seed, 0x4E4554ull));
    for (std::size_t l = 0; l + 1 < net.layer_sizes.size(); ++l) {
        const int in = net.layer_sizes[l];
        const int out = net.layer_sizes[l + 1];
        const double scale = 1.0 / std::sqrt(static_cast<double>(in));
        std::vector<double> w(static_cast<std::size_t>(in) * out);
        for (auto& v : w) v = rng.next_uniform(-scale, scale);
        net.weights.push_back(std::move(w));
        net.biases.emplace_back(static_cast<std::size_t>(out), 0.0);
    }
    return net;
}

void set_output_scale(DenseNet& net, const std::vector<double>& low,
                      const std::vector<double>& high) {
    const std::size_t n = static_cast<std::size_t>(net.output_size());
    if (low.size() != n || high.size() != n)
        throw std::invalid_argument("set_output_scale: bound size mismatch");
    net.has_output_scale = true;
    net.out_offset.resize(n);
    net.out_halfspan.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        net.out_offset[k] = 0.5 * (high[k] + low[k]);
        net.out_halfspan[k] = 0.5 * (high[k] - low[k]);
    }
}

std::vector<double> forward(const DenseNet& net, const std::vector<double>& input) {
    if (static_cast<int>(input.size()) != net.input_size())
        throw std::invalid_argument("forward: input size mismatch");
    std::vector<double> cur = input;
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        const int in = net.layer_sizes[l];
        const int out = net.layer_sizes[l + 1];
        std::vector<double> next(static_cast<std::size_t>(out));
        const double* w = net.weights[l].data();
        for (int o = 0; o < out; ++o) {
            double acc = net.biases[l][static_cast<std::size_t>(o)];
            const double* row = w + static_cast<std::size_t>(o) * in;
            for (int i = 0; i < in; ++i) acc += row[i] * cur[static_cast<std::size_t>(i)];
            next[static_cast<std::size_t>(o)] = activate(net.activations[l], acc);
        }
        cur = std::move(next);
    }
    if (net.has_output_scale) {
        for (std::size_t k = 0; k < cur.size(); ++k)
            cur[k] = net.out_offset[k] + net.out_halfspan[k] * cur[k];
    }
    return cur;
}

Gradients zero_gradients(const DenseNet& net) {
    Gradients g;
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        g.weights.emplace_back(net.weights[l].size(), 0.0);
        g.biases.emplace_back(net.biases[l].size(), 0.0);
    }
    return g;
}

void accumulate(Gradients& into, const Gradients& g, double scale) {
    for (std::size_t l = 0; l < into.weights.size(); ++l) {
        for (std::size_t i = 0; i < into.weights[l].size(); ++i)
            into.weights[l][i] += scale * g.weights[l][i];
        for (std::size_t i = 0; i < into.biases[l].size(); ++i)
            into.biases[l][i] += scale * g.biases[l][i];
    }
}

BackwardResult backward(const DenseNet& net, const std::vector<double>& input,
                        const std::vector<double>& upstream) {
    if (static_cast<int>(input.size()) != net.input_size())
        throw std::invalid_argument("backward: input size mismatch");
    if (static_cast<int>(upstream.size()) != net.output_size())
        throw std::invalid_argument("backward: upstream size mismatch");

    const std::size_t n_layers = net.weights.size();
    std::vector<std::vector<double>> pre(n_layers), post(n_layers);
    std::vector<double> cur = input;
    for (std::size_t l = 0; l < n_layers; ++l) {
        const int in = net.layer_sizes[l];
        const int out = net.layer_sizes[l + 1];
        pre[l].resize(static_cast<std::size_t>(out));
        post[l].resize(static_cast<std::size_t>(out));
        const double* w = net.weights[l].data();
        for (int o = 0; o < out; ++o) {
            double acc = net.biases[l][static_cast<std::size_t>(o)];
            const double* row = w + static_cast<std::size_t>(o) * in;
            for (int i = 0; i < in; ++i) acc += row[i] * cur[static_cast<std::size_t>(i)];
            pre[l][static_cast<std::size_t>(o)] = acc;
            post[l][static_cast<std::size_t>(o)] = activate(net.activations[l], acc);
        }
        cur = post[l];
    }

    BackwardResult result;
    result.grads = zero_gradients(net);

    std::vector<double> delta = upstream;
    if (net.has_output_scale) {
        for (std::size_t k = 0; k < delta.size(); ++k) delta[k] *= net.out_halfspan[k];
    }
    for (std::size_t li = n_layers; li-- > 0;) {
        const int in = net.layer_sizes[li];
        const int out = net.layer_sizes[li + 1];
        const std::vector<double>& below = li == 0 ? input : post[li - 1];
        for (int o = 0; o < out; ++o) {
            delta[static_cast<std::size_t>(o)] *=
                activate_grad(net.activations[li], pre[li][static_cast<std::size_t>(o)],
                              post[li][static_cast<std::size_t>(o)]);
        }
        for (int o = 0; o < out; ++o) {
            const double d = delta[static_cast<std::size_t>(o)];
            result.grads.biases[li][static_cast<std::size_t>(o)] = d;
            double* wg = result.grads.weights[li].data() + static_cast<std::size_t>(o) * in;
            for (int i = 0; i < in; ++i) wg[i] = d * below[static_cast<std::size_t>(i)];
        }
        std::vector<double> prev(static_cast<std::size_t>(in), 0.0);
        const double* w = net.weights[li].data();
        for (int o = 0; o < out; ++o) {
            const double d = delta[static_cast<std::size_t>(o)];
            const double* row = w + static_cast<std::size_t>(o) * in;
            for (int i = 0; i < in; ++i) prev[static_cast<std::size_t>(i)] += d * row[i];
        }
        delta = std::move(prev);
    }
    result.input_grad = std::move(delta);
    return result;
}

AdamState make_adam_state(const DenseNet& net, double step_size) {
    AdamState s;
    s.step_size = step_size;
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        s.m_weights.emplace_back(net.weights[l].size(), 0.0);
        s.v_weights.emplace_back(net.weights[l].size(), 0.0);
        s.m_biases.emplace_back(net.biases[l].size(), 0.0);
        s.v_biases.emplace_back(net.biases[l].size(), 0.0);
    }
    return s;
}

void adam_step(DenseNet& net, const Gradients& grads, AdamState& state) {
    for (std::size_t l = 0; l < grads.weights.size(); ++l) {
        for (double g : grads.weights[l])
            if (!std::isfinite(g)) throw std::invalid_argument("adam_step: non-finite gradient");
        for (double g : grads.biases[l])
            if (!std::isfinite(g)) throw std::invalid_argument("adam_step: non-finite gradient");
    }
    state.step += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    auto update = [&](std::vector<double>& p, const std::vector<double>& g, std::vector<double>& m,
                      std::vector<double>& v) {
        for (std::size_t i = 0; i < p.size(); ++i) {
            m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
            v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
            p[i] -= state.step_size * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + state.epsilon);
        }
    };
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        update(net.weights[l], grads.weights[l], state.m_weights[l], state.v_weights[l]);
        update(net.biases[l], grads.biases[l], state.m_biases[l], state.v_biases[l]);
    }
}

void soft_update(DenseNet& target, const DenseNet& online, double tau) {
    if (target.layer_sizes != online.layer_sizes)
        throw std::invalid_argument("soft_update: shape mismatch");
    for (std::size_t l = 0; l < target.weights.size(); ++l) {
        for (std::size_t i = 0; i < target.weights[l].size(); ++i)
            target.weights[l][i] = (1.0 - tau) * target.weights[l][i] + tau * online.weights[l][i];
        for (std::size_t i = 0; i < target.biases[l].size(); ++i)
            target.biases[l][i] = (1.0 - tau) * target.biases[l][i] + tau * online.biases[l][i];
    }
}

std::string net_to_json(const DenseNet& net) {
    nlohmann::json doc;
    doc["schema"] = "qbmrl.net.v1";
    doc["layer_sizes"] = net.layer_sizes;
    auto acts = nlohmann::json::array();
    for (auto a : net.activations) acts.push_back(activation_name(a));
    doc["activations"] = std::move(acts);
    doc["weights"] = net.weights;
    doc["biases"] = net.biases;
    doc["has_output_scale"] = net.has_output_scale;
    if (net.has_output_scale) {
        doc["out_offset"] = net.out_offset;
        doc["out_halfspan"] = net.out_halfspan;
    }
    return doc.dump();
}

DenseNet net_from_json(const std::string& text) {
    const auto doc = nlohmann::json::parse(text);
    if (doc.at("schema").get<std::string>() != "qbmrl.net.v1")
        throw std::invalid_argument("net_from_json: unknown schema");
    DenseNet net;
    net.layer_sizes = doc.at("layer_sizes").get<std::vector<int>>();
    for (const auto& a : doc.at("activations"))
        net.activations.push_back(activation_from_name(a.get<std::string>()));
    net.weights = doc.at("weights").get<std::vector<std::vector<double>>>();
    net.biases = doc.at("biases").get<std::vector<std::vector<double>>>();
    net.has_output_scale = doc.at("has_output_scale").get<bool>();
    if (net.has_output_scale) {
        net.out_offset = doc.at("out_offset").get<std::vector<double>>();
        net.out_halfspan = doc.at("out_halfspan").get<std::vector<double>>();
    }
    return net;
}

}  // namespace qbmrl
