#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qbmrl/neural.hpp"
#include "qbmrl/rng.hpp"

using namespace qbmrl;

namespace {

// Independent forward pass: transposed weight walk, per-input accumulation
// order. Used as the dual-implementation oracle.
std::vector<double> forward_reference(const DenseNet& net, std::vector<double> x) {
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        const int in = net.layer_sizes[l];
        const int out = net.layer_sizes[l + 1];
        std::vector<double> acc = net.biases[l];
        for (int i = 0; i < in; ++i)
            for (int o = 0; o < out; ++o)
                acc[static_cast<std::size_t>(o)] +=
                    net.weights[l][static_cast<std::size_t>(o) * in + i] * x[static_cast<std::size_t>(i)];
        for (int o = 0; o < out; ++o) {
            double v = acc[static_cast<std::size_t>(o)];
            switch (net.activations[l]) {
                case Activation::Tanh: v = std::tanh(v); break;
                case Activation::Relu: v = v > 0 ? v : 0; break;
                default: break;
            }
            acc[static_cast<std::size_t>(o)] = v;
        }
        x = std::move(acc);
    }
    if (net.has_output_scale)
        for (std::size_t k = 0; k < x.size(); ++k)
            x[k] = net.out_offset[k] + net.out_halfspan[k] * x[k];
    return x;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

}  // namespace

TEST_CASE("forward: identity weights pass the input through") {
    DenseNet net;
    net.layer_sizes = {3, 3};
    net.activations = {Activation::Identity};
    net.weights = {{1, 0, 0, 0, 1, 0, 0, 0, 1}};
    net.biases = {{0, 0, 0}};
    const std::vector<double> x{0.3, -1.2, 2.5};
    CHECK(forward(net, x) == x);
}

TEST_CASE("forward: single tanh unit with zero parameters outputs zero") {
    DenseNet net;
    net.layer_sizes = {1, 1};
    net.activations = {Activation::Tanh};
    net.weights = {{0.0}};
    net.biases = {{0.0}};
    CHECK(forward(net, {1.7})[0] == 0.0);
}

TEST_CASE("forward matches the independent reimplementation to 1e-12") {
    auto net = make_dense_net({4, 8, 8, 3}, {Activation::Tanh, Activation::Relu, Activation::Identity}, 99);
    set_output_scale(net, {-2, -2, -2}, {2, 2, 2});
    CounterRng rng(5);
    for (int i = 0; i < 20; ++i) {
        std::vector<double> x(4);
        for (auto& v : x) v = rng.next_uniform(-2, 2);
        const auto a = forward(net, x);
        const auto b = forward_reference(net, x);
        for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k] == doctest::Approx(b[k]).epsilon(1e-12));
    }
}

TEST_CASE("backward gradients match central finite differences (3-layer tanh net)") {
    auto net = make_dense_net({3, 6, 5, 2}, {Activation::Tanh, Activation::Tanh, Activation::Tanh}, 7);
    CounterRng rng(13);
    std::vector<double> x(3), upstream(2);
    for (auto& v : x) v = rng.next_uniform(-1, 1);
    for (auto& v : upstream) v = rng.next_uniform(-1, 1);

    const auto result = backward(net, x, upstream);
    const double h = 1e-5;

    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        for (std::size_t i = 0; i < net.weights[l].size(); i += 3) {
            const double saved = net.weights[l][i];
            net.weights[l][i] = saved + h;
            const double up = dot(upstream, forward(net, x));
            net.weights[l][i] = saved - h;
            const double down = dot(upstream, forward(net, x));
            net.weights[l][i] = saved;
            const double fd = (up - down) / (2 * h);
            const double scale = std::max({std::abs(fd), std::abs(result.grads.weights[l][i]), 1e-8});
            CHECK(std::abs(result.grads.weights[l][i] - fd) / scale < 1e-4);
        }
        for (std::size_t i = 0; i < net.biases[l].size(); ++i) {
            const double saved = net.biases[l][i];
            net.biases[l][i] = saved + h;
            const double up = dot(upstream, forward(net, x));
            net.biases[l][i] = saved - h;
            const double down = dot(upstream, forward(net, x));
            net.biases[l][i] = saved;
            const double fd = (up - down) / (2 * h);
            const double scale = std::max({std::abs(fd), std::abs(result.grads.biases[l][i]), 1e-8});
            CHECK(std::abs(result.grads.biases[l][i] - fd) / scale < 1e-4);
        }
    }

    SUBCASE("input gradient matches finite differences too") {
        for (std::size_t i = 0; i < x.size(); ++i) {
            auto xp = x, xm = x;
            xp[i] += h;
            xm[i] -= h;
            const double fd = (dot(upstream, forward(net, xp)) - dot(upstream, forward(net, xm))) / (2 * h);
            CHECK(result.input_grad[i] == doctest::Approx(fd).epsilon(1e-4));
        }
    }
}

TEST_CASE("backward: zero upstream gives zero gradients; parameters untouched") {
    auto net = make_dense_net({2, 4, 2}, {Activation::Relu, Activation::Identity}, 3);
    const auto snapshot = net.weights;
    const auto result = backward(net, {0.5, -0.5}, {0.0, 0.0});
    for (const auto& layer : result.grads.weights)
        for (double g : layer) CHECK(g == 0.0);
    for (double g : result.input_grad) CHECK(g == 0.0);
    CHECK(net.weights == snapshot);
}

TEST_CASE("backward on a linear net is the transpose chain applied to upstream") {
    DenseNet net;
    net.layer_sizes = {2, 2, 2};
    net.activations = {Activation::Identity, Activation::Identity};
    net.weights = {{1, 2, 3, 4}, {0.5, -1, 2, 0.25}};  // row-major W1, W2
    net.biases = {{0, 0}, {0, 0}};
    const std::vector<double> upstream{1.0, -2.0};
    const auto result = backward(net, {0.7, 0.1}, upstream);
    // input_grad = W1^T W2^T upstream
    const std::vector<double> w2t_up{0.5 * 1 + 2 * -2, -1 * 1 + 0.25 * -2};
    const std::vector<double> expect{1 * w2t_up[0] + 3 * w2t_up[1], 2 * w2t_up[0] + 4 * w2t_up[1]};
    CHECK(result.input_grad[0] == doctest::Approx(expect[0]).epsilon(1e-12));
    CHECK(result.input_grad[1] == doctest::Approx(expect[1]).epsilon(1e-12));
}

TEST_CASE("adam: zero gradients leave parameters unchanged") {
    auto net = make_dense_net({2, 3, 1}, {Activation::Tanh, Activation::Identity}, 11);
    const auto snapshot = net.weights;
    auto state = make_adam_state(net, 0.1);
    adam_step(net, zero_gradients(net), state);
    CHECK(net.weights == snapshot);
    CHECK(state.step == 1);
}

TEST_CASE("adam: constant positive gradient moves the parameter down") {
    DenseNet net;
    net.layer_sizes = {1, 1};
    net.activations = {Activation::Identity};
    net.weights = {{1.0}};
    net.biases = {{0.0}};
    auto state = make_adam_state(net, 0.01);
    Gradients g = zero_gradients(net);
    g.weights[0][0] = 2.5;
    for (int i = 0; i < 100; ++i) adam_step(net, g, state);
    CHECK(net.weights[0][0] < 1.0 - 0.5);
}

TEST_CASE("adam: two identical runs give bit-identical parameters; non-finite rejected") {
    auto run = []() {
        auto net = make_dense_net({2, 4, 1}, {Activation::Tanh, Activation::Identity}, 21);
        auto state = make_adam_state(net, 0.05);
        CounterRng rng(9);
        for (int i = 0; i < 50; ++i) {
            Gradients g = zero_gradients(net);
            for (auto& layer : g.weights)
                for (auto& v : layer) v = rng.next_uniform(-1, 1);
            adam_step(net, g, state);
        }
        return net;
    };
    const auto a = run();
    const auto b = run();
    CHECK(a.weights == b.weights);
    CHECK(a.biases == b.biases);

    auto net = run();
    auto state = make_adam_state(net, 0.05);
    Gradients g = zero_gradients(net);
    g.weights[0][0] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(adam_step(net, g, state), std::invalid_argument);
}

TEST_CASE("soft_update blends dense nets") {
    auto online = make_dense_net({2, 3}, {Activation::Identity}, 1);
    auto target = make_dense_net({2, 3}, {Activation::Identity}, 2);

    SUBCASE("tau = 1 copies online") {
        soft_update(target, online, 1.0);
        CHECK(target.weights == online.weights);
    }
    SUBCASE("tau = 0.5 midpoint and geometric contraction with frozen online") {
        DenseNet t = target;
        soft_update(t, online, 0.5);
        for (std::size_t i = 0; i < t.weights[0].size(); ++i)
            CHECK(t.weights[0][i] ==
                  doctest::Approx(0.5 * (target.weights[0][i] + online.weights[0][i])).epsilon(1e-12));
        double gap0 = 0;
        for (std::size_t i = 0; i < t.weights[0].size(); ++i)
            gap0 = std::max(gap0, std::abs(t.weights[0][i] - online.weights[0][i]));
        soft_update(t, online, 0.5);
        double gap1 = 0;
        for (std::size_t i = 0; i < t.weights[0].size(); ++i)
            gap1 = std::max(gap1, std::abs(t.weights[0][i] - online.weights[0][i]));
        CHECK(gap1 <= 0.5 * gap0 + 1e-15);
    }
    SUBCASE("shape mismatch throws") {
        auto other = make_dense_net({2, 4}, {Activation::Identity}, 3);
        CHECK_THROWS_AS(soft_update(other, online, 0.5), std::invalid_argument);
    }
}

TEST_CASE("output scale maps the final tanh onto the action box") {
    auto net = make_dense_net({2, 4, 2}, {Activation::Tanh, Activation::Tanh}, 31);
    set_output_scale(net, {-3, 0}, {3, 10});
    CounterRng rng(4);
    for (int i = 0; i < 50; ++i) {
        const auto y = forward(net, {rng.next_uniform(-5, 5), rng.next_uniform(-5, 5)});
        CHECK(y[0] >= -3.0);
        CHECK(y[0] <= 3.0);
        CHECK(y[1] >= 0.0);
        CHECK(y[1] <= 10.0);
    }
}

TEST_CASE("net JSON round-trips bit-exactly") {
    auto net = make_dense_net({3, 5, 2}, {Activation::Relu, Activation::Tanh}, 77);
    set_output_scale(net, {-1, -1}, {1, 1});
    const auto loaded = net_from_json(net_to_json(net));
    CHECK(loaded.layer_sizes == net.layer_sizes);
    CHECK(loaded.weights == net.weights);
    CHECK(loaded.biases == net.biases);
    CHECK(loaded.out_offset == net.out_offset);
    CHECK(loaded.out_halfspan == net.out_halfspan);
}
