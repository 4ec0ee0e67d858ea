#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace qbmrl {

enum class Activation : std::uint8_t { Identity, Tanh, Relu };

// Dense feed-forward net. weights[l] is row-major (out x in) for layer l;
// the optional output scale maps a final tanh onto [low, high] per output:
// y_k = offset_k + halfspan_k * z_k.
struct DenseNet {
    std::vector<int> layer_sizes;            // [in, hidden..., out]
    std::vector<Activation> activations;     // one per non-input layer
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;
    bool has_output_scale = false;
    std::vector<double> out_offset;
    std::vector<double> out_halfspan;

    int input_size() const { return layer_sizes.front(); }
    int output_size() const { return layer_sizes.back(); }
};

DenseNet make_dense_net(std::vector<int> layer_sizes, std::vector<Activation> activations,
                        std::uint64_t seed);

void set_output_scale(DenseNet& net, const std::vector<double>& low,
                      const std::vector<double>& high);

std::vector<double> forward(const DenseNet& net, const std::vector<double>& input);

struct Gradients {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;
};

Gradients zero_gradients(const DenseNet& net);
void accumulate(Gradients& into, const Gradients& g, double scale);

struct BackwardResult {
    Gradients grads;
    std::vector<double> input_grad;
};

// Exact reverse-mode gradients of <upstream, output>.
BackwardResult backward(const DenseNet& net, const std::vector<double>& input,
                        const std::vector<double>& upstream);

struct AdamState {
    double step_size = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t step = 0;
    std::vector<std::vector<double>> m_weights, v_weights, m_biases, v_biases;
};

AdamState make_adam_state(const DenseNet& net, double step_size);

// Bias-corrected adaptive-moment descent step; rejects non-finite gradients.
void adam_step(DenseNet& net, const Gradients& grads, AdamState& state);

// target <- (1 - tau) * target + tau * online over all parameters.
void soft_update(DenseNet& target, const DenseNet& online, double tau);

std::string net_to_json(const DenseNet& net);
DenseNet net_from_json(const std::string& text);

}  // namespace qbmrl
