#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qbmrl/replay.hpp"
#include "qbmrl/sqa.hpp"
#include "qbmrl/topology.hpp"

namespace qbmrl {

enum class EncodingMode : std::uint8_t { Continuous, Binary };

// Maps physical state/action values onto visible units. Continuous mode is
// the affine map [low, high] -> [-1, +1] per dimension; binary mode emits
// bits_per_dim {-1,+1} values per dimension (plain binary code of the
// quantized level, most significant bit first).
struct EncodingSpec {
    std::vector<double> state_low, state_high;
    std::vector<double> action_low, action_high;
    EncodingMode mode = EncodingMode::Continuous;
    int bits_per_dim = 0;

    int state_dim() const { return static_cast<int>(state_low.size()); }
    int action_dim() const { return static_cast<int>(action_low.size()); }
    int encoded_per_dim() const { return mode == EncodingMode::Binary ? bits_per_dim : 1; }
    int encoded_state_dim() const { return state_dim() * encoded_per_dim(); }
    int encoded_action_dim() const { return action_dim() * encoded_per_dim(); }
};

void validate(const EncodingSpec& spec);

// Ordering: all state components, then all action components. Out-of-bounds
// physical values are clamped; *clamp_count (when given) is bumped per clamp.
std::vector<double> encode_visible(const std::vector<double>& state,
                                   const std::vector<double>& action, const EncodingSpec& spec,
                                   std::uint64_t* clamp_count = nullptr);

// Inverse of the continuous encoding (used by tests and the actor pipeline).
std::vector<double> decode_continuous(const std::vector<double>& encoded,
                                      const std::vector<double>& low,
                                      const std::vector<double>& high);

enum class CriticBackend : std::uint8_t { Sqa, Exact };

// Clamped-QBM Q-function approximator: Q(s, a) = -F(v(s, a)). The exact
// backend enumerates the Boltzmann distribution at gamma_final (only valid
// within the exact_stats bound) and is used for small critics and oracles.
struct QbmCritic {
    IsingProblem problem;  // visible_values are scratch, overwritten per evaluation
    EncodingSpec encoding;
    AnnealParams anneal;
    double learning_rate = 0.01;
    double discount = 0.9;
    CriticBackend backend = CriticBackend::Sqa;
    std::uint64_t clamp_warnings = 0;
};

QbmCritic make_qbm_critic(int rows, int cols, EncodingSpec encoding, AnnealParams anneal,
                          double learning_rate, double discount, CriticBackend backend,
                          std::uint64_t seed);

std::size_t trainable_weight_count(const QbmCritic& critic);

struct QValueResult {
    double q = 0.0;
    SampleStats stats;
    std::vector<double> visible;
};

QValueResult q_value(QbmCritic& critic, const std::vector<double>& state,
                     const std::vector<double>& action, std::uint64_t seed);

struct TdBatchItem {
    Transition transition;
    std::vector<double> next_action;
};

// Eq.-7 temporal-difference update on a mini-batch: per element,
// dQ = r + gamma * Q(s', a') - Q(s, a) (dQ = r - Q(s,a) when terminal), then
// w_ij += alpha * dQ * v_i * <h_j> and w_jk += alpha * dQ * <h_j h_k> using
// the Q(s, a) statistics; increments are batch-averaged before application.
// Q(s', a') comes from `target` when given, else from `critic`, with a seed
// distinct from the Q(s, a) evaluation. Returns mean |dQ| over the batch.
double td_update(QbmCritic& critic, const std::vector<TdBatchItem>& batch, std::uint64_t seed,
                 QbmCritic* target = nullptr);

// Central finite differences of Q in the encoded action coordinates, both
// probes sharing one sampler seed (common random numbers). Probes that would
// leave [-1, 1] fall back to one-sided differences.
std::vector<double> action_gradient(QbmCritic& critic, const std::vector<double>& state,
                                    const std::vector<double>& action, double fd_step,
                                    std::uint64_t seed);

std::string critic_to_json(const QbmCritic& critic);
QbmCritic critic_from_json(const std::string& text);

}  // namespace qbmrl
