#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "qbmrl/envs.hpp"
#include "qbmrl/neural.hpp"
#include "qbmrl/qbm_critic.hpp"
#include "qbmrl/replay.hpp"

namespace qbmrl {

enum class Algo : std::uint8_t { FerlQ, Dqn, HybridAc, Ddpg };
enum class EnvKind : std::uint8_t { Ts1d, Ts1dBinary, Awake };

std::string to_string(Algo algo);
std::string to_string(EnvKind kind);
Algo algo_from_string(const std::string& s);
EnvKind env_kind_from_string(const std::string& s);

struct TrainConfig {
    double epsilon_initial = 1.0;
    double epsilon_fraction = 0.5;     // fraction of training under epsilon decay
    int max_steps_per_episode = 20;
    double learning_rate = 0.02;       // critic step size
    int batch_size = 8;
    double discount = 0.8;
    double tau = 0.05;                 // target-net soft update factor
    double warmup_random_fraction = 0.0;
    int total_interactions = 100;
    AnnealParams anneal;
    std::uint64_t seed = 1;
    bool replay_enabled = true;
    double exploration_noise_sigma = 0.1;  // continuous actions

    std::size_t replay_capacity = 10000;
    // Offset K applied inside the critic's TD targets (the QBM's -F cannot
    // go below its zero-weight free energy): the critic learns Q + K via
    // r + K(1-gamma) per non-terminal and r + K per terminal transition.
    // Greedy actions and action gradients are unchanged by the shift.
    double critic_value_offset = 0.0;
    int checkpoint_every = 10;
    int chimera_rows = 1;
    int chimera_cols = 2;
    CriticBackend critic_backend = CriticBackend::Sqa;
    std::vector<int> dqn_hidden = {128, 128};
    std::vector<int> actor_hidden = {64, 64};
    std::vector<int> ddpg_critic_hidden = {64, 64};
    double actor_learning_rate = 2e-3;
    double fd_step = 0.01;
    double awake_state_bound = 25.0;   // mm, critic/actor input normalisation
};

void validate(const TrainConfig& config);

// Tuned per-(algo, env) defaults used by the CLI and the acceptance suite.
TrainConfig default_train_config(Algo algo, EnvKind env);

struct InteractionRecord {
    int interaction = 0;
    int episode = 0;
    int step = 0;
    double reward = 0.0;
    double dq_mag = 0.0;
};

struct EpisodeRecord {
    int episode = 0;
    double initial_reward = 0.0;
    double final_reward = 0.0;
    int steps = 0;
};

struct TrainLog {
    std::vector<InteractionRecord> interactions;
    std::vector<EpisodeRecord> episodes;
    std::vector<int> checkpoint_interactions;  // parallel to checkpoint arrays
};

bool operator==(const InteractionRecord& a, const InteractionRecord& b);
bool operator==(const EpisodeRecord& a, const EpisodeRecord& b);
bool operator==(const TrainLog& a, const TrainLog& b);

double epsilon_schedule(double epsilon_initial, double epsilon_fraction, int t, int total);

// With probability epsilon a uniform action, else argmax with lowest-index
// tie-break. q_of is only invoked when the greedy branch is taken.
int epsilon_greedy(const std::function<std::vector<double>(const std::vector<double>&)>& q_of,
                   const std::vector<double>& state, double epsilon, int n_actions,
                   CounterRng& rng);

// Sampler seed that is a pure function of (stream, state bytes): greedy
// policies see identical noise whenever they revisit a state.
std::uint64_t state_seed(std::uint64_t stream, const std::vector<double>& state);

// Affine [low, high] -> [-1, 1] with clamping, for net inputs.
std::vector<double> normalize_state(const std::vector<double>& state,
                                    const std::vector<double>& low,
                                    const std::vector<double>& high);

struct FerlResult {
    QbmCritic critic;
    TrainLog log;
    std::vector<QbmCritic> checkpoints;
};

struct DqnResult {
    DenseNet net;
    TrainLog log;
    std::vector<DenseNet> checkpoints;
};

struct HybridResult {
    DenseNet actor;
    QbmCritic critic;
    TrainLog log;
    std::vector<DenseNet> actor_checkpoints;
};

struct DdpgResult {
    DenseNet actor;
    DenseNet critic;
    TrainLog log;
    std::vector<DenseNet> actor_checkpoints;
};

FerlResult train_ferl_q(TargetSteering1D& env, const TrainConfig& config);
DqnResult train_dqn(TargetSteering1D& env, const TrainConfig& config);
HybridResult train_hybrid_ac(AwakeSteering10D& env, const TrainConfig& config);
DdpgResult train_ddpg(AwakeSteering10D& env, const TrainConfig& config);

// Greedy policies over the trained function approximators.
std::function<int(const std::vector<double>&)> greedy_critic_policy(QbmCritic& critic,
                                                                    std::uint64_t policy_seed);
std::function<int(const std::vector<double>&)> greedy_net_policy(const DenseNet& net,
                                                                 std::vector<double> state_low,
                                                                 std::vector<double> state_high);
std::function<std::vector<double>(const std::vector<double>&)> actor_policy(
    const DenseNet& actor, double state_bound);

}  // namespace qbmrl
