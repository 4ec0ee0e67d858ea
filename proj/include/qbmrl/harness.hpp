#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qbmrl/agents.hpp"
#include "qbmrl/envs.hpp"

namespace qbmrl {

struct EpisodeEval {
    int steps_taken = 0;
    double initial_reward = 0.0;
    double final_reward = 0.0;
    bool solved = false;
};

struct EvalReport {
    std::vector<EpisodeEval> episodes;
    double mean_steps = 0.0, std_steps = 0.0;
    double mean_initial = 0.0, std_initial = 0.0;
    double mean_final = 0.0, std_final = 0.0;
    double solve_rate = 0.0;
    std::map<int, int> step_histogram;
};

bool operator==(const EpisodeEval& a, const EpisodeEval& b);
bool operator==(const EvalReport& a, const EvalReport& b);

using DiscretePolicy = std::function<int(const std::vector<double>&)>;
using ContinuousPolicy = std::function<std::vector<double>(const std::vector<double>&)>;

// Greedy evaluation over n_episodes randomly initialised episodes; per-episode
// seeds derive from `seed`. Solved means the reward objective was met within
// the episode's step budget.
EvalReport evaluate_discrete(const DiscretePolicy& policy, TargetSteering1D& env, int n_episodes,
                             std::uint64_t seed);
EvalReport evaluate_awake(const ContinuousPolicy& policy, AwakeSteering10D& env, int n_episodes,
                          std::uint64_t seed);

// Fraction of grid_points uniformly spaced initial deflections from which the
// greedy policy reaches the objective in exactly optimal_steps() steps.
double optimality(const DiscretePolicy& policy, TargetSteering1D& env, int grid_points);

// First checkpoint interaction count whose policy attains optimality 1.0
// (discrete) or the given evaluation solve rate (continuous); -1 if never.
int interactions_to_optimal(const FerlResult& result, TargetSteering1D& env, int grid_points,
                            std::uint64_t policy_seed);
int interactions_to_optimal(const DqnResult& result, TargetSteering1D& env, int grid_points);
int interactions_to_solve_rate(const std::vector<DenseNet>& actor_checkpoints,
                               const std::vector<int>& checkpoint_interactions,
                               AwakeSteering10D& env, double state_bound, double solve_rate,
                               int n_episodes, std::uint64_t seed);

struct ParamRange {
    double low = 0.0;
    double high = 0.0;
    bool log_scale = false;
};

struct SearchSpace {
    std::map<std::string, ParamRange> ranges;
    int trials = 20;
    int seeds_per_trial = 5;
    int eval_episodes = 100;   // per-seed evaluation budget for scoring
    int optimality_grid = 32;  // discrete-env scoring grid
};

struct TrialOutcome {
    int trial = 0;
    TrainConfig config;
    double median_to_criterion = 0.0;  // +inf when never reached
    double mean_solve_rate = 0.0;
    bool failed = false;
    std::string error;
};

struct SearchResult {
    std::vector<TrialOutcome> ranked;  // best first
};

// Desk-scale random search: samples `trials` configs from the space, trains
// seeds_per_trial agents each, scores by median interactions-to-criterion
// (ties: higher final solve rate). Deterministic in `seed`; trainer failures
// are recorded per trial, not fatal.
SearchResult random_search(const SearchSpace& space, Algo algo, EnvKind env_kind,
                           const TrainConfig& base_config, std::uint64_t seed);

std::string train_config_to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const std::string& text);
std::string search_space_to_json(const SearchSpace& space);
SearchSpace search_space_from_json(const std::string& text);

std::string env_config_to_json(EnvKind kind, const Ts1dConfig& ts1d, const AwakeConfig& awake,
                               const Matrix10* response);

struct RunArtifacts {
    Algo algo;
    EnvKind env_kind;
    TrainConfig train_config;
    Ts1dConfig ts1d_config;
    AwakeConfig awake_config;
    std::optional<Matrix10> response;
    TrainLog log;
    // final weights; exactly one of these is meaningful per algo
    std::optional<QbmCritic> critic;
    std::optional<DenseNet> net;
    std::optional<DenseNet> actor;
};

// Writes config.json, metrics.csv, episodes.csv, checkpoint JSONs and a
// manifest into a fresh directory; refuses to overwrite an existing one.
void run_persist(const std::string& dir, const RunArtifacts& run);
RunArtifacts run_load(const std::string& dir);

// Deterministic greedy policy reconstructed from persisted weights.
DiscretePolicy loaded_discrete_policy(RunArtifacts& run, std::uint64_t policy_seed);
ContinuousPolicy loaded_continuous_policy(const RunArtifacts& run);

void write_eval_csv(const std::string& path, const EvalReport& report);
void write_metrics_csv(const std::string& path, const TrainLog& log);
void write_episodes_csv(const std::string& path, const TrainLog& log);

std::string format_double(double v);  // shortest exact decimal, used in CSVs

}  // namespace qbmrl
