#include "qbmrl/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace qbmrl {

namespace {

constexpr std::uint64_t kEvalStream = 0x4556414Cull;
constexpr const char* kCodeVersion = "qbmrl-0.1.0";

void finalize_report(EvalReport& report) {
    const double n = static_cast<double>(report.episodes.size());
    if (report.episodes.empty()) return;
    double ms = 0, mi = 0, mf = 0;
    int solved = 0;
    for (const auto& e : report.episodes) {
        ms += e.steps_taken;
        mi += e.initial_reward;
        mf += e.final_reward;
        solved += e.solved ? 1 : 0;
        report.step_histogram[e.steps_taken] += 1;
    }
    report.mean_steps = ms / n;
    report.mean_initial = mi / n;
    report.mean_final = mf / n;
    report.solve_rate = solved / n;
    double vs = 0, vi = 0, vf = 0;
    for (const auto& e : report.episodes) {
        vs += (e.steps_taken - report.mean_steps) * (e.steps_taken - report.mean_steps);
        vi += (e.initial_reward - report.mean_initial) * (e.initial_reward - report.mean_initial);
        vf += (e.final_reward - report.mean_final) * (e.final_reward - report.mean_final);
    }
    report.std_steps = std::sqrt(vs / n);
    report.std_initial = std::sqrt(vi / n);
    report.std_final = std::sqrt(vf / n);
}

double median(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    if (n % 2 == 1) return v[n / 2];
    return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

nlohmann::json anneal_to_json(const AnnealParams& a) {
    return {{"n_replicas", a.n_replicas},   {"beta", a.beta},
            {"gamma_initial", a.gamma_initial}, {"gamma_final", a.gamma_final},
            {"n_sweeps", a.n_sweeps},       {"num_reads", a.num_reads}};
}

AnnealParams anneal_from_json(const nlohmann::json& j) {
    AnnealParams a;
    a.n_replicas = j.at("n_replicas").get<int>();
    a.beta = j.at("beta").get<double>();
    a.gamma_initial = j.at("gamma_initial").get<double>();
    a.gamma_final = j.at("gamma_final").get<double>();
    a.n_sweeps = j.at("n_sweeps").get<int>();
    a.num_reads = j.at("num_reads").get<int>();
    return a;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

bool operator==(const EpisodeEval& a, const EpisodeEval& b) {
    return a.steps_taken == b.steps_taken && a.initial_reward == b.initial_reward &&
           a.final_reward == b.final_reward && a.solved == b.solved;
}

bool operator==(const EvalReport& a, const EvalReport& b) { return a.episodes == b.episodes; }

std::string format_double(double v) {
    char buf[40];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

EvalReport evaluate_discrete(const DiscretePolicy& policy, TargetSteering1D& env, int n_episodes,
                             std::uint64_t seed) {
    EvalReport report;
    for (int e = 0; e < n_episodes; ++e) {
        std::vector<double> state = env.reset(derive_stream(seed, kEvalStream, static_cast<std::uint64_t>(e)));
        EpisodeEval ev;
        ev.initial_reward = env.reward_at(env.deflection());
        ev.final_reward = ev.initial_reward;
        if (!env.episode_active()) {
            ev.solved = true;
        } else {
            while (env.episode_active()) {
                const auto sr = env.step(policy(state));
                state = sr.state;
                ev.final_reward = sr.reward;
                ++ev.steps_taken;
            }
            ev.solved = ev.final_reward >= env.config().reward_threshold;
        }
        report.episodes.push_back(ev);
    }
    finalize_report(report);
    return report;
}

EvalReport evaluate_awake(const ContinuousPolicy& policy, AwakeSteering10D& env, int n_episodes,
                          std::uint64_t seed) {
    EvalReport report;
    for (int e = 0; e < n_episodes; ++e) {
        std::vector<double> state = env.reset(derive_stream(seed, kEvalStream, static_cast<std::uint64_t>(e)));
        EpisodeEval ev;
        ev.initial_reward = env.reward();
        ev.final_reward = ev.initial_reward;
        while (env.episode_active()) {
            const auto sr = env.step(policy(state));
            state = sr.state;
            ev.final_reward = sr.reward;
            ++ev.steps_taken;
        }
        ev.solved = -ev.final_reward <= env.config().rms_objective;
        report.episodes.push_back(ev);
    }
    finalize_report(report);
    return report;
}

namespace {

// A rollout stops matching the moment it exceeds the BFS count, so it can be
// abandoned there; with early_exit the whole scan stops at the first miss.
double optimality_scan(const DiscretePolicy& policy, TargetSteering1D& env, int grid_points,
                       bool early_exit) {
    if (grid_points < 1) throw std::invalid_argument("optimality: grid_points < 1");
    const auto& cfg = env.config();
    int matches = 0;
    for (int g = 0; g < grid_points; ++g) {
        const double d =
            grid_points == 1
                ? 0.5 * (cfg.deflection_low + cfg.deflection_high)
                : cfg.deflection_low + g * (cfg.deflection_high - cfg.deflection_low) / (grid_points - 1);
        const int optimal = env.optimal_steps(d);
        env.set_deflection(d);
        bool match;
        if (!env.episode_active()) {
            match = optimal == 0;
        } else {
            std::vector<double> state = env.observe();
            int steps = 0;
            bool solved = false;
            while (env.episode_active() && steps < optimal) {
                const auto sr = env.step(policy(state));
                state = sr.state;
                ++steps;
                solved = sr.reward >= cfg.reward_threshold;
            }
            match = solved && steps == optimal;
        }
        if (match) ++matches;
        else if (early_exit) return 0.0;
    }
    return static_cast<double>(matches) / grid_points;
}

}  // namespace

double optimality(const DiscretePolicy& policy, TargetSteering1D& env, int grid_points) {
    return optimality_scan(policy, env, grid_points, false);
}

int interactions_to_optimal(const FerlResult& result, TargetSteering1D& env, int grid_points,
                            std::uint64_t policy_seed) {
    for (std::size_t c = 0; c < result.checkpoints.size(); ++c) {
        QbmCritic critic = result.checkpoints[c];
        if (optimality_scan(greedy_critic_policy(critic, policy_seed), env, grid_points, true) == 1.0)
            return result.log.checkpoint_interactions[c];
    }
    return -1;
}

int interactions_to_optimal(const DqnResult& result, TargetSteering1D& env, int grid_points) {
    for (std::size_t c = 0; c < result.checkpoints.size(); ++c) {
        const auto policy = greedy_net_policy(result.checkpoints[c], env.state_low(), env.state_high());
        if (optimality_scan(policy, env, grid_points, true) == 1.0)
            return result.log.checkpoint_interactions[c];
    }
    return -1;
}

int interactions_to_solve_rate(const std::vector<DenseNet>& actor_checkpoints,
                               const std::vector<int>& checkpoint_interactions,
                               AwakeSteering10D& env, double state_bound, double solve_rate,
                               int n_episodes, std::uint64_t seed) {
    for (std::size_t c = 0; c < actor_checkpoints.size(); ++c) {
        const auto report =
            evaluate_awake(actor_policy(actor_checkpoints[c], state_bound), env, n_episodes, seed);
        if (report.solve_rate >= solve_rate) return checkpoint_interactions[c];
    }
    return -1;
}

namespace {

void apply_param(TrainConfig& config, const std::string& name, double value) {
    if (name == "learning_rate") config.learning_rate = value;
    else if (name == "actor_learning_rate") config.actor_learning_rate = value;
    else if (name == "batch_size") config.batch_size = std::max(1, static_cast<int>(std::lround(value)));
    else if (name == "discount") config.discount = value;
    else if (name == "tau") config.tau = value;
    else if (name == "epsilon_initial") config.epsilon_initial = value;
    else if (name == "epsilon_fraction") config.epsilon_fraction = value;
    else if (name == "max_steps_per_episode") config.max_steps_per_episode = std::max(1, static_cast<int>(std::lround(value)));
    else if (name == "warmup_random_fraction") config.warmup_random_fraction = value;
    else if (name == "exploration_noise_sigma") config.exploration_noise_sigma = value;
    else if (name == "critic_value_offset") config.critic_value_offset = value;
    else if (name == "beta") config.anneal.beta = value;
    else if (name == "gamma_final") {
        config.anneal.gamma_final = value;
        config.anneal.gamma_initial = std::max(config.anneal.gamma_initial, value);
    } else if (name == "num_reads") config.anneal.num_reads = std::max(1, static_cast<int>(std::lround(value)));
    else if (name == "fd_step") config.fd_step = value;
    else throw std::invalid_argument("random_search: unknown hyperparameter " + name);
}

struct TrialScore {
    double to_criterion = std::numeric_limits<double>::infinity();
    double solve_rate = 0.0;
};

TrialScore score_one(Algo algo, EnvKind env_kind, const TrainConfig& config,
                     const SearchSpace& space) {
    TrialScore score;
    if (env_kind == EnvKind::Awake) {
        AwakeSteering10D env;
        AwakeSteering10D eval_env;
        const std::uint64_t eval_seed = derive_stream(config.seed, 0x45u);
        if (algo == Algo::HybridAc) {
            const auto result = train_hybrid_ac(env, config);
            const int n = interactions_to_solve_rate(result.actor_checkpoints,
                                                     result.log.checkpoint_interactions, eval_env,
                                                     config.awake_state_bound, 0.95,
                                                     space.eval_episodes, eval_seed);
            if (n >= 0) score.to_criterion = n;
            if (!result.actor_checkpoints.empty())
                score.solve_rate = evaluate_awake(actor_policy(result.actor_checkpoints.back(),
                                                               config.awake_state_bound),
                                                  eval_env, space.eval_episodes, eval_seed)
                                       .solve_rate;
        } else if (algo == Algo::Ddpg) {
            const auto result = train_ddpg(env, config);
            const int n = interactions_to_solve_rate(result.actor_checkpoints,
                                                     result.log.checkpoint_interactions, eval_env,
                                                     config.awake_state_bound, 0.95,
                                                     space.eval_episodes, eval_seed);
            if (n >= 0) score.to_criterion = n;
            if (!result.actor_checkpoints.empty())
                score.solve_rate = evaluate_awake(actor_policy(result.actor_checkpoints.back(),
                                                               config.awake_state_bound),
                                                  eval_env, space.eval_episodes, eval_seed)
                                       .solve_rate;
        } else {
            throw std::invalid_argument("random_search: discrete algo on continuous env");
        }
        return score;
    }

    Ts1dConfig env_cfg;
    if (env_kind == EnvKind::Ts1dBinary) env_cfg.binary_bits = 4;
    env_cfg.max_steps = config.max_steps_per_episode;
    TargetSteering1D env(env_cfg);
    TargetSteering1D eval_env(env_cfg);
    if (algo == Algo::FerlQ) {
        const auto result = train_ferl_q(env, config);
        const int n = interactions_to_optimal(result, eval_env, space.optimality_grid,
                                              derive_stream(config.seed, 0x50u));
        if (n >= 0) score.to_criterion = n;
        if (!result.checkpoints.empty()) {
            QbmCritic critic = result.checkpoints.back();
            score.solve_rate = optimality(greedy_critic_policy(critic, derive_stream(config.seed, 0x50u)),
                                          eval_env, space.optimality_grid);
        }
    } else if (algo == Algo::Dqn) {
        const auto result = train_dqn(env, config);
        const int n = interactions_to_optimal(result, eval_env, space.optimality_grid);
        if (n >= 0) score.to_criterion = n;
        if (!result.checkpoints.empty())
            score.solve_rate = optimality(greedy_net_policy(result.checkpoints.back(), eval_env.state_low(),
                                                            eval_env.state_high()),
                                          eval_env, space.optimality_grid);
    } else {
        throw std::invalid_argument("random_search: continuous algo on discrete env");
    }
    return score;
}

}  // namespace

SearchResult random_search(const SearchSpace& space, Algo algo, EnvKind env_kind,
                           const TrainConfig& base_config, std::uint64_t seed) {
    if (space.trials < 1) throw std::invalid_argument("random_search: trials < 1");
    if (space.seeds_per_trial < 1) throw std::invalid_argument("random_search: seeds_per_trial < 1");
    for (const auto& [name, range] : space.ranges) {
        if (!(range.low < range.high))
            throw std::invalid_argument("random_search: degenerate range for " + name);
        if (range.log_scale && !(range.low > 0.0))
            throw std::invalid_argument("random_search: log range must be positive for " + name);
    }

    SearchResult result;
    for (int trial = 0; trial < space.trials; ++trial) {
        TrialOutcome outcome;
        outcome.trial = trial;
        outcome.config = base_config;
        CounterRng rng(derive_stream(seed, 0x545249414Cull, static_cast<std::uint64_t>(trial)));
        for (const auto& [name, range] : space.ranges) {
            const double v = range.log_scale
                                 ? std::exp(rng.next_uniform(std::log(range.low), std::log(range.high)))
                                 : rng.next_uniform(range.low, range.high);
            apply_param(outcome.config, name, v);
        }
        std::vector<double> to_criterion;
        double solve_acc = 0.0;
        try {
            for (int k = 0; k < space.seeds_per_trial; ++k) {
                TrainConfig config = outcome.config;
                config.seed = derive_stream(seed, 0x5345454453ull, static_cast<std::uint64_t>(trial) * 1000 + k);
                const auto score = score_one(algo, env_kind, config, space);
                to_criterion.push_back(score.to_criterion);
                solve_acc += score.solve_rate;
            }
            outcome.median_to_criterion = median(to_criterion);
            outcome.mean_solve_rate = solve_acc / space.seeds_per_trial;
        } catch (const std::exception& e) {
            outcome.failed = true;
            outcome.error = e.what();
            outcome.median_to_criterion = std::numeric_limits<double>::infinity();
            outcome.mean_solve_rate = -1.0;
        }
        result.ranked.push_back(std::move(outcome));
    }

    std::stable_sort(result.ranked.begin(), result.ranked.end(),
                     [](const TrialOutcome& a, const TrialOutcome& b) {
                         if (a.failed != b.failed) return !a.failed;
                         if (a.median_to_criterion != b.median_to_criterion)
                             return a.median_to_criterion < b.median_to_criterion;
                         if (a.mean_solve_rate != b.mean_solve_rate)
                             return a.mean_solve_rate > b.mean_solve_rate;
                         return a.trial < b.trial;
                     });
    return result;
}

std::string train_config_to_json(const TrainConfig& c) {
    nlohmann::json j;
    j["schema"] = "qbmrl.train_config.v1";
    j["epsilon_initial"] = c.epsilon_initial;
    j["epsilon_fraction"] = c.epsilon_fraction;
    j["max_steps_per_episode"] = c.max_steps_per_episode;
    j["learning_rate"] = c.learning_rate;
    j["batch_size"] = c.batch_size;
    j["discount"] = c.discount;
    j["tau"] = c.tau;
    j["warmup_random_fraction"] = c.warmup_random_fraction;
    j["total_interactions"] = c.total_interactions;
    j["anneal"] = anneal_to_json(c.anneal);
    j["seed"] = c.seed;
    j["replay_enabled"] = c.replay_enabled;
    j["exploration_noise_sigma"] = c.exploration_noise_sigma;
    j["replay_capacity"] = c.replay_capacity;
    j["critic_value_offset"] = c.critic_value_offset;
    j["checkpoint_every"] = c.checkpoint_every;
    j["chimera_rows"] = c.chimera_rows;
    j["chimera_cols"] = c.chimera_cols;
    j["critic_backend"] = c.critic_backend == CriticBackend::Exact ? "exact" : "sqa";
    j["dqn_hidden"] = c.dqn_hidden;
    j["actor_hidden"] = c.actor_hidden;
    j["ddpg_critic_hidden"] = c.ddpg_critic_hidden;
    j["actor_learning_rate"] = c.actor_learning_rate;
    j["fd_step"] = c.fd_step;
    j["awake_state_bound"] = c.awake_state_bound;
    return j.dump(2);
}

TrainConfig train_config_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    if (j.at("schema").get<std::string>() != "qbmrl.train_config.v1")
        throw std::invalid_argument("train_config_from_json: unknown schema");
    TrainConfig c;
    c.epsilon_initial = j.at("epsilon_initial").get<double>();
    c.epsilon_fraction = j.at("epsilon_fraction").get<double>();
    c.max_steps_per_episode = j.at("max_steps_per_episode").get<int>();
    c.learning_rate = j.at("learning_rate").get<double>();
    c.batch_size = j.at("batch_size").get<int>();
    c.discount = j.at("discount").get<double>();
    c.tau = j.at("tau").get<double>();
    c.warmup_random_fraction = j.at("warmup_random_fraction").get<double>();
    c.total_interactions = j.at("total_interactions").get<int>();
    c.anneal = anneal_from_json(j.at("anneal"));
    c.seed = j.at("seed").get<std::uint64_t>();
    c.replay_enabled = j.at("replay_enabled").get<bool>();
    c.exploration_noise_sigma = j.at("exploration_noise_sigma").get<double>();
    c.replay_capacity = j.at("replay_capacity").get<std::size_t>();
    c.critic_value_offset = j.at("critic_value_offset").get<double>();
    c.checkpoint_every = j.at("checkpoint_every").get<int>();
    c.chimera_rows = j.at("chimera_rows").get<int>();
    c.chimera_cols = j.at("chimera_cols").get<int>();
    c.critic_backend = j.at("critic_backend").get<std::string>() == "exact" ? CriticBackend::Exact
                                                                            : CriticBackend::Sqa;
    c.dqn_hidden = j.at("dqn_hidden").get<std::vector<int>>();
    c.actor_hidden = j.at("actor_hidden").get<std::vector<int>>();
    c.ddpg_critic_hidden = j.at("ddpg_critic_hidden").get<std::vector<int>>();
    c.actor_learning_rate = j.at("actor_learning_rate").get<double>();
    c.fd_step = j.at("fd_step").get<double>();
    c.awake_state_bound = j.at("awake_state_bound").get<double>();
    return c;
}

std::string search_space_to_json(const SearchSpace& space) {
    nlohmann::json j;
    j["schema"] = "qbmrl.search_space.v1";
    j["trials"] = space.trials;
    j["seeds_per_trial"] = space.seeds_per_trial;
    j["eval_episodes"] = space.eval_episodes;
    j["optimality_grid"] = space.optimality_grid;
    nlohmann::json ranges;
    for (const auto& [name, r] : space.ranges)
        ranges[name] = {{"low", r.low}, {"high", r.high}, {"log_scale", r.log_scale}};
    j["ranges"] = std::move(ranges);
    return j.dump(2);
}

SearchSpace search_space_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    if (j.at("schema").get<std::string>() != "qbmrl.search_space.v1")
        throw std::invalid_argument("search_space_from_json: unknown schema");
    SearchSpace s;
    s.trials = j.at("trials").get<int>();
    s.seeds_per_trial = j.at("seeds_per_trial").get<int>();
    if (j.contains("eval_episodes")) s.eval_episodes = j.at("eval_episodes").get<int>();
    if (j.contains("optimality_grid")) s.optimality_grid = j.at("optimality_grid").get<int>();
    for (const auto& [name, r] : j.at("ranges").items()) {
        s.ranges[name] = ParamRange{r.at("low").get<double>(), r.at("high").get<double>(),
                                    r.at("log_scale").get<bool>()};
    }
    return s;
}

namespace {

nlohmann::json ts1d_config_to_json(const Ts1dConfig& c) {
    nlohmann::json j;
    j["deflection_low"] = c.deflection_low;
    j["deflection_high"] = c.deflection_high;
    j["action_delta"] = c.action_delta;
    j["bpm_gain"] = c.bpm_gain;
    j["target_gain"] = c.target_gain;
    j["target_offset"] = c.target_offset;
    j["beam_sigma"] = c.beam_sigma;
    j["target_half_width"] = c.target_half_width;
    j["reward_threshold"] = c.reward_threshold;
    j["max_steps"] = c.max_steps;
    j["binary_bits"] = c.binary_bits;
    return j;
}

Ts1dConfig ts1d_config_from_json(const nlohmann::json& j) {
    Ts1dConfig c;
    c.deflection_low = j.at("deflection_low").get<double>();
    c.deflection_high = j.at("deflection_high").get<double>();
    c.action_delta = j.at("action_delta").get<double>();
    c.bpm_gain = j.at("bpm_gain").get<double>();
    c.target_gain = j.at("target_gain").get<double>();
    c.target_offset = j.at("target_offset").get<double>();
    c.beam_sigma = j.at("beam_sigma").get<double>();
    c.target_half_width = j.at("target_half_width").get<double>();
    c.reward_threshold = j.at("reward_threshold").get<double>();
    c.max_steps = j.at("max_steps").get<int>();
    c.binary_bits = j.at("binary_bits").get<int>();
    return c;
}

nlohmann::json awake_config_to_json(const AwakeConfig& c) {
    nlohmann::json j;
    j["kick_bound"] = c.kick_bound;
    j["rms_objective"] = c.rms_objective;
    j["max_steps"] = c.max_steps;
    j["init_rms_low"] = c.init_rms_low;
    j["init_rms_high"] = c.init_rms_high;
    j["response_seed"] = c.response_seed;
    return j;
}

AwakeConfig awake_config_from_json(const nlohmann::json& j) {
    AwakeConfig c;
    c.kick_bound = j.at("kick_bound").get<double>();
    c.rms_objective = j.at("rms_objective").get<double>();
    c.max_steps = j.at("max_steps").get<int>();
    c.init_rms_low = j.at("init_rms_low").get<double>();
    c.init_rms_high = j.at("init_rms_high").get<double>();
    c.response_seed = j.at("response_seed").get<std::uint64_t>();
    return c;
}

}  // namespace

std::string env_config_to_json(EnvKind kind, const Ts1dConfig& ts1d, const AwakeConfig& awake,
                               const Matrix10* response) {
    nlohmann::json j;
    j["schema"] = "qbmrl.env.v1";
    j["type"] = to_string(kind);
    if (kind == EnvKind::Awake) {
        j["awake"] = awake_config_to_json(awake);
        if (response) j["response"] = nlohmann::json::parse(response_to_json(*response));
    } else {
        j["ts1d"] = ts1d_config_to_json(ts1d);
    }
    return j.dump(2);
}

void run_persist(const std::string& dir, const RunArtifacts& run) {
    namespace fs = std::filesystem;
    if (fs::exists(dir)) throw std::runtime_error("run_persist: refusing to overwrite " + dir);
    fs::create_directories(dir);

    std::vector<std::string> files;
    nlohmann::json config;
    config["schema"] = "qbmrl.run_config.v1";
    config["algo"] = to_string(run.algo);
    config["env"] = to_string(run.env_kind);
    config["train_config"] = nlohmann::json::parse(train_config_to_json(run.train_config));
    config["env_config"] = nlohmann::json::parse(
        env_config_to_json(run.env_kind, run.ts1d_config, run.awake_config,
                           run.response ? &*run.response : nullptr));
    write_text_file(dir + "/config.json", config.dump(2));
    files.push_back("config.json");

    write_metrics_csv(dir + "/metrics.csv", run.log);
    files.push_back("metrics.csv");
    write_episodes_csv(dir + "/episodes.csv", run.log);
    files.push_back("episodes.csv");

    if (run.critic) {
        write_text_file(dir + "/checkpoint_critic.json", critic_to_json(*run.critic));
        files.push_back("checkpoint_critic.json");
    }
    if (run.net) {
        write_text_file(dir + "/checkpoint_net.json", net_to_json(*run.net));
        files.push_back("checkpoint_net.json");
    }
    if (run.actor) {
        write_text_file(dir + "/checkpoint_actor.json", net_to_json(*run.actor));
        files.push_back("checkpoint_actor.json");
    }

    nlohmann::json manifest;
    manifest["schema"] = "qbmrl.run.v1";
    manifest["code_version"] = kCodeVersion;
    manifest["seed"] = run.train_config.seed;
    manifest["files"] = files;
    write_text_file(dir + "/manifest.json", manifest.dump(2));
}

RunArtifacts run_load(const std::string& dir) {
    const auto config = nlohmann::json::parse(read_text_file(dir + "/config.json"));
    if (config.at("schema").get<std::string>() != "qbmrl.run_config.v1")
        throw std::invalid_argument("run_load: unknown config schema");
    RunArtifacts run;
    run.algo = algo_from_string(config.at("algo").get<std::string>());
    run.env_kind = env_kind_from_string(config.at("env").get<std::string>());
    run.train_config = train_config_from_json(config.at("train_config").dump());
    const auto& env_config = config.at("env_config");
    if (run.env_kind == EnvKind::Awake) {
        run.awake_config = awake_config_from_json(env_config.at("awake"));
        if (env_config.contains("response"))
            run.response = response_from_json(env_config.at("response").dump());
    } else {
        run.ts1d_config = ts1d_config_from_json(env_config.at("ts1d"));
    }
    namespace fs = std::filesystem;
    if (fs::exists(dir + "/checkpoint_critic.json"))
        run.critic = critic_from_json(read_text_file(dir + "/checkpoint_critic.json"));
    if (fs::exists(dir + "/checkpoint_net.json"))
        run.net = net_from_json(read_text_file(dir + "/checkpoint_net.json"));
    if (fs::exists(dir + "/checkpoint_actor.json"))
        run.actor = net_from_json(read_text_file(dir + "/checkpoint_actor.json"));
    return run;
}

DiscretePolicy loaded_discrete_policy(RunArtifacts& run, std::uint64_t policy_seed) {
    if (run.env_kind == EnvKind::Awake)
        throw std::invalid_argument("loaded_discrete_policy: run is continuous");
    if (run.critic) return greedy_critic_policy(*run.critic, policy_seed);
    if (run.net) {
        TargetSteering1D env(run.ts1d_config);
        return greedy_net_policy(*run.net, env.state_low(), env.state_high());
    }
    throw std::invalid_argument("loaded_discrete_policy: no checkpoint in run");
}

ContinuousPolicy loaded_continuous_policy(const RunArtifacts& run) {
    if (run.env_kind != EnvKind::Awake)
        throw std::invalid_argument("loaded_continuous_policy: run is discrete");
    if (!run.actor) throw std::invalid_argument("loaded_continuous_policy: no actor in run");
    return actor_policy(*run.actor, run.train_config.awake_state_bound);
}

void write_eval_csv(const std::string& path, const EvalReport& report) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "episode,steps_taken,initial_reward,final_reward,solved\n";
    for (std::size_t e = 0; e < report.episodes.size(); ++e) {
        const auto& ev = report.episodes[e];
        out << e << ',' << ev.steps_taken << ',' << format_double(ev.initial_reward) << ','
            << format_double(ev.final_reward) << ',' << (ev.solved ? 1 : 0) << '\n';
    }
}

void write_metrics_csv(const std::string& path, const TrainLog& log) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "interaction,episode,step,reward,dq_mag\n";
    for (const auto& r : log.interactions) {
        out << r.interaction << ',' << r.episode << ',' << r.step << ','
            << format_double(r.reward) << ',' << format_double(r.dq_mag) << '\n';
    }
}

void write_episodes_csv(const std::string& path, const TrainLog& log) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "episode,initial_reward,final_reward,steps\n";
    for (const auto& r : log.episodes) {
        out << r.episode << ',' << format_double(r.initial_reward) << ','
            << format_double(r.final_reward) << ',' << r.steps << '\n';
    }
}

}  // namespace qbmrl
