#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "qbmrl/harness.hpp"

using namespace qbmrl;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

// All experiments share one response matrix through a versioned data file.
Matrix10 shared_response_matrix(const std::string& data_dir, std::uint64_t seed) {
    const std::string path = data_dir + "/awake_response_v1.json";
    if (std::filesystem::exists(path)) return response_from_json(read_file(path));
    const auto r = make_response_matrix(seed);
    std::filesystem::create_directories(data_dir);
    write_file(path, response_to_json(r));
    return r;
}

int cmd_train(const std::string& algo_name, const std::string& env_name,
              const std::string& config_path, std::uint64_t seed, const std::string& out_dir,
              const std::string& data_dir) {
    const Algo algo = algo_from_string(algo_name);
    const EnvKind kind = env_kind_from_string(env_name);

    TrainConfig config = config_path.empty() ? default_train_config(algo, kind)
                                             : train_config_from_json(read_file(config_path));
    config.seed = seed;

    RunArtifacts run;
    run.algo = algo;
    run.env_kind = kind;
    run.train_config = config;

    if (kind == EnvKind::Awake) {
        if (algo != Algo::HybridAc && algo != Algo::Ddpg)
            throw std::invalid_argument("awake needs a continuous-action algorithm");
        AwakeConfig env_cfg;
        const auto response = shared_response_matrix(data_dir, env_cfg.response_seed);
        AwakeSteering10D env(env_cfg, response);
        run.awake_config = env_cfg;
        run.response = response;
        if (algo == Algo::HybridAc) {
            auto result = train_hybrid_ac(env, config);
            run.log = result.log;
            run.critic = result.critic;
            run.actor = result.actor;
        } else {
            auto result = train_ddpg(env, config);
            run.log = result.log;
            run.net = result.critic;
            run.actor = result.actor;
        }
    } else {
        if (algo != Algo::FerlQ && algo != Algo::Dqn)
            throw std::invalid_argument("ts1d needs a discrete-action algorithm");
        Ts1dConfig env_cfg;
        if (kind == EnvKind::Ts1dBinary) env_cfg.binary_bits = 4;
        env_cfg.max_steps = config.max_steps_per_episode;
        TargetSteering1D env(env_cfg);
        run.ts1d_config = env_cfg;
        if (algo == Algo::FerlQ) {
            auto result = train_ferl_q(env, config);
            run.log = result.log;
            run.critic = result.critic;
        } else {
            auto result = train_dqn(env, config);
            run.log = result.log;
            run.net = result.net;
        }
    }

    run_persist(out_dir, run);
    std::printf("trained %s on %s for %d interactions (%zu episodes), run written to %s\n",
                algo_name.c_str(), env_name.c_str(), config.total_interactions,
                run.log.episodes.size(), out_dir.c_str());
    return 0;
}

int cmd_evaluate(const std::string& run_dir, int episodes, std::uint64_t seed) {
    auto run = run_load(run_dir);
    EvalReport report;
    if (run.env_kind == EnvKind::Awake) {
        AwakeSteering10D env(run.awake_config, run.response ? *run.response
                                                            : make_response_matrix(run.awake_config.response_seed));
        report = evaluate_awake(loaded_continuous_policy(run), env, episodes, seed);
    } else {
        TargetSteering1D env(run.ts1d_config);
        report = evaluate_discrete(loaded_discrete_policy(run, derive_stream(seed, 0x504Full)), env,
                                   episodes, seed);
    }
    write_eval_csv(run_dir + "/eval.csv", report);
    std::printf("episodes %zu  solve_rate %.4f  steps %.3f +- %.3f  initial %.4f +- %.4f  final %.4f +- %.4f\n",
                report.episodes.size(), report.solve_rate, report.mean_steps, report.std_steps,
                report.mean_initial, report.std_initial, report.mean_final, report.std_final);
    std::printf("eval written to %s/eval.csv\n", run_dir.c_str());
    return 0;
}

int cmd_optimality(const std::string& run_dir, int grid) {
    auto run = run_load(run_dir);
    if (run.env_kind == EnvKind::Awake)
        throw std::invalid_argument("optimality is defined for the discrete envs");
    TargetSteering1D env(run.ts1d_config);
    const double value = optimality(loaded_discrete_policy(run, 0x504Full), env, grid);
    std::printf("optimality %.6f over %d grid points\n", value, grid);
    return 0;
}

int cmd_tune(const std::string& space_path, const std::string& algo_name,
             const std::string& env_name, int budget, std::uint64_t seed,
             const std::string& out_path) {
    const Algo algo = algo_from_string(algo_name);
    const EnvKind kind = env_kind_from_string(env_name);
    SearchSpace space = search_space_from_json(read_file(space_path));
    if (budget > 0) space.trials = budget;
    const TrainConfig base = default_train_config(algo, kind);
    const auto result = random_search(space, algo, kind, base, seed);

    std::printf("rank trial median_to_criterion mean_solve_rate status\n");
    std::ostringstream csv;
    csv << "rank,trial,median_to_criterion,mean_solve_rate,failed,learning_rate,batch_size,"
           "discount,tau,epsilon_initial,epsilon_fraction,beta,gamma_final\n";
    for (std::size_t i = 0; i < result.ranked.size(); ++i) {
        const auto& t = result.ranked[i];
        std::printf("%4zu %5d %19.1f %15.4f %s\n", i, t.trial, t.median_to_criterion,
                    t.mean_solve_rate, t.failed ? t.error.c_str() : "ok");
        csv << i << ',' << t.trial << ',' << format_double(t.median_to_criterion) << ','
            << format_double(t.mean_solve_rate) << ',' << (t.failed ? 1 : 0) << ','
            << format_double(t.config.learning_rate) << ',' << t.config.batch_size << ','
            << format_double(t.config.discount) << ',' << format_double(t.config.tau) << ','
            << format_double(t.config.epsilon_initial) << ','
            << format_double(t.config.epsilon_fraction) << ','
            << format_double(t.config.anneal.beta) << ','
            << format_double(t.config.anneal.gamma_final) << '\n';
    }
    if (!out_path.empty()) {
        write_file(out_path, csv.str());
        std::printf("trial table written to %s\n", out_path.c_str());
    }
    return 0;
}

int check(bool ok, const char* name, int& failures) {
    std::printf("[%s] %s\n", ok ? "PASS" : "FAIL", name);
    if (!ok) ++failures;
    return failures;
}

int cmd_oracle(const std::string& which) {
    int failures = 0;
    if (which == "free-energy") {
        CounterRng rng(0xF3EE);
        bool identity_ok = true;
        for (int i = 0; i < 50 && identity_ok; ++i) {
            const int n = 1 + rng.next_int(4);
            const int nr = 1 + rng.next_int(5);
            std::vector<std::pair<int, int>> edges;
            VisibleMapping mapping;
            mapping.state_dim = 1;
            mapping.action_dim = 0;
            mapping.targets.push_back({});
            for (int j = 0; j < n; ++j) mapping.targets[0].push_back(j);
            for (int j = 0; j < n; ++j)
                for (int k = j + 1; k < n; ++k)
                    if (rng.next_unit() < 0.7) edges.emplace_back(j, k);
            auto p = make_ising_problem(make_graph(n, edges), mapping);
            for (auto& w : p.hidden_weights) w = rng.next_uniform(-1.5, 1.5);
            for (auto& w : p.visible_weights[0]) w = rng.next_uniform(-1.5, 1.5);
            p.visible_values[0] = rng.next_uniform(-1, 1);
            try {
                exact_stats(p, rng.next_uniform(0.5, 5.0), rng.next_uniform(0.2, 3.0), nr);
            } catch (const std::exception&) {
                identity_ok = false;
            }
        }
        check(identity_ok, "free-energy identity <H> - S/beta = -(1/beta) ln Z on 50 instances",
              failures);

        // transfer-matrix closed form for the pure replica ring
        VisibleMapping empty_map;
        auto ring = make_ising_problem(make_graph(1, {}), empty_map);
        const auto stats = exact_stats(ring, 1.0, 1.0, 3);
        const double wp = replica_coupling(1.0, 1.0, 3);
        const double lp = 2 * std::cosh(wp), lm = 2 * std::sinh(wp);
        const double f = -std::log(lp * lp * lp + lm * lm * lm);
        check(std::abs(stats.free_energy - f) < 1e-9, "single-ring transfer-matrix closed form",
              failures);
    } else if (which == "gradient") {
        // dense backprop vs central finite differences
        auto net = make_dense_net({3, 8, 8, 2}, {Activation::Tanh, Activation::Tanh, Activation::Tanh}, 5);
        const std::vector<double> x{0.3, -0.7, 0.2}, up{0.8, -0.4};
        const auto grads = backward(net, x, up);
        bool ok = true;
        const double h = 1e-5;
        for (std::size_t l = 0; l < net.weights.size() && ok; ++l) {
            for (std::size_t i = 0; i < net.weights[l].size(); i += 5) {
                const double saved = net.weights[l][i];
                auto eval = [&]() {
                    const auto y = forward(net, x);
                    return up[0] * y[0] + up[1] * y[1];
                };
                net.weights[l][i] = saved + h;
                const double a = eval();
                net.weights[l][i] = saved - h;
                const double b = eval();
                net.weights[l][i] = saved;
                const double fd = (a - b) / (2 * h);
                const double scale = std::max({std::abs(fd), std::abs(grads.grads.weights[l][i]), 1e-8});
                if (std::abs(grads.grads.weights[l][i] - fd) / scale > 1e-4) ok = false;
            }
        }
        check(ok, "dense backprop matches central differences to 1e-4", failures);

        // critic action gradient vs the analytic single-node ring derivative
        QbmCritic critic;
        VisibleMapping mapping;
        mapping.state_dim = 1;
        mapping.action_dim = 1;
        mapping.targets = {{0}, {0}};
        critic.problem = make_ising_problem(make_graph(1, {}), mapping);
        const double w_s = 0.5, w_a = 0.8, beta = 1.5, gamma = 0.9;
        const int nr = 3;
        critic.problem.visible_weights = {{w_s}, {w_a}};
        critic.encoding.state_low = {-1};
        critic.encoding.state_high = {1};
        critic.encoding.action_low = {-1};
        critic.encoding.action_high = {1};
        critic.anneal.n_replicas = nr;
        critic.anneal.beta = beta;
        critic.anneal.gamma_initial = 3.0;
        critic.anneal.gamma_final = gamma;
        critic.backend = CriticBackend::Exact;
        const double state = 0.3, action = 0.25;
        const auto g = action_gradient(critic, {state}, {action}, 1e-3, 1);

        const double wp = replica_coupling(beta, gamma, nr);
        const double k = beta * wp, hb = beta * (w_s * state + w_a * action) / nr;
        const double root = std::sqrt(std::exp(2 * k) * std::sinh(hb) * std::sinh(hb) + std::exp(-2 * k));
        const double lp = std::exp(k) * std::cosh(hb) + root;
        const double lm = std::exp(k) * std::cosh(hb) - root;
        const double dlp = std::exp(k) * std::sinh(hb) + std::exp(2 * k) * std::sinh(hb) * std::cosh(hb) / root;
        const double dlm = std::exp(k) * std::sinh(hb) - std::exp(2 * k) * std::sinh(hb) * std::cosh(hb) / root;
        const double z = std::pow(lp, nr) + std::pow(lm, nr);
        const double dz = nr * (std::pow(lp, nr - 1) * dlp + std::pow(lm, nr - 1) * dlm);
        const double df_db = -(dz / z) / beta * (beta / nr);
        const double expected = -df_db * w_a;
        check(std::abs(g[0] - expected) / std::abs(expected) < 1e-4,
              "exact-backend action gradient matches the analytic ring derivative", failures);
    } else if (which == "env") {
        TargetSteering1D env;
        bool bfs_ok = true;
        for (double d = -140; d <= 140 && bfs_ok; d += 3.7) {
            env.set_deflection(d);
            const int optimal = env.optimal_steps(d);
            if (!env.episode_active()) {
                bfs_ok = optimal == 0;
                continue;
            }
            int steps = 0;
            bool done = false;
            while (!done && steps < 1000) {
                done = env.step(d > 0 ? 0 : 1).done;
                ++steps;
            }
            if (steps != optimal) bfs_ok = false;
        }
        check(bfs_ok, "BFS optimal step counts are achieved by greedy replay", failures);

        AwakeSteering10D awake;
        bool solve_ok = true;
        for (int e = 0; e < 25 && solve_ok; ++e) {
            awake.reset(static_cast<std::uint64_t>(e));
            const auto u = solve_lower(awake.response(), awake.trajectory());
            std::vector<double> action(10);
            for (int i = 0; i < 10; ++i)
                action[static_cast<std::size_t>(i)] =
                    std::clamp(-u[static_cast<std::size_t>(i)] / awake.config().kick_bound, -1.0, 1.0);
            if (rms(awake.step(action).state) > 1e-9) solve_ok = false;
        }
        check(solve_ok, "linear-solve oracle kick zeroes the trajectory", failures);
        check(condition_number(awake.response()) <= 100.0,
              "shipped response matrix condition number <= 100", failures);
    } else {
        throw std::invalid_argument("unknown oracle check: " + which);
    }
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"free-energy RL with clamped quantum Boltzmann machines on beam-line sims"};
    app.require_subcommand(1);

    std::string algo, env_name, config_path, out_dir, run_dir, space_path, check_name, out_path;
    std::string data_dir = "data";
    std::uint64_t seed = 1;
    int episodes = 500, grid = 64, budget = 0;

    auto* train = app.add_subcommand("train", "train an agent and persist the run");
    train->add_option("--algo", algo, "ferl-q|dqn|hybrid-ac|ddpg")->required();
    train->add_option("--env", env_name, "ts1d|ts1d-binary|awake")->required();
    train->add_option("--config", config_path, "TrainConfig JSON (defaults per algo/env)");
    train->add_option("--seed", seed, "run seed")->required();
    train->add_option("--out", out_dir, "run directory to create")->required();
    train->add_option("--data-dir", data_dir, "shared data files location");

    auto* evaluate = app.add_subcommand("evaluate", "greedy evaluation of a persisted run");
    evaluate->add_option("--run", run_dir)->required();
    evaluate->add_option("--episodes", episodes);
    evaluate->add_option("--seed", seed)->required();

    auto* optimality_cmd = app.add_subcommand("optimality", "optimality metric of a persisted run");
    optimality_cmd->add_option("--run", run_dir)->required();
    optimality_cmd->add_option("--grid", grid);

    auto* tune = app.add_subcommand("tune", "desk-scale random hyperparameter search");
    tune->add_option("--space", space_path, "SearchSpace JSON")->required();
    tune->add_option("--algo", algo)->required();
    tune->add_option("--env", env_name)->required();
    tune->add_option("--budget", budget, "overrides the space's trial count");
    tune->add_option("--seed", seed);
    tune->add_option("--out", out_path, "write the ranked trial table as CSV");

    auto* oracle = app.add_subcommand("oracle", "run module oracles, nonzero exit on failure");
    oracle->add_option("--check", check_name, "free-energy|gradient|env")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (train->parsed()) return cmd_train(algo, env_name, config_path, seed, out_dir, data_dir);
        if (evaluate->parsed()) return cmd_evaluate(run_dir, episodes, seed);
        if (optimality_cmd->parsed()) return cmd_optimality(run_dir, grid);
        if (tune->parsed()) return cmd_tune(space_path, algo, env_name, budget, seed, out_path);
        if (oracle->parsed()) return cmd_oracle(check_name);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
