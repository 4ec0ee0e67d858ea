#include "qbmrl/agents.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace qbmrl {

namespace {

// Named seed streams hanging off TrainConfig::seed.
constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kEnvStream = 2;
constexpr std::uint64_t kExploreStream = 3;
constexpr std::uint64_t kReplayStream = 4;
constexpr std::uint64_t kTdStream = 5;
constexpr std::uint64_t kArgmaxStream = 6;
constexpr std::uint64_t kGreedyStream = 7;
constexpr std::uint64_t kActorGradStream = 8;

std::vector<double> action_vec(int action_index) { return {2.0 * action_index - 1.0}; }

// K-shifted reward entering the critic's TD target (learns Q + K).
double shifted_reward(const TrainConfig& config, double reward, bool terminal) {
    return reward + (terminal ? config.critic_value_offset
                              : config.critic_value_offset * (1.0 - config.discount));
}

bool should_checkpoint(const TrainConfig& config, int t) {
    return (t + 1) % config.checkpoint_every == 0 || t + 1 == config.total_interactions;
}

}  // namespace

std::string to_string(Algo algo) {
    switch (algo) {
        case Algo::FerlQ: return "ferl-q";
        case Algo::Dqn: return "dqn";
        case Algo::HybridAc: return "hybrid-ac";
        default: return "ddpg";
    }
}

std::string to_string(EnvKind kind) {
    switch (kind) {
        case EnvKind::Ts1d: return "ts1d";
        case EnvKind::Ts1dBinary: return "ts1d-binary";
        default: return "awake";
    }
}

Algo algo_from_string(const std::string& s) {
    if (s == "ferl-q") return Algo::FerlQ;
    if (s == "dqn") return Algo::Dqn;
    if (s == "hybrid-ac") return Algo::HybridAc;
    if (s == "ddpg") return Algo::Ddpg;
    throw std::invalid_argument("unknown algo: " + s);
}

EnvKind env_kind_from_string(const std::string& s) {
    if (s == "ts1d") return EnvKind::Ts1d;
    if (s == "ts1d-binary") return EnvKind::Ts1dBinary;
    if (s == "awake") return EnvKind::Awake;
    throw std::invalid_argument("unknown env: " + s);
}

void validate(const TrainConfig& config) {
    if (config.epsilon_initial < 0.0 || config.epsilon_initial > 1.0)
        throw std::invalid_argument("TrainConfig: epsilon_initial outside [0, 1]");
    if (!(config.epsilon_fraction > 0.0 && config.epsilon_fraction <= 1.0))
        throw std::invalid_argument("TrainConfig: epsilon_fraction outside (0, 1]");
    if (config.max_steps_per_episode < 1)
        throw std::invalid_argument("TrainConfig: max_steps_per_episode < 1");
    if (!(config.learning_rate > 0.0)) throw std::invalid_argument("TrainConfig: learning_rate <= 0");
    if (config.batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size < 1");
    if (config.discount < 0.0 || config.discount > 1.0)
        throw std::invalid_argument("TrainConfig: discount outside [0, 1]");
    if (!(config.tau > 0.0 && config.tau <= 1.0))
        throw std::invalid_argument("TrainConfig: tau outside (0, 1]");
    if (config.warmup_random_fraction < 0.0 || config.warmup_random_fraction >= 1.0)
        throw std::invalid_argument("TrainConfig: warmup_random_fraction outside [0, 1)");
    if (config.total_interactions < 0)
        throw std::invalid_argument("TrainConfig: total_interactions < 0");
    if (config.exploration_noise_sigma < 0.0)
        throw std::invalid_argument("TrainConfig: exploration_noise_sigma < 0");
    if (config.checkpoint_every < 1) throw std::invalid_argument("TrainConfig: checkpoint_every < 1");
    if (!(config.fd_step > 0.0)) throw std::invalid_argument("TrainConfig: fd_step <= 0");
    validate(config.anneal);
}

TrainConfig default_train_config(Algo algo, EnvKind env) {
    TrainConfig c;
    if (env == EnvKind::Awake) {
        c.max_steps_per_episode = 10;
        c.warmup_random_fraction = 0.2;
        c.discount = 0.5;
        c.tau = 0.1;
        c.batch_size = 16;
        c.exploration_noise_sigma = 0.15;
        c.checkpoint_every = 10;
        if (algo == Algo::HybridAc) {
            c.total_interactions = 100;
            c.chimera_rows = 1;
            c.chimera_cols = 1;
            c.critic_backend = CriticBackend::Exact;
            c.anneal.n_replicas = 2;
            c.anneal.beta = 1.0;
            c.anneal.gamma_initial = 3.0;
            c.anneal.gamma_final = 1.0;
            c.learning_rate = 0.05;
            c.critic_value_offset = 20.0;
            c.actor_learning_rate = 5e-3;
        } else {
            c.total_interactions = 200;
            c.learning_rate = 5e-3;
            c.actor_learning_rate = 2e-3;
        }
        return c;
    }
    // TS1D variants
    if (algo == Algo::FerlQ) {
        c.learning_rate = 0.05;
        c.batch_size = 8;
        c.discount = 0.8;
        c.total_interactions = env == EnvKind::Ts1d ? 100 : 300;
        c.epsilon_initial = 1.0;
        c.epsilon_fraction = 0.6;
        c.anneal.n_replicas = 5;
        c.anneal.beta = 2.0;
        c.anneal.gamma_initial = 3.0;
        c.anneal.gamma_final = 0.5;
        c.anneal.n_sweeps = 100;
        c.anneal.num_reads = 30;
        c.critic_value_offset = 25.0;
        c.checkpoint_every = 10;
    } else {
        c.learning_rate = 2e-3;
        c.batch_size = 32;
        c.discount = 0.9;
        c.tau = 0.05;
        c.total_interactions = env == EnvKind::Ts1d ? 1000 : 600;
        c.epsilon_initial = 1.0;
        c.epsilon_fraction = 0.4;
        c.checkpoint_every = 25;
    }
    return c;
}

bool operator==(const InteractionRecord& a, const InteractionRecord& b) {
    return a.interaction == b.interaction && a.episode == b.episode && a.step == b.step &&
           a.reward == b.reward && a.dq_mag == b.dq_mag;
}

bool operator==(const EpisodeRecord& a, const EpisodeRecord& b) {
    return a.episode == b.episode && a.initial_reward == b.initial_reward &&
           a.final_reward == b.final_reward && a.steps == b.steps;
}

bool operator==(const TrainLog& a, const TrainLog& b) {
    return a.interactions == b.interactions && a.episodes == b.episodes &&
           a.checkpoint_interactions == b.checkpoint_interactions;
}

double epsilon_schedule(double epsilon_initial, double epsilon_fraction, int t, int total) {
    if (total <= 0) return 0.0;
    const double horizon = epsilon_fraction * total;
    return epsilon_initial * std::max(0.0, 1.0 - static_cast<double>(t) / horizon);
}

int epsilon_greedy(const std::function<std::vector<double>(const std::vector<double>&)>& q_of,
                   const std::vector<double>& state, double epsilon, int n_actions,
                   CounterRng& rng) {
    if (n_actions < 1) throw std::invalid_argument("epsilon_greedy: no actions");
    if (epsilon > 0.0 && rng.next_unit() < epsilon) return rng.next_int(n_actions);
    const auto q = q_of(state);
    if (static_cast<int>(q.size()) != n_actions)
        throw std::invalid_argument("epsilon_greedy: q size mismatch");
    std::size_t best = 0;
    for (std::size_t a = 1; a < q.size(); ++a)
        if (q[a] > q[best]) best = a;
    return static_cast<int>(best);
}

std::uint64_t state_seed(std::uint64_t stream, const std::vector<double>& state) {
    std::uint64_t h = 1469598103934665603ull;
    for (double v : state) {
        std::uint64_t bits;
        static_assert(sizeof(bits) == sizeof(v));
        __builtin_memcpy(&bits, &v, sizeof(bits));
        for (int b = 0; b < 8; ++b) {
            h = (h ^ ((bits >> (8 * b)) & 0xFFu)) * 1099511628211ull;
        }
    }
    return derive_stream(stream, h);
}

std::vector<double> normalize_state(const std::vector<double>& state,
                                    const std::vector<double>& low,
                                    const std::vector<double>& high) {
    std::vector<double> out(state.size());
    for (std::size_t i = 0; i < state.size(); ++i) {
        const double x = std::clamp(state[i], low[i], high[i]);
        out[i] = 2.0 * (x - low[i]) / (high[i] - low[i]) - 1.0;
    }
    return out;
}

namespace {

// Episode bookkeeping shared by the discrete-action trainers. Resets that
// already satisfy the reward objective are logged as zero-step episodes.
struct DiscreteLoop {
    TargetSteering1D& env;
    const TrainConfig& config;
    TrainLog& log;
    std::vector<double> state{};
    int episode = 0;
    int step_in_episode = 0;
    double initial_reward = 0.0;

    void start_episode() {
        while (true) {
            state = env.reset(derive_stream(config.seed, kEnvStream, static_cast<std::uint64_t>(episode)));
            initial_reward = env.reward_at(env.deflection());
            step_in_episode = 0;
            if (env.episode_active()) return;
            log.episodes.push_back({episode, initial_reward, initial_reward, 0});
            ++episode;
        }
    }

    void after_step(const StepResult& sr, int t) {
        ++step_in_episode;
        state = sr.state;
        if (sr.done) {
            log.episodes.push_back({episode, initial_reward, sr.reward, step_in_episode});
            ++episode;
            if (t + 1 < config.total_interactions) start_episode();
        }
    }
};

}  // namespace

FerlResult train_ferl_q(TargetSteering1D& env, const TrainConfig& config) {
    validate(config);
    EncodingSpec enc;
    enc.state_low = env.state_low();
    enc.state_high = env.state_high();
    enc.action_low = {-1.0};
    enc.action_high = {1.0};

    FerlResult result{
        make_qbm_critic(config.chimera_rows, config.chimera_cols, enc, config.anneal,
                        config.learning_rate, config.discount, config.critic_backend,
                        derive_stream(config.seed, kInitStream)),
        {},
        {}};
    QbmCritic& critic = result.critic;

    ReplayBuffer buffer(config.replay_capacity);
    CounterRng explore_rng(derive_stream(config.seed, kExploreStream));
    CounterRng replay_rng(derive_stream(config.seed, kReplayStream));
    const std::uint64_t greedy_stream = derive_stream(config.seed, kGreedyStream);

    // Candidate actions share one sampler seed per state (common random
    // numbers), so the argmax is a stable function of the state.
    auto q_of = [&](const std::vector<double>& s) {
        const std::uint64_t seed = state_seed(greedy_stream, s);
        std::vector<double> q(2);
        for (int a = 0; a < 2; ++a) q[static_cast<std::size_t>(a)] = q_value(critic, s, action_vec(a), seed).q;
        return q;
    };

    DiscreteLoop loop{.env = env, .config = config, .log = result.log};
    if (config.total_interactions > 0) loop.start_episode();

    for (int t = 0; t < config.total_interactions; ++t) {
        const double eps = epsilon_schedule(config.epsilon_initial, config.epsilon_fraction, t,
                                            config.total_interactions);
        const int action = epsilon_greedy(q_of, loop.state, eps, env.action_count(), explore_rng);
        const auto sr = env.step(action);
        const bool terminal = sr.reward >= env.config().reward_threshold;
        buffer.push({loop.state, action_vec(action), action, sr.reward, sr.state, terminal});

        std::vector<Transition> batch = config.replay_enabled
                                            ? buffer.sample(static_cast<std::size_t>(config.batch_size), replay_rng)
                                            : std::vector<Transition>{buffer.newest()};
        std::vector<TdBatchItem> items;
        items.reserve(batch.size());
        const std::uint64_t argmax_base = derive_stream(config.seed, kArgmaxStream, static_cast<std::uint64_t>(t));
        for (std::size_t i = 0; i < batch.size(); ++i) {
            TdBatchItem item;
            item.transition = batch[i];
            item.transition.reward = shifted_reward(config, batch[i].reward, batch[i].done);
            if (!batch[i].done) {
                const std::uint64_t seed = derive_stream(argmax_base, i);
                int best = 0;
                double best_q = -std::numeric_limits<double>::infinity();
                for (int a = 0; a < 2; ++a) {
                    const double q = q_value(critic, batch[i].next_state, action_vec(a), seed).q;
                    if (q > best_q) {
                        best_q = q;
                        best = a;
                    }
                }
                item.next_action = action_vec(best);
            }
            items.push_back(std::move(item));
        }
        const double dq = td_update(critic, items, derive_stream(config.seed, kTdStream, static_cast<std::uint64_t>(t)));

        result.log.interactions.push_back({t, loop.episode, loop.step_in_episode, sr.reward, dq});
        loop.after_step(sr, t);
        if (should_checkpoint(config, t)) {
            result.checkpoints.push_back(critic);
            result.log.checkpoint_interactions.push_back(t + 1);
        }
    }
    return result;
}

DqnResult train_dqn(TargetSteering1D& env, const TrainConfig& config) {
    validate(config);
    const auto lo = env.state_low();
    const auto hi = env.state_high();

    std::vector<int> sizes{env.state_dim()};
    for (int h : config.dqn_hidden) sizes.push_back(h);
    sizes.push_back(env.action_count());
    std::vector<Activation> acts(config.dqn_hidden.size(), Activation::Relu);
    acts.push_back(Activation::Identity);

    DqnResult result{make_dense_net(sizes, acts, derive_stream(config.seed, kInitStream)), {}, {}};
    DenseNet& net = result.net;
    DenseNet target = net;
    AdamState adam = make_adam_state(net, config.learning_rate);

    ReplayBuffer buffer(config.replay_capacity);
    CounterRng explore_rng(derive_stream(config.seed, kExploreStream));
    CounterRng replay_rng(derive_stream(config.seed, kReplayStream));

    auto q_of = [&](const std::vector<double>& s) { return forward(net, normalize_state(s, lo, hi)); };

    DiscreteLoop loop{.env = env, .config = config, .log = result.log};
    if (config.total_interactions > 0) loop.start_episode();

    for (int t = 0; t < config.total_interactions; ++t) {
        const double eps = epsilon_schedule(config.epsilon_initial, config.epsilon_fraction, t,
                                            config.total_interactions);
        const int action = epsilon_greedy(q_of, loop.state, eps, env.action_count(), explore_rng);
        const auto sr = env.step(action);
        const bool terminal = sr.reward >= env.config().reward_threshold;
        buffer.push({loop.state, action_vec(action), action, sr.reward, sr.state, terminal});

        std::vector<Transition> batch = config.replay_enabled
                                            ? buffer.sample(static_cast<std::size_t>(config.batch_size), replay_rng)
                                            : std::vector<Transition>{buffer.newest()};
        Gradients grads = zero_gradients(net);
        double dq_mag = 0.0;
        for (const auto& tr : batch) {
            const auto x = normalize_state(tr.state, lo, hi);
            const auto q = forward(net, x);
            double y = tr.reward;
            if (!tr.done) {
                const auto qn = forward(target, normalize_state(tr.next_state, lo, hi));
                y += config.discount * *std::max_element(qn.begin(), qn.end());
            }
            std::vector<double> upstream(q.size(), 0.0);
            const double err = q[static_cast<std::size_t>(tr.action_index)] - y;
            upstream[static_cast<std::size_t>(tr.action_index)] = err / static_cast<double>(batch.size());
            dq_mag += std::abs(err);
            accumulate(grads, backward(net, x, upstream).grads, 1.0);
        }
        adam_step(net, grads, adam);
        soft_update(target, net, config.tau);
        dq_mag /= static_cast<double>(batch.size());

        result.log.interactions.push_back({t, loop.episode, loop.step_in_episode, sr.reward, dq_mag});
        loop.after_step(sr, t);
        if (should_checkpoint(config, t)) {
            result.checkpoints.push_back(net);
            result.log.checkpoint_interactions.push_back(t + 1);
        }
    }
    return result;
}

namespace {

std::vector<double> concat(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out;
    out.reserve(a.size() + b.size());
    out.insert(out.end(), a.begin(), a.end());
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

DenseNet make_actor(const TrainConfig& config, std::uint64_t seed) {
    std::vector<int> sizes{AwakeSteering10D::dim};
    for (int h : config.actor_hidden) sizes.push_back(h);
    sizes.push_back(AwakeSteering10D::dim);
    std::vector<Activation> acts(config.actor_hidden.size() + 1, Activation::Tanh);
    DenseNet actor = make_dense_net(sizes, acts, seed);
    set_output_scale(actor, std::vector<double>(AwakeSteering10D::dim, -1.0),
                     std::vector<double>(AwakeSteering10D::dim, 1.0));
    return actor;
}

// Shared DDPG-style interaction loop; the two algorithms differ only in the
// critic update and in where the action gradient comes from.
template <typename CriticUpdate, typename ActorUpdate, typename CheckpointHook>
TrainLog ddpg_style_loop(AwakeSteering10D& env, const TrainConfig& config, DenseNet& actor,
                         AdamState& actor_adam, CriticUpdate&& critic_update,
                         ActorUpdate&& actor_grad, CheckpointHook&& checkpoint_hook) {
    TrainLog log;
    const std::vector<double> slo(AwakeSteering10D::dim, -config.awake_state_bound);
    const std::vector<double> shi(AwakeSteering10D::dim, config.awake_state_bound);

    DenseNet target_actor = actor;
    ReplayBuffer buffer(config.replay_capacity);
    CounterRng explore_rng(derive_stream(config.seed, kExploreStream));
    CounterRng replay_rng(derive_stream(config.seed, kReplayStream));
    const int warmup_end =
        static_cast<int>(config.warmup_random_fraction * config.total_interactions);

    std::vector<double> state;
    int episode = 0;
    int step_in_episode = 0;
    double initial_reward = 0.0;
    auto start_episode = [&]() {
        state = env.reset(derive_stream(config.seed, kEnvStream, static_cast<std::uint64_t>(episode)));
        initial_reward = env.reward();
        step_in_episode = 0;
    };
    if (config.total_interactions > 0) start_episode();

    for (int t = 0; t < config.total_interactions; ++t) {
        std::vector<double> action(AwakeSteering10D::dim);
        if (t < warmup_end) {
            for (auto& a : action) a = explore_rng.next_uniform(-1.0, 1.0);
        } else {
            action = forward(actor, normalize_state(state, slo, shi));
            for (auto& a : action)
                a = std::clamp(a + config.exploration_noise_sigma * explore_rng.next_gaussian(),
                               -1.0, 1.0);
        }
        const auto sr = env.step(action);
        const bool terminal = -sr.reward <= env.config().rms_objective;
        buffer.push({state, action, -1, sr.reward, sr.state, terminal});

        double dq_mag = 0.0;
        if (t >= warmup_end) {
            const auto batch = buffer.sample(static_cast<std::size_t>(config.batch_size), replay_rng);
            dq_mag = critic_update(batch, target_actor, t);

            Gradients acc = zero_gradients(actor);
            for (std::size_t i = 0; i < batch.size(); ++i) {
                const auto enc_s = normalize_state(batch[i].state, slo, shi);
                const auto a_pi = forward(actor, enc_s);
                std::vector<double> g = actor_grad(batch[i].state, enc_s, a_pi, t, i);
                for (auto& v : g) v = -v / static_cast<double>(batch.size());
                accumulate(acc, backward(actor, enc_s, g).grads, 1.0);
            }
            adam_step(actor, acc, actor_adam);
            soft_update(target_actor, actor, config.tau);
        }

        log.interactions.push_back({t, episode, step_in_episode, sr.reward, dq_mag});
        ++step_in_episode;
        state = sr.state;
        if (sr.done) {
            log.episodes.push_back({episode, initial_reward, sr.reward, step_in_episode});
            ++episode;
            if (t + 1 < config.total_interactions) start_episode();
        }
        if (should_checkpoint(config, t)) {
            checkpoint_hook(t);
            log.checkpoint_interactions.push_back(t + 1);
        }
    }
    return log;
}

}  // namespace

HybridResult train_hybrid_ac(AwakeSteering10D& env, const TrainConfig& config) {
    validate(config);
    EncodingSpec enc;
    enc.state_low.assign(AwakeSteering10D::dim, -config.awake_state_bound);
    enc.state_high.assign(AwakeSteering10D::dim, config.awake_state_bound);
    enc.action_low.assign(AwakeSteering10D::dim, -1.0);
    enc.action_high.assign(AwakeSteering10D::dim, 1.0);

    HybridResult result{make_actor(config, derive_stream(config.seed, kInitStream, 2)),
                        make_qbm_critic(config.chimera_rows, config.chimera_cols, enc,
                                        config.anneal, config.learning_rate, config.discount,
                                        config.critic_backend,
                                        derive_stream(config.seed, kInitStream)),
                        {},
                        {}};
    QbmCritic& critic = result.critic;
    QbmCritic target_critic = critic;
    AdamState actor_adam = make_adam_state(result.actor, config.actor_learning_rate);

    const std::vector<double> slo(AwakeSteering10D::dim, -config.awake_state_bound);
    const std::vector<double> shi(AwakeSteering10D::dim, config.awake_state_bound);

    auto critic_update = [&](const std::vector<Transition>& batch, const DenseNet& target_actor,
                             int t) {
        std::vector<TdBatchItem> items;
        items.reserve(batch.size());
        for (const auto& tr : batch) {
            TdBatchItem item;
            item.transition = tr;
            item.transition.reward = shifted_reward(config, tr.reward, tr.done);
            if (!tr.done) item.next_action = forward(target_actor, normalize_state(tr.next_state, slo, shi));
            items.push_back(std::move(item));
        }
        const double dq = td_update(critic, items, derive_stream(config.seed, kTdStream, static_cast<std::uint64_t>(t)),
                                    &target_critic);
        soft_update_weights(target_critic.problem, critic.problem, config.tau);
        return dq;
    };

    auto actor_grad = [&](const std::vector<double>& raw_state, const std::vector<double>&,
                          const std::vector<double>& a_pi, int t, std::size_t i) {
        // gradient in encoded action coordinates; the action box is already
        // [-1, 1] so encoded and physical coordinates coincide
        return action_gradient(critic, raw_state, a_pi, config.fd_step,
                               derive_stream(derive_stream(config.seed, kActorGradStream, static_cast<std::uint64_t>(t)), i));
    };

    auto checkpoint_hook = [&](int) { result.actor_checkpoints.push_back(result.actor); };

    result.log = ddpg_style_loop(env, config, result.actor, actor_adam, critic_update, actor_grad,
                                 checkpoint_hook);
    return result;
}

DdpgResult train_ddpg(AwakeSteering10D& env, const TrainConfig& config) {
    validate(config);
    std::vector<int> critic_sizes{2 * AwakeSteering10D::dim};
    for (int h : config.ddpg_critic_hidden) critic_sizes.push_back(h);
    critic_sizes.push_back(1);
    std::vector<Activation> critic_acts(config.ddpg_critic_hidden.size(), Activation::Relu);
    critic_acts.push_back(Activation::Identity);

    DdpgResult result{make_actor(config, derive_stream(config.seed, kInitStream, 2)),
                      make_dense_net(critic_sizes, critic_acts, derive_stream(config.seed, kInitStream)),
                      {},
                      {}};
    DenseNet& critic = result.critic;
    DenseNet target_critic = critic;
    AdamState critic_adam = make_adam_state(critic, config.learning_rate);
    AdamState actor_adam = make_adam_state(result.actor, config.actor_learning_rate);

    const std::vector<double> slo(AwakeSteering10D::dim, -config.awake_state_bound);
    const std::vector<double> shi(AwakeSteering10D::dim, config.awake_state_bound);

    auto critic_update = [&](const std::vector<Transition>& batch, const DenseNet& target_actor,
                             int) {
        Gradients grads = zero_gradients(critic);
        double dq_mag = 0.0;
        for (const auto& tr : batch) {
            const auto x = concat(normalize_state(tr.state, slo, shi), tr.action);
            const double q = forward(critic, x)[0];
            double y = shifted_reward(config, tr.reward, tr.done);
            if (!tr.done) {
                const auto enc_next = normalize_state(tr.next_state, slo, shi);
                const auto a_next = forward(target_actor, enc_next);
                y += config.discount * forward(target_critic, concat(enc_next, a_next))[0];
            }
            dq_mag += std::abs(q - y);
            accumulate(grads, backward(critic, x, {(q - y) / static_cast<double>(batch.size())}).grads, 1.0);
        }
        adam_step(critic, grads, critic_adam);
        soft_update(target_critic, critic, config.tau);
        return dq_mag / static_cast<double>(batch.size());
    };

    auto actor_grad = [&](const std::vector<double>&, const std::vector<double>& enc_s,
                          const std::vector<double>& a_pi, int, std::size_t) {
        const auto bw = backward(critic, concat(enc_s, a_pi), {1.0});
        return std::vector<double>(bw.input_grad.begin() + AwakeSteering10D::dim,
                                   bw.input_grad.end());
    };

    auto checkpoint_hook = [&](int) { result.actor_checkpoints.push_back(result.actor); };

    result.log = ddpg_style_loop(env, config, result.actor, actor_adam, critic_update, actor_grad,
                                 checkpoint_hook);
    return result;
}

std::function<int(const std::vector<double>&)> greedy_critic_policy(QbmCritic& critic,
                                                                    std::uint64_t policy_seed) {
    return [&critic, policy_seed](const std::vector<double>& state) {
        const std::uint64_t seed = state_seed(policy_seed, state);
        int best = 0;
        double best_q = q_value(critic, state, action_vec(0), seed).q;
        const double q1 = q_value(critic, state, action_vec(1), seed).q;
        if (q1 > best_q) best = 1;
        return best;
    };
}

std::function<int(const std::vector<double>&)> greedy_net_policy(const DenseNet& net,
                                                                 std::vector<double> state_low,
                                                                 std::vector<double> state_high) {
    return [net, lo = std::move(state_low), hi = std::move(state_high)](const std::vector<double>& state) {
        const auto q = forward(net, normalize_state(state, lo, hi));
        std::size_t best = 0;
        for (std::size_t a = 1; a < q.size(); ++a)
            if (q[a] > q[best]) best = a;
        return static_cast<int>(best);
    };
}

std::function<std::vector<double>(const std::vector<double>&)> actor_policy(const DenseNet& actor,
                                                                            double state_bound) {
    return [actor, state_bound](const std::vector<double>& state) {
        const std::vector<double> lo(state.size(), -state_bound);
        const std::vector<double> hi(state.size(), state_bound);
        return forward(actor, normalize_state(state, lo, hi));
    };
}

}  // namespace qbmrl
