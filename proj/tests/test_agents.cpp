#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qbmrl/agents.hpp"

using namespace qbmrl;

namespace {

TrainConfig fast_ferl_config() {
    TrainConfig c = default_train_config(Algo::FerlQ, EnvKind::Ts1d);
    c.total_interactions = 12;
    c.batch_size = 4;
    c.anneal.num_reads = 5;
    c.anneal.n_sweeps = 20;
    c.checkpoint_every = 6;
    c.seed = 17;
    return c;
}

TrainConfig fast_dqn_config() {
    TrainConfig c = default_train_config(Algo::Dqn, EnvKind::Ts1d);
    c.total_interactions = 25;
    c.dqn_hidden = {16, 16};
    c.checkpoint_every = 10;
    c.seed = 23;
    return c;
}

TrainConfig fast_hybrid_config() {
    TrainConfig c = default_train_config(Algo::HybridAc, EnvKind::Awake);
    c.total_interactions = 12;
    c.batch_size = 4;
    c.checkpoint_every = 6;
    c.seed = 31;
    return c;
}

TrainConfig fast_ddpg_config() {
    TrainConfig c = default_train_config(Algo::Ddpg, EnvKind::Awake);
    c.total_interactions = 20;
    c.batch_size = 4;
    c.ddpg_critic_hidden = {16, 16};
    c.actor_hidden = {16, 16};
    c.checkpoint_every = 10;
    c.seed = 37;
    return c;
}

}  // namespace

TEST_CASE("epsilon_greedy: exploit, explore, tie-break") {
    CounterRng rng(1);
    auto q_of = [](const std::vector<double>&) { return std::vector<double>{0.1, 0.9}; };
    SUBCASE("epsilon 0 takes the argmax") {
        for (int i = 0; i < 20; ++i) CHECK(epsilon_greedy(q_of, {0.0}, 0.0, 2, rng) == 1);
    }
    SUBCASE("epsilon 1 is uniform within 3 sigma over 1e4 draws") {
        int counts[4] = {};
        auto q4 = [](const std::vector<double>&) { return std::vector<double>(4, 0.0); };
        for (int i = 0; i < 10000; ++i) ++counts[epsilon_greedy(q4, {0.0}, 1.0, 4, rng)];
        const double expect = 2500.0, sigma = std::sqrt(10000 * 0.25 * 0.75);
        for (int a = 0; a < 4; ++a) CHECK(std::abs(counts[a] - expect) <= 3 * sigma);
    }
    SUBCASE("exact ties resolve to the lowest index") {
        auto tie = [](const std::vector<double>&) { return std::vector<double>{0.5, 0.5}; };
        CHECK(epsilon_greedy(tie, {0.0}, 0.0, 2, rng) == 0);
    }
}

TEST_CASE("epsilon schedule: linear decay to zero over the configured fraction") {
    const int total = 200;
    CHECK(epsilon_schedule(0.8, 0.5, 0, total) == doctest::Approx(0.8));
    CHECK(epsilon_schedule(0.8, 0.5, 50, total) == doctest::Approx(0.4));
    CHECK(epsilon_schedule(0.8, 0.5, 100, total) == doctest::Approx(0.0));
    CHECK(epsilon_schedule(0.8, 0.5, 200, total) == 0.0);
    CHECK(epsilon_schedule(1.0, 1.0, 100, total) == doctest::Approx(0.5));
}

TEST_CASE("replay buffer: strict FIFO eviction, uniform seeded sampling") {
    ReplayBuffer buffer(5);
    auto tr = [](int i) {
        Transition t;
        t.state = {static_cast<double>(i)};
        t.reward = i;
        return t;
    };
    for (int i = 0; i < 8; ++i) buffer.push(tr(i));  // capacity 5 + 3 extra
    CHECK(buffer.size() == 5);
    for (int i = 0; i < 5; ++i) CHECK(buffer.oldest(static_cast<std::size_t>(i)).reward == 3 + i);
    CHECK(buffer.newest().reward == 7);

    CounterRng rng(2);
    const auto batch = buffer.sample(64, rng);
    CHECK(batch.size() == 64);
    for (const auto& t : batch) {
        CHECK(t.reward >= 3);
        CHECK(t.reward <= 7);
    }
}

TEST_CASE("trainers: zero interactions return untrained agents and empty logs") {
    TargetSteering1D env;
    auto cf = fast_ferl_config();
    cf.total_interactions = 0;
    const auto ferl = train_ferl_q(env, cf);
    CHECK(ferl.log.interactions.empty());
    CHECK(ferl.log.episodes.empty());
    CHECK(ferl.checkpoints.empty());

    auto cd = fast_dqn_config();
    cd.total_interactions = 0;
    const auto dqn = train_dqn(env, cd);
    CHECK(dqn.log.interactions.empty());

    AwakeSteering10D awake;
    auto ch = fast_hybrid_config();
    ch.total_interactions = 0;
    CHECK(train_hybrid_ac(awake, ch).log.interactions.empty());
    auto cg = fast_ddpg_config();
    cg.total_interactions = 0;
    CHECK(train_ddpg(awake, cg).log.interactions.empty());
}

TEST_CASE("trainers are bit-reproducible: identical (env seed, config) -> identical TrainLog") {
    SUBCASE("ferl-q") {
        TargetSteering1D env_a, env_b;
        const auto a = train_ferl_q(env_a, fast_ferl_config());
        const auto b = train_ferl_q(env_b, fast_ferl_config());
        CHECK(a.log == b.log);
        CHECK(a.critic.problem.hidden_weights == b.critic.problem.hidden_weights);
    }
    SUBCASE("dqn") {
        TargetSteering1D env_a, env_b;
        const auto a = train_dqn(env_a, fast_dqn_config());
        const auto b = train_dqn(env_b, fast_dqn_config());
        CHECK(a.log == b.log);
        CHECK(a.net.weights == b.net.weights);
    }
    SUBCASE("hybrid-ac") {
        AwakeSteering10D env_a, env_b;
        const auto a = train_hybrid_ac(env_a, fast_hybrid_config());
        const auto b = train_hybrid_ac(env_b, fast_hybrid_config());
        CHECK(a.log == b.log);
        CHECK(a.actor.weights == b.actor.weights);
        CHECK(a.critic.problem.hidden_weights == b.critic.problem.hidden_weights);
    }
    SUBCASE("ddpg") {
        AwakeSteering10D env_a, env_b;
        const auto a = train_ddpg(env_a, fast_ddpg_config());
        const auto b = train_ddpg(env_b, fast_ddpg_config());
        CHECK(a.log == b.log);
        CHECK(a.actor.weights == b.actor.weights);
    }
}

TEST_CASE("train logs are structurally sound") {
    TargetSteering1D env;
    const auto cfg = fast_ferl_config();
    const auto result = train_ferl_q(env, cfg);
    REQUIRE(result.log.interactions.size() == 12);
    for (std::size_t i = 0; i < result.log.interactions.size(); ++i) {
        CHECK(result.log.interactions[i].interaction == static_cast<int>(i));
        CHECK(result.log.interactions[i].reward >= 0.0);
        CHECK(result.log.interactions[i].reward <= 1.0);
    }
    // monotone interaction counter, append-only episodes
    int prev_episode = 0;
    for (const auto& r : result.log.interactions) {
        CHECK(r.episode >= prev_episode);
        prev_episode = r.episode;
    }
    CHECK(result.checkpoints.size() == result.log.checkpoint_interactions.size());
    CHECK(result.log.checkpoint_interactions == std::vector<int>{6, 12});
}

TEST_CASE("hybrid actor always emits actions within bounds") {
    AwakeSteering10D env;
    const auto result = train_hybrid_ac(env, fast_hybrid_config());
    CounterRng rng(5);
    const auto policy = actor_policy(result.actor, 25.0);
    for (int i = 0; i < 50; ++i) {
        std::vector<double> state(10);
        for (auto& s : state) s = rng.next_uniform(-30, 30);
        for (double a : policy(state)) {
            CHECK(a >= -1.0);
            CHECK(a <= 1.0);
        }
    }
}

TEST_CASE("zero-weight critic yields zero action gradient, so actor updates are no-ops") {
    EncodingSpec enc;
    enc.state_low.assign(10, -25.0);
    enc.state_high.assign(10, 25.0);
    enc.action_low.assign(10, -1.0);
    enc.action_high.assign(10, 1.0);
    AnnealParams anneal;
    anneal.n_replicas = 2;
    anneal.beta = 1.0;
    anneal.gamma_final = 1.0;
    auto critic = make_qbm_critic(1, 1, enc, anneal, 0.05, 0.5, CriticBackend::Exact, 3);
    for (auto& w : critic.problem.hidden_weights) w = 0;
    for (auto& row : critic.problem.visible_weights)
        for (auto& w : row) w = 0;

    auto actor = make_dense_net({10, 16, 10}, {Activation::Tanh, Activation::Tanh}, 9);
    set_output_scale(actor, std::vector<double>(10, -1.0), std::vector<double>(10, 1.0));
    const auto snapshot = actor.weights;
    auto adam = make_adam_state(actor, 1e-2);

    const std::vector<double> state(10, 1.0);
    const auto enc_state = normalize_state(state, enc.state_low, enc.state_high);
    const auto a_pi = forward(actor, enc_state);
    auto g = action_gradient(critic, state, a_pi, 0.01, 7);
    for (double v : g) CHECK(v == 0.0);
    adam_step(actor, backward(actor, enc_state, g).grads, adam);
    CHECK(actor.weights == snapshot);
}

TEST_CASE("greedy policies are pure functions of the state") {
    TargetSteering1D env;
    auto result = train_ferl_q(env, fast_ferl_config());
    auto policy = greedy_critic_policy(result.critic, 99);
    const std::vector<double> state{1.25};
    const int a1 = policy(state);
    const int a2 = policy(state);
    CHECK(a1 == a2);
}

TEST_CASE("algo and env names round-trip") {
    for (Algo a : {Algo::FerlQ, Algo::Dqn, Algo::HybridAc, Algo::Ddpg})
        CHECK(algo_from_string(to_string(a)) == a);
    for (EnvKind e : {EnvKind::Ts1d, EnvKind::Ts1dBinary, EnvKind::Awake})
        CHECK(env_kind_from_string(to_string(e)) == e);
    CHECK_THROWS_AS(algo_from_string("nope"), std::invalid_argument);
}

TEST_CASE("train config validation rejects out-of-range fields") {
    TrainConfig c = fast_dqn_config();
    c.epsilon_initial = 1.5;
    CHECK_THROWS_AS(validate(c), std::invalid_argument);
    c = fast_dqn_config();
    c.epsilon_fraction = 0.0;
    CHECK_THROWS_AS(validate(c), std::invalid_argument);
    c = fast_dqn_config();
    c.tau = 0.0;
    CHECK_THROWS_AS(validate(c), std::invalid_argument);
    c = fast_dqn_config();
    c.warmup_random_fraction = 1.0;
    CHECK_THROWS_AS(validate(c), std::invalid_argument);
}
