#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qbmrl/envs.hpp"
#include "qbmrl/rng.hpp"

using namespace qbmrl;

namespace {

// Simpson quadrature of the Gaussian density over the target, normalised to
// the 3-sigma beam fraction: the independent reward oracle.
double reward_oracle(const Ts1dConfig& cfg, double deflection) {
    const double mu = cfg.target_gain * deflection + cfg.target_offset;
    const double s = cfg.beam_sigma;
    const double lo = -cfg.target_half_width, hi = cfg.target_half_width;
    const int n = 4000;
    const double h = (hi - lo) / n;
    double acc = 0.0;
    auto density = [&](double x) {
        const double z = (x - mu) / s;
        return std::exp(-0.5 * z * z) / (s * std::sqrt(2 * 3.14159265358979323846));
    };
    for (int i = 0; i <= n; ++i) {
        const double w = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        acc += w * density(lo + i * h);
    }
    acc *= h / 3.0;
    const double renorm = acc / 0.99730020393673981;
    return std::min(1.0, std::max(0.0, renorm));
}

}  // namespace

TEST_CASE("ts1d reset: deterministic, uniform, bounded") {
    TargetSteering1D env;
    const auto a = env.reset(42);
    const double d1 = env.deflection();
    env.reset(43);
    env.reset(42);
    CHECK(env.deflection() == d1);
    CHECK(env.reset(42) == a);

    // decile uniformity over many resets, 3-sigma band per bin
    const int n = 10000;
    int bins[10] = {};
    for (int i = 0; i < n; ++i) {
        env.reset(static_cast<std::uint64_t>(i));
        const double frac = (env.deflection() + 140.0) / 280.0;
        int b = static_cast<int>(frac * 10);
        if (b > 9) b = 9;
        ++bins[b];
        CHECK(env.deflection() >= -140.0);
        CHECK(env.deflection() <= 140.0);
    }
    const double expect = n / 10.0;
    const double sigma = std::sqrt(n * 0.1 * 0.9);
    for (int b = 0; b < 10; ++b) CHECK(std::abs(bins[b] - expect) <= 3 * sigma);

    // state bounds are the affine image of the deflection bounds
    CHECK(env.state_low()[0] == doctest::Approx(-140.0 * env.config().bpm_gain));
    CHECK(env.state_high()[0] == doctest::Approx(140.0 * env.config().bpm_gain));
}

TEST_CASE("ts1d reward edge cases") {
    TargetSteering1D env;
    const auto& cfg = env.config();

    SUBCASE("beam centre 6 sigma outside the target is dark") {
        const double mu_needed = cfg.target_half_width + 6.0 * cfg.beam_sigma;
        const double d = mu_needed / cfg.target_gain;
        CHECK(env.reward_at(d) < 1e-8);
    }
    SUBCASE("centred beam on a wide target scores exactly 1") {
        Ts1dConfig wide = cfg;
        wide.target_half_width = 10.0 * wide.beam_sigma;
        TargetSteering1D wide_env(wide);
        CHECK(wide_env.reward_at(0.0) == 1.0);
    }
    SUBCASE("beam centred exactly at the target edge of a wide target: 0.5 / 0.9973") {
        Ts1dConfig wide = cfg;
        wide.target_half_width = 20.0 * wide.beam_sigma;
        TargetSteering1D wide_env(wide);
        const double d = wide.target_half_width / wide.target_gain;  // mu = half width
        CHECK(std::abs(wide_env.reward_at(d) - 0.501353552346927747) < 1e-3);
        CHECK(wide_env.reward_at(d) == doctest::Approx(reward_oracle(wide, d)).epsilon(1e-6));
    }
    SUBCASE("reward matches the quadrature oracle across the range") {
        for (double d = -140.0; d <= 140.0; d += 7.0)
            CHECK(env.reward_at(d) == doctest::Approx(reward_oracle(cfg, d)).epsilon(1e-6));
    }
    SUBCASE("reward is symmetric about the target centre") {
        for (double d = 0.0; d <= 140.0; d += 5.0)
            CHECK(env.reward_at(d) == doctest::Approx(env.reward_at(-d)).epsilon(1e-12));
    }
}

TEST_CASE("ts1d step dynamics: clamped deflection, termination rules") {
    TargetSteering1D env;
    env.set_deflection(-135.0);
    REQUIRE(env.episode_active());
    const auto sr = env.step(0);  // decrease, clamps at -140
    CHECK(env.deflection() == -140.0);
    CHECK_FALSE(sr.done);
    CHECK(sr.reward == doctest::Approx(env.reward_at(-140.0)));
    CHECK_THROWS_AS(env.step(7), std::invalid_argument);

    // stepping toward the goal terminates with reward >= threshold
    env.set_deflection(25.0);
    int steps = 0;
    bool done = false;
    double last = 0;
    while (!done) {
        const auto r = env.step(0);
        done = r.done;
        last = r.reward;
        ++steps;
        REQUIRE(steps < 100);
    }
    CHECK(last >= env.config().reward_threshold);
    CHECK(steps == env.optimal_steps(25.0));
}

TEST_CASE("ts1d episode cap terminates unsuccessful episodes") {
    Ts1dConfig cfg;
    cfg.max_steps = 5;
    TargetSteering1D env(cfg);
    env.set_deflection(-130.0);
    int steps = 0;
    bool done = false;
    while (!done) {
        done = env.step(0).done;  // runs away from the goal
        ++steps;
    }
    CHECK(steps == 5);
}

TEST_CASE("ts1d optimal steps: BFS oracle properties") {
    TargetSteering1D env;
    SUBCASE("already in the goal set: 0") { CHECK(env.optimal_steps(0.0) == 0); }
    SUBCASE("one step below the goal boundary: 1") {
        // find the goal edge by scanning
        double edge = 0;
        for (double d = 0; d <= 140; d += 0.01)
            if (env.reward_at(d) >= env.config().reward_threshold) edge = d;
        CHECK(env.optimal_steps(edge + 1.0) == 1);
    }
    SUBCASE("symmetric starts need equal counts") {
        for (double d = 20; d <= 140; d += 13)
            CHECK(env.optimal_steps(d) == env.optimal_steps(-d));
    }
    SUBCASE("BFS count is achieved by greedy replay toward the goal") {
        for (double d : {-137.0, -60.0, 33.0, 139.0}) {
            env.set_deflection(d);
            const int optimal = env.optimal_steps(d);
            if (optimal == 0) continue;
            int steps = 0;
            bool done = !env.episode_active();
            while (!done) {
                done = env.step(d > 0 ? 0 : 1).done;
                ++steps;
            }
            CHECK(steps == optimal);
        }
    }
    SUBCASE("default geometry leaves no unreachable start") {
        for (double d = -140; d <= 140; d += 1.0) CHECK(env.optimal_steps(d) >= 0);
    }
}

TEST_CASE("ts1d binary variant: code, monotonicity, identical dynamics") {
    Ts1dConfig cfg;
    cfg.binary_bits = 3;
    TargetSteering1D env(cfg);
    SUBCASE("deflection at the lower bound encodes as 000") {
        env.set_deflection(-140.0);
        CHECK(env.observe() == std::vector<double>{-1, -1, -1});
        CHECK(env.state_dim() == 3);
    }
    SUBCASE("quantisation is monotone in the deflection") {
        int prev = -1;
        for (double d = -140; d <= 140; d += 2.5) {
            env.set_deflection(d);
            const auto bits = env.observe();
            int level = 0;
            for (double b : bits) level = (level << 1) | (b > 0 ? 1 : 0);
            CHECK(level >= prev);
            prev = level;
        }
    }
    SUBCASE("reward and dynamics are unchanged by the encoding") {
        TargetSteering1D cont;
        env.set_deflection(40.0);
        cont.set_deflection(40.0);
        const auto a = env.step(0);
        const auto b = cont.step(0);
        CHECK(a.reward == b.reward);
        CHECK(a.done == b.done);
        CHECK(env.deflection() == cont.deflection());
    }
    SUBCASE("bits below 2 are rejected") {
        Ts1dConfig bad;
        bad.binary_bits = 1;
        CHECK_THROWS_AS(TargetSteering1D{bad}, std::invalid_argument);
    }
}

TEST_CASE("response matrix: causal structure, determinism, conditioning, scale") {
    const auto r = make_response_matrix(kDefaultResponseSeed);
    SUBCASE("upper triangle is zero (corrector i moves only BPMs j >= i)") {
        for (int j = 0; j < 10; ++j)
            for (int i = j + 1; i < 10; ++i) CHECK(r.at(j, i) == 0.0);
        for (int i = 0; i < 10; ++i) CHECK(r.at(i, i) != 0.0);
    }
    SUBCASE("bit-identical regeneration") {
        const auto r2 = make_response_matrix(kDefaultResponseSeed);
        CHECK(r.m == r2.m);
    }
    SUBCASE("condition number of the shipped default is <= 100") {
        CHECK(condition_number(r) <= 100.0);
    }
    SUBCASE("a full-range kick moves some BPM by a few mm") {
        double max_move = 0;
        for (int i = 0; i < 10; ++i) {
            std::vector<double> kick(10, 0.0);
            kick[static_cast<std::size_t>(i)] = 300.0;
            for (double x : matvec(r, kick)) max_move = std::max(max_move, std::abs(x));
        }
        CHECK(max_move >= 1.0);
        CHECK(max_move <= 10.0);
    }
    SUBCASE("JSON round trip") {
        const auto r2 = response_from_json(response_to_json(r));
        CHECK(r.m == r2.m);
    }
}

TEST_CASE("awake reset: deterministic, rms in the configured window") {
    AwakeSteering10D env;
    const auto t1 = env.reset(7);
    const auto t2 = env.reset(7);
    CHECK(t1 == t2);
    for (int e = 0; e < 200; ++e) {
        const auto t = env.reset(static_cast<std::uint64_t>(e));
        const double r = rms(t);
        CHECK(r >= env.config().init_rms_low);
        CHECK(r <= env.config().init_rms_high);
        CHECK(env.reward() == doctest::Approx(-r));
    }
}

TEST_CASE("awake step: zero action is a no-op; arithmetic reward; bounds enforced") {
    AwakeSteering10D env;
    env.reset(3);
    const auto before = env.trajectory();
    const auto sr = env.step(std::vector<double>(10, 0.0));
    CHECK(sr.state == before);
    CHECK(sr.reward == doctest::Approx(-rms(before)));

    CHECK_THROWS_AS(env.step(std::vector<double>(10, 1.5)), std::invalid_argument);
    CHECK_THROWS_AS(env.step(std::vector<double>(3, 0.0)), std::invalid_argument);

    std::vector<double> t(10, 0.0);
    t[0] = 3.0;
    t[1] = 4.0;
    CHECK(rms(t) == doctest::Approx(std::sqrt(2.5)).epsilon(1e-12));
}

TEST_CASE("awake linear-solve oracle: the inverse kick zeroes the trajectory") {
    AwakeSteering10D env;
    for (int e = 0; e < 20; ++e) {
        env.reset(100 + static_cast<std::uint64_t>(e));
        const auto x = env.trajectory();
        const auto u = solve_lower(env.response(), x);  // R u = x
        std::vector<double> action(10);
        bool feasible = true;
        for (int i = 0; i < 10; ++i) {
            action[static_cast<std::size_t>(i)] = -u[static_cast<std::size_t>(i)] / env.config().kick_bound;
            if (std::abs(action[static_cast<std::size_t>(i)]) > 1.0) feasible = false;
        }
        REQUIRE(feasible);  // reset draws kicks within bounds, so -u is feasible
        const auto sr = env.step(action);
        CHECK(rms(sr.state) < 1e-9);
        CHECK(sr.done);
        CHECK(sr.reward == doctest::Approx(0.0).epsilon(1e-9));
    }
}

TEST_CASE("awake superposition: one combined kick equals two sequential kicks") {
    AwakeConfig cfg;
    cfg.max_steps = 50;
    cfg.rms_objective = 1e-12;  // keep episodes alive
    AwakeSteering10D env_a(cfg), env_b(cfg);
    CounterRng rng(5);
    env_a.reset(11);
    env_b.reset(11);
    std::vector<double> a1(10), a2(10), sum(10);
    for (int i = 0; i < 10; ++i) {
        a1[static_cast<std::size_t>(i)] = rng.next_uniform(-0.4, 0.4);
        a2[static_cast<std::size_t>(i)] = rng.next_uniform(-0.4, 0.4);
        sum[static_cast<std::size_t>(i)] = a1[static_cast<std::size_t>(i)] + a2[static_cast<std::size_t>(i)];
    }
    env_a.step(a1);
    const auto two = env_a.step(a2);
    const auto one = env_b.step(sum);
    for (int i = 0; i < 10; ++i)
        CHECK(two.state[static_cast<std::size_t>(i)] ==
              doctest::Approx(one.state[static_cast<std::size_t>(i)]).epsilon(1e-12));
}

TEST_CASE("awake reward is never positive and zero only at zero trajectory") {
    AwakeSteering10D env;
    env.reset(8);
    CounterRng rng(13);
    for (int s = 0; s < 8 && env.episode_active(); ++s) {
        std::vector<double> action(10);
        for (auto& a : action) a = rng.next_uniform(-0.3, 0.3);
        const auto sr = env.step(action);
        CHECK(sr.reward <= 0.0);
        if (sr.reward == 0.0) CHECK(rms(sr.state) == 0.0);
    }
}

TEST_CASE("awake invariant: trajectory equals R times accumulated kicks plus start") {
    AwakeConfig cfg;
    cfg.rms_objective = 1e-12;
    AwakeSteering10D env(cfg);
    env.reset(21);
    const auto start = env.trajectory();
    std::vector<double> total(10, 0.0);
    CounterRng rng(3);
    for (int s = 0; s < 5; ++s) {
        std::vector<double> action(10);
        for (int i = 0; i < 10; ++i) {
            action[static_cast<std::size_t>(i)] = rng.next_uniform(-0.2, 0.2);
            total[static_cast<std::size_t>(i)] += action[static_cast<std::size_t>(i)] * cfg.kick_bound;
        }
        env.step(action);
    }
    const auto moved = matvec(env.response(), total);
    for (int i = 0; i < 10; ++i)
        CHECK(env.trajectory()[static_cast<std::size_t>(i)] ==
              doctest::Approx(start[static_cast<std::size_t>(i)] + moved[static_cast<std::size_t>(i)]).epsilon(1e-9));
}
