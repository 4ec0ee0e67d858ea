#include "qbmrl/envs.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <deque>
#include <json.hpp>
#include <set>
#include <stdexcept>

#include "qbmrl/rng.hpp"

namespace qbmrl {

namespace {

constexpr double kThreeSigmaMass = 0.99730020393673981;  // Phi(3) - Phi(-3)

double normal_cdf(double x) { return 0.5 * std::erfc(-x / 1.4142135623730950488); }

}  // namespace

TargetSteering1D::TargetSteering1D(Ts1dConfig config) : config_(config) {
    if (!(config_.deflection_low < config_.deflection_high))
        throw std::invalid_argument("Ts1dConfig: deflection bounds inverted");
    if (!(config_.action_delta > 0.0)) throw std::invalid_argument("Ts1dConfig: action_delta <= 0");
    if (!(config_.beam_sigma > 0.0)) throw std::invalid_argument("Ts1dConfig: beam_sigma <= 0");
    if (!(config_.reward_threshold > 0.0 && config_.reward_threshold < 1.0))
        throw std::invalid_argument("Ts1dConfig: reward_threshold outside (0, 1)");
    if (config_.binary_bits != 0 && config_.binary_bits < 2)
        throw std::invalid_argument("Ts1dConfig: binary_bits must be 0 or >= 2");
}

int TargetSteering1D::state_dim() const { return config_.binary_bits > 0 ? config_.binary_bits : 1; }

std::vector<double> TargetSteering1D::state_low() const {
    if (config_.binary_bits > 0) return std::vector<double>(static_cast<std::size_t>(config_.binary_bits), -1.0);
    return {config_.bpm_gain * config_.deflection_low};
}

std::vector<double> TargetSteering1D::state_high() const {
    if (config_.binary_bits > 0) return std::vector<double>(static_cast<std::size_t>(config_.binary_bits), 1.0);
    return {config_.bpm_gain * config_.deflection_high};
}

double TargetSteering1D::reward_at(double deflection) const {
    const double mu = config_.target_gain * deflection + config_.target_offset;
    const double w = config_.target_half_width;
    const double s = config_.beam_sigma;
    const double overlap = normal_cdf((w - mu) / s) - normal_cdf((-w - mu) / s);
    return std::clamp(overlap / kThreeSigmaMass, 0.0, 1.0);
}

std::vector<double> TargetSteering1D::observe() const {
    if (config_.binary_bits == 0) return {config_.bpm_gain * deflection_};
    const int bits = config_.binary_bits;
    const int levels = 1 << bits;
    const double span = config_.deflection_high - config_.deflection_low;
    int level = static_cast<int>(std::floor((deflection_ - config_.deflection_low) / span * levels));
    level = std::clamp(level, 0, levels - 1);
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(bits));
    for (int b = bits - 1; b >= 0; --b) out.push_back((level >> b) & 1 ? 1.0 : -1.0);
    return out;
}

std::vector<double> TargetSteering1D::reset(std::uint64_t seed) {
    CounterRng rng(derive_stream(seed, 0x545331ull));
    deflection_ = rng.next_uniform(config_.deflection_low, config_.deflection_high);
    steps_ = 0;
    active_ = !done_at_reset();
    return observe();
}

void TargetSteering1D::set_deflection(double deflection) {
    deflection_ = std::clamp(deflection, config_.deflection_low, config_.deflection_high);
    steps_ = 0;
    active_ = !done_at_reset();
}

StepResult TargetSteering1D::step(int action) {
    if (action != 0 && action != 1) throw std::invalid_argument("TargetSteering1D: bad action");
    if (!active_) throw std::logic_error("TargetSteering1D: episode not active");
    deflection_ += action == 1 ? config_.action_delta : -config_.action_delta;
    deflection_ = std::clamp(deflection_, config_.deflection_low, config_.deflection_high);
    ++steps_;
    StepResult out;
    out.state = observe();
    out.reward = reward_at(deflection_);
    out.done = out.reward >= config_.reward_threshold || steps_ >= config_.max_steps;
    active_ = !out.done;
    return out;
}

int TargetSteering1D::optimal_steps(double start) const {
    start = std::clamp(start, config_.deflection_low, config_.deflection_high);
    if (reward_at(start) >= config_.reward_threshold) return 0;

    // Clamping makes the reachable set finite: start +- k*delta plus the grids
    // accumulated at either bound.
    const auto key = [](double d) { return std::llround(d * 1e6); };
    std::set<long long> visited;
    std::deque<std::pair<double, int>> queue;
    queue.emplace_back(start, 0);
    visited.insert(key(start));
    while (!queue.empty()) {
        const auto [d, steps] = queue.front();
        queue.pop_front();
        for (int dir = -1; dir <= 1; dir += 2) {
            const double next = std::clamp(d + dir * config_.action_delta, config_.deflection_low,
                                           config_.deflection_high);
            if (!visited.insert(key(next)).second) continue;
            if (reward_at(next) >= config_.reward_threshold) return steps + 1;
            queue.emplace_back(next, steps + 1);
        }
    }
    return -1;
}

std::vector<double> matvec(const Matrix10& r, const std::vector<double>& x) {
    std::vector<double> out(Matrix10::n, 0.0);
    for (int i = 0; i < Matrix10::n; ++i) {
        double acc = 0.0;
        for (int j = 0; j < Matrix10::n; ++j) acc += r.at(i, j) * x[static_cast<std::size_t>(j)];
        out[static_cast<std::size_t>(i)] = acc;
    }
    return out;
}

std::vector<double> solve_lower(const Matrix10& r, const std::vector<double>& b) {
    std::vector<double> x(Matrix10::n, 0.0);
    for (int i = 0; i < Matrix10::n; ++i) {
        double acc = b[static_cast<std::size_t>(i)];
        for (int j = 0; j < i; ++j) acc -= r.at(i, j) * x[static_cast<std::size_t>(j)];
        x[static_cast<std::size_t>(i)] = acc / r.at(i, i);
    }
    return x;
}

double condition_number(const Matrix10& r) {
    Eigen::Matrix<double, 10, 10> m;
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j) m(i, j) = r.at(i, j);
    Eigen::JacobiSVD<Eigen::Matrix<double, 10, 10>> svd(m);
    const auto& sv = svd.singularValues();
    return sv(0) / sv(9);
}

double rms(const std::vector<double>& x) {
    double acc = 0.0;
    for (double v : x) acc += v * v;
    return std::sqrt(acc / static_cast<double>(x.size()));
}

Matrix10 make_response_matrix(std::uint64_t seed) {
    for (int attempt = 0; attempt < 256; ++attempt) {
        CounterRng rng(derive_stream(seed, 0x524553ull, static_cast<std::uint64_t>(attempt)));
        std::array<double, 10> beta_c{}, phase_c{}, beta_b{}, phase_b{};
        double phase = 0.0;
        for (int i = 0; i < 10; ++i) {
            beta_c[static_cast<std::size_t>(i)] = rng.next_uniform(5.0, 15.0);
            beta_b[static_cast<std::size_t>(i)] = rng.next_uniform(5.0, 15.0);
            phase_c[static_cast<std::size_t>(i)] = phase;
            phase_b[static_cast<std::size_t>(i)] = phase + rng.next_uniform(0.6, 1.0);
            phase += rng.next_uniform(0.3, 0.7);
        }
        Matrix10 r;
        double max_abs = 0.0;
        for (int j = 0; j < 10; ++j) {
            for (int i = 0; i <= j; ++i) {
                const double v = std::sqrt(beta_b[static_cast<std::size_t>(j)] *
                                           beta_c[static_cast<std::size_t>(i)]) *
                                 std::sin(phase_b[static_cast<std::size_t>(j)] -
                                          phase_c[static_cast<std::size_t>(i)]);
                r.at(j, i) = v;
                max_abs = std::max(max_abs, std::abs(v));
            }
        }
        const double scale = (1.0 / 60.0) / max_abs;
        for (auto& v : r.m) v *= scale;
        if (condition_number(r) <= 100.0) return r;
    }
    throw std::runtime_error("make_response_matrix: no well-conditioned matrix found");
}

std::string response_to_json(const Matrix10& r) {
    nlohmann::json doc;
    doc["schema"] = "qbmrl.response.v1";
    auto rows = nlohmann::json::array();
    for (int i = 0; i < 10; ++i) {
        auto row = nlohmann::json::array();
        for (int j = 0; j < 10; ++j) row.push_back(r.at(i, j));
        rows.push_back(std::move(row));
    }
    doc["matrix"] = std::move(rows);
    return doc.dump();
}

Matrix10 response_from_json(const std::string& text) {
    const auto doc = nlohmann::json::parse(text);
    if (doc.at("schema").get<std::string>() != "qbmrl.response.v1")
        throw std::invalid_argument("response_from_json: unknown schema");
    Matrix10 r;
    const auto& rows = doc.at("matrix");
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j) r.at(i, j) = rows.at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(j)).get<double>();
    return r;
}

AwakeSteering10D::AwakeSteering10D(AwakeConfig config)
    : AwakeSteering10D(config, make_response_matrix(config.response_seed)) {}

AwakeSteering10D::AwakeSteering10D(AwakeConfig config, const Matrix10& response)
    : config_(config), response_(response), trajectory_(dim, 0.0) {
    if (!(config_.kick_bound > 0.0)) throw std::invalid_argument("AwakeConfig: kick_bound <= 0");
    if (!(config_.rms_objective > 0.0))
        throw std::invalid_argument("AwakeConfig: rms_objective <= 0");
    if (!(config_.init_rms_low < config_.init_rms_high))
        throw std::invalid_argument("AwakeConfig: init rms range inverted");
}

std::vector<double> AwakeSteering10D::reset(std::uint64_t seed) {
    CounterRng rng(derive_stream(seed, 0x41574bull));
    // Rejection-sample corrector settings until the resulting trajectory rms
    // lands in the configured window; -u is then a feasible one-step fix.
    for (int attempt = 0; attempt < 100000; ++attempt) {
        std::vector<double> kicks(dim);
        for (auto& k : kicks) k = rng.next_uniform(-config_.kick_bound, config_.kick_bound);
        auto trajectory = matvec(response_, kicks);
        const double r = rms(trajectory);
        if (r >= config_.init_rms_low && r <= config_.init_rms_high) {
            trajectory_ = std::move(trajectory);
            steps_ = 0;
            active_ = true;
            return trajectory_;
        }
    }
    throw std::runtime_error("AwakeSteering10D::reset: rejection sampling failed");
}

StepResult AwakeSteering10D::step(const std::vector<double>& action) {
    if (action.size() != dim) throw std::invalid_argument("AwakeSteering10D: action size != 10");
    for (double a : action)
        if (!(a >= -1.0 && a <= 1.0))
            throw std::invalid_argument("AwakeSteering10D: action outside [-1, 1]");
    if (!active_) throw std::logic_error("AwakeSteering10D: episode not active");

    std::vector<double> kick(dim);
    for (int i = 0; i < dim; ++i) kick[static_cast<std::size_t>(i)] = action[static_cast<std::size_t>(i)] * config_.kick_bound;
    const auto delta = matvec(response_, kick);
    for (int i = 0; i < dim; ++i) trajectory_[static_cast<std::size_t>(i)] += delta[static_cast<std::size_t>(i)];
    ++steps_;

    StepResult out;
    out.state = trajectory_;
    out.reward = -rms(trajectory_);
    out.done = rms(trajectory_) <= config_.rms_objective || steps_ >= config_.max_steps;
    active_ = !out.done;
    return out;
}

}  // namespace qbmrl
