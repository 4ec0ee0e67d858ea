#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace qbmrl {

struct StepResult {
    std::vector<double> state;
    double reward = 0.0;
    bool done = false;
};

// One-dimensional proton target steering: hidden deflection angle, two
// discrete actions (+/- action_delta), BPM reading as state, reward = overlap
// of the Gaussian beam with the target normalised to the +-3 sigma beam
// fraction. Setting binary_bits > 0 switches the observation to the plain
// binary code of the quantized deflection (values in {-1,+1}); dynamics and
// reward are unchanged.
struct Ts1dConfig {
    double deflection_low = -140.0;   // urad
    double deflection_high = 140.0;   // urad
    double action_delta = 15.0;       // urad per step
    double bpm_gain = 0.05;           // mm per urad, state = bpm_gain * deflection
    double target_gain = 0.1;         // mm per urad, beam centre at target plane
    double target_offset = 0.0;       // mm
    double beam_sigma = 0.7;          // mm
    double target_half_width = 2.0;   // mm
    double reward_threshold = 0.8;
    int max_steps = 20;
    int binary_bits = 0;              // 0 = continuous BPM state
};

class TargetSteering1D {
  public:
    explicit TargetSteering1D(Ts1dConfig config = {});

    const Ts1dConfig& config() const { return config_; }
    int action_count() const { return 2; }
    int state_dim() const;
    std::vector<double> state_low() const;
    std::vector<double> state_high() const;

    std::vector<double> reset(std::uint64_t seed);
    StepResult step(int action);  // 0 = decrease, 1 = increase

    // Episode already satisfies the reward objective at reset.
    bool done_at_reset() const { return reward_at(deflection_) >= config_.reward_threshold; }
    bool episode_active() const { return active_; }

    double reward_at(double deflection) const;
    double deflection() const { return deflection_; }
    // Places the hidden deflection directly (optimality grid rollouts).
    void set_deflection(double deflection);

    // Exact minimum number of steps to reach reward >= threshold, by BFS over
    // the reachable (clamped) deflection set. Returns -1 if unreachable.
    int optimal_steps(double deflection) const;

    std::vector<double> observe() const;

  private:
    Ts1dConfig config_;
    double deflection_ = 0.0;
    int steps_ = 0;
    bool active_ = false;
};

struct Matrix10 {
    static constexpr int n = 10;
    std::array<double, 100> m{};

    double& at(int row, int col) { return m[static_cast<std::size_t>(row) * n + col]; }
    double at(int row, int col) const { return m[static_cast<std::size_t>(row) * n + col]; }
};

std::vector<double> matvec(const Matrix10& r, const std::vector<double>& x);
// Solves R u = b by forward substitution (R lower triangular).
std::vector<double> solve_lower(const Matrix10& r, const std::vector<double>& b);
double condition_number(const Matrix10& r);
double rms(const std::vector<double>& x);

// Lower-triangular pseudo-optics response (corrector i moves BPMs j >= i),
// deterministic in `seed`, rescaled so a full-range kick moves a BPM by a few
// mm; retries with a perturbed seed until the condition number is <= 100.
Matrix10 make_response_matrix(std::uint64_t seed);

inline constexpr std::uint64_t kDefaultResponseSeed = 20240711ull;

std::string response_to_json(const Matrix10& r);
Matrix10 response_from_json(const std::string& text);

// Ten-corrector AWAKE electron line: state = BPM differences (mm), action in
// [-1, 1]^10 scaled by kick_bound, reward = -rms(trajectory), done at
// rms <= rms_objective or after max_steps.
struct AwakeConfig {
    double kick_bound = 300.0;  // urad per corrector per step
    double rms_objective = 1.6; // mm
    int max_steps = 10;
    double init_rms_low = 2.5;  // mm
    double init_rms_high = 8.0; // mm
    std::uint64_t response_seed = kDefaultResponseSeed;
};

class AwakeSteering10D {
  public:
    static constexpr int dim = 10;

    explicit AwakeSteering10D(AwakeConfig config = {});
    AwakeSteering10D(AwakeConfig config, const Matrix10& response);

    const AwakeConfig& config() const { return config_; }
    const Matrix10& response() const { return response_; }
    bool episode_active() const { return active_; }

    std::vector<double> reset(std::uint64_t seed);
    StepResult step(const std::vector<double>& action);

    const std::vector<double>& trajectory() const { return trajectory_; }
    double reward() const { return -rms(trajectory_); }

  private:
    AwakeConfig config_;
    Matrix10 response_;
    std::vector<double> trajectory_;
    int steps_ = 0;
    bool active_ = false;
};

}  // namespace qbmrl
