#pragma once

#include <cmath>
#include <cstdint>

namespace qbmrl {

// Counter-based generator (SplitMix64 core): the i-th output is a pure
// function of (key, i), so streams can be replayed and split without
// shared state. Stream splitting: derive_stream(key, tag) mixes the tag
// into a fresh key; nested tags give independent substreams. All
// stochastic code in this library draws from CounterRng instances whose
// keys are derived from a single run seed.
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_stream(std::uint64_t key, std::uint64_t tag) {
    return mix64(key + 0x9E3779B97F4A7C15ull * (tag + 1));
}

inline std::uint64_t derive_stream(std::uint64_t key, std::uint64_t a, std::uint64_t b) {
    return derive_stream(derive_stream(key, a), b);
}

class CounterRng {
  public:
    explicit CounterRng(std::uint64_t key) : key_(key) {}

    std::uint64_t next_u64() {
        counter_ += 0x9E3779B97F4A7C15ull;
        return mix64(key_ + counter_);
    }

    // [0, 1)
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

    // [0, n)
    int next_int(int n) {
        int v = static_cast<int>(next_unit() * n);
        return v < n ? v : n - 1;
    }

    int next_sign() { return (next_u64() & 1u) ? 1 : -1; }

    // Box-Muller, one output per call so the stream layout stays simple.
    double next_gaussian() {
        double u1 = next_unit();
        double u2 = next_unit();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }

  private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace qbmrl
