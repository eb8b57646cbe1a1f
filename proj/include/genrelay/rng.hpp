#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace genrelay {

/// splitmix64 step; used for seed derivation only.
inline std::uint64_t splitmix64(std::uint64_t &state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Deterministically derives a child seed from a base seed and a list of
/// stream tags. Used everywhere a worker, realization, or data point needs
/// its own independent stream, so that results do not depend on evaluation
/// order or worker count.
inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> tags) {
    std::uint64_t state = base ^ 0xd1b54a32d192ed03ULL;
    splitmix64(state);
    for (std::uint64_t t : tags) {
        state ^= t + 0x9e3779b97f4a7c15ULL;
        splitmix64(state);
    }
    return splitmix64(state);
}

/// Deterministic random stream. The engine (mt19937_64) is fully specified
/// by the standard and all distributions are implemented here rather than
/// taken from <random>, whose distribution algorithms are
/// implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in (0, 1]; never returns 0 so log() is safe.
    double uniform_pos() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    /// Uniform in [0, 1).
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer in [lo, hi], inclusive, unbiased via rejection.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        if (span == 0) return static_cast<std::int64_t>(next_u64()); // full 64-bit range
        std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return lo + static_cast<std::int64_t>(x % span);
    }

    /// Standard normal via Box-Muller (cosine branch only, for a fixed
    /// two-uniforms-per-draw consumption pattern).
    double normal() {
        double u1 = uniform_pos();
        double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    /// Student-t draw with integer dof: Z / sqrt(chi2_dof / dof).
    double student_t(int dof) {
        double z = normal();
        double chi2 = 0.0;
        for (int i = 0; i < dof; ++i) {
            double n = normal();
            chi2 += n * n;
        }
        return z / std::sqrt(chi2 / dof);
    }

private:
    std::mt19937_64 engine_;
};

} // namespace genrelay
