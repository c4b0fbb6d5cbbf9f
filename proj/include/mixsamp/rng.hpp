#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>

namespace mixsamp {

namespace detail {
// Fibonacci-hashing finalizer used to derive statistically independent
// child seeds from (master seed, stream path).
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}
}  // namespace detail

/// Deterministic random source. All randomness in the toolkit flows through
/// this class so that results are a pure function of the seeds; uniform and
/// normal variates are generated in-house to keep output identical across
/// standard library implementations.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    /// Child seed for an independent stream. Streams derived from the same
    /// master with different paths never share state, so parallel consumers
    /// can draw in any order.
    static std::uint64_t derive_seed(std::uint64_t master,
                                     std::initializer_list<std::uint64_t> path) {
        std::uint64_t h = detail::splitmix64(master);
        for (std::uint64_t id : path) h = detail::splitmix64(h ^ id);
        return h;
    }

    static Rng split(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
        return Rng(derive_seed(master, path));
    }

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform on [0, 1) with 53-bit resolution.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform on [0, 2*pi).
    double angle() { return 2.0 * std::numbers::pi * uniform01(); }

    /// Standard normal via Box-Muller; draws two uniforms per call.
    double normal() {
        double u1 = 1.0 - uniform01();  // (0, 1], keeps the log finite
        double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    /// Standard complex normal, E|z|^2 = 1.
    std::complex<double> complex_normal() {
        double u1 = 1.0 - uniform01();
        double u2 = uniform01();
        double r = std::sqrt(-std::log(u1));  // both Box-Muller components used
        return {r * std::cos(2.0 * std::numbers::pi * u2),
                r * std::sin(2.0 * std::numbers::pi * u2)};
    }

    /// Random sign, +1 or -1.
    double sign() { return (next_u64() & 1ULL) ? 1.0 : -1.0; }

  private:
    std::mt19937_64 gen_;
};

}  // namespace mixsamp
