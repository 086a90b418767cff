#ifndef RATBARY_RNG_HPP
#define RATBARY_RNG_HPP

// Seeded random numbers with a fixed bit-level recipe, so generated data is
// identical across standard libraries (std distributions are not).

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "ratbary/error.hpp"
#include "ratbary/linalg.hpp"

namespace ratbary {

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Derived stream for a (seed, a, b) triple.
    static Rng derived(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
        std::uint64_t s = seed;
        for (std::uint64_t v : {a, b}) s = mix(s ^ mix(v + 0x9e3779b97f4a7c15ULL));
        return Rng(s);
    }

    std::uint64_t next() { return engine_(); }

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    /// Uniform integer on [0, n).
    std::uint64_t index(std::uint64_t n) {
        if (n == 0) throw ParameterError("Rng::index: empty range");
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    /// Standard normal via Box-Muller (one value per call).
    double normal() {
        double u1;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    Complex complex_normal() {
        const double re = normal();
        const double im = normal();
        return {re, im};
    }

    /// `count` distinct values from `pool`, in draw order (partial Fisher-Yates).
    std::vector<Index> sample(std::vector<Index> pool, Index count) {
        if (count < 0 || count > static_cast<Index>(pool.size()))
            throw ExhaustionError("Rng::sample: pool smaller than requested count");
        for (Index i = 0; i < count; ++i) {
            const auto j = static_cast<Index>(index(static_cast<std::uint64_t>(static_cast<Index>(pool.size()) - i)));
            std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(i + j)]);
        }
        pool.resize(static_cast<std::size_t>(count));
        return pool;
    }

  private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::mt19937_64 engine_;
};

} // namespace ratbary

#endif
