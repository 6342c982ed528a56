#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

// Reproducibility contract: the engine is std::mt19937_64 (its sequence is
// fixed by the C++ standard) and every distribution below is implemented by
// explicit, named transforms of that stream. std:: distribution objects are
// deliberately avoided: their algorithms differ between standard libraries,
// which would break bit-exact trajectory replay across platforms.

namespace qdfr::rng {

// splitmix64; used to expand one master seed into decorrelated child seeds
// (e.g. one stream per sweep grid point).
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t s = master ^ (0x6a09e667f3bcc909ull + index * 0x9e3779b97f4a7c15ull);
    std::uint64_t a = splitmix64(s);
    return splitmix64(s) ^ a;
}

class Stream {
public:
    explicit Stream(std::uint64_t seed) : eng_(seed) {}

    // uniform double in [0, 1), 53-bit mantissa
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    // uniform in (0, 1], safe as a log argument
    double uniform_pos() { return 1.0 - uniform(); }

    double exponential(double rate) {
        if (!(rate > 0.0)) throw std::domain_error("exponential: rate must be > 0");
        return -std::log(uniform_pos()) / rate;
    }

    // Box-Muller (basic form, one deviate per call)
    double normal() {
        const double r = std::sqrt(-2.0 * std::log(uniform_pos()));
        return r * std::cos(units_two_pi() * uniform());
    }

    // Poisson counts. Knuth's product method below the PTRD cutoff, Hormann's
    // transformed-rejection (PTRD) above it; both use only the uniform stream.
    std::int64_t poisson(double mean) {
        if (!(mean >= 0.0)) throw std::domain_error("poisson: mean must be >= 0");
        if (mean == 0.0) return 0;
        if (mean < 10.0) return poisson_knuth(mean);
        return poisson_ptrd(mean);
    }

    std::uint64_t raw() { return eng_(); }

private:
    static constexpr double units_two_pi() { return 6.283185307179586476925286766559; }

    std::int64_t poisson_knuth(double mean) {
        const double limit = std::exp(-mean);
        std::int64_t k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= uniform_pos();
        } while (p > limit);
        return k - 1;
    }

    std::int64_t poisson_ptrd(double mean) {
        const double smu = std::sqrt(mean);
        const double b = 0.931 + 2.53 * smu;
        const double a = -0.059 + 0.02483 * b;
        const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
        const double v_r = 0.9277 - 3.6224 / (b - 2.0);
        for (;;) {
            double u = uniform() - 0.5;
            double v = uniform_pos();
            double us = 0.5 - std::abs(u);
            double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
            if (us >= 0.07 && v <= v_r) return static_cast<std::int64_t>(k);
            if (k < 0.0 || (us < 0.013 && v > us)) continue;
            if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
                k * std::log(mean) - mean - std::lgamma(k + 1.0)) {
                return static_cast<std::int64_t>(k);
            }
        }
    }

    std::mt19937_64 eng_;
};

}  // namespace qdfr::rng
