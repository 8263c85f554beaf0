#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>

#include <bireflect/errors.hpp>

namespace bireflect {

/** Scalar: the base field, an algebraically closed field of characteristic 0
 *  modeled numerically by complex doubles. */
using Scalar = std::complex<double>;

inline constexpr double kEps = std::numeric_limits<double>::epsilon();

/** TolerancePolicy: every approximate decision routes through one of these.
 *
 *  tau_eq    relative threshold for equality of scalars/matrices/residuals
 *  tau_rank  singular values below tau_rank * sigma_max count as zero
 *  max_retries  bound for randomized retry loops (conjugator search)
 */
struct TolerancePolicy {
    double tau_eq = 1e-10;
    double tau_rank = 1e-10;
    int max_retries = 32;
};

inline bool scalar_close(Scalar a, Scalar b, double tau, double scale = 1.0) {
    return std::abs(a - b) <= tau * std::max(scale, 1.0);
}

inline bool is_finite(Scalar a) {
    return std::isfinite(a.real()) && std::isfinite(a.imag());
}

/** Deterministic RNG for randomized retries: splitmix64 stream mapped to
 *  complex standard normals. Hand-rolled so identical seeds give identical
 *  draws on every platform, which the CLI's byte-identical-output contract
 *  depends on. */
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /** Uniform in [0, 1), 53-bit resolution. */
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /** Standard normal via Box-Muller; avoids log(0). */
    double next_normal() {
        double u1 = next_unit();
        double u2 = next_unit();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        const double pi = 3.14159265358979323846;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * pi * u2);
    }

    /** Complex standard normal (independent N(0,1) parts). */
    Scalar next_cnormal() {
        double re = next_normal();
        double im = next_normal();
        return {re, im};
    }

private:
    std::uint64_t state_;
};

} // namespace bireflect
