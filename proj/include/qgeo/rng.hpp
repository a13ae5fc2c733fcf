#pragma once

#include <cmath>
#include <cstdint>

#include "qgeo/quaternion.hpp"

namespace qgeo {

/// Deterministic splitmix64 generator.  Distribution code is hand-rolled so
/// that reports are byte-identical across standard libraries.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in [a, b).
    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    /// Standard normal via Box-Muller.
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    Quaternion quaternion_normal() { return {normal(), normal(), normal(), normal()}; }

    Quaternion unit_quaternion() { return normalized(quaternion_normal()); }

    Quaternion imaginary_unit_quaternion() {
        Quaternion q = quaternion_normal();
        q.w = 0.0;
        return normalized(q);
    }

  private:
    std::uint64_t state_;
};

}  // namespace qgeo
