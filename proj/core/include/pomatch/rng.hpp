// rng.hpp - deterministic random generator for reproducible experiments.
//
// std::normal_distribution is implementation-defined, so the generators here are
// hand-rolled on top of mt19937_64: identical seeds give identical streams on
// every platform with IEEE doubles.
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace pomatch {

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

class Rng {
public:
    explicit Rng(uint64_t seed) : gen_(seed), seed_(seed) {}

    // Independent child stream; deterministic in (seed, tag) and independent of
    // how many draws were made from the parent.
    Rng fork(uint64_t tag) const { return Rng(splitmix64(seed_ ^ splitmix64(tag + 1))); }

    double uniform() {
        // 53-bit mantissa in [0,1).
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Box-Muller, no cached spare: exactly two uniforms per draw.
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log1p(-u1));
        return r * std::cos(2.0 * std::numbers::pi * u2);
    }

    // Inclusive range.
    int uniform_int(int lo, int hi) {
        return lo + static_cast<int>(uniform() * (static_cast<double>(hi) - lo + 1.0));
    }

    Eigen::MatrixXd random_rotation(int d) {
        if (d == 2) {
            double b = uniform(0.0, 2.0 * std::numbers::pi);
            Eigen::Matrix2d r;
            r << std::cos(b), -std::sin(b), std::sin(b), std::cos(b);
            return r;
        }
        // Uniform quaternion.
        double q[4];
        double norm2 = 0.0;
        do {
            norm2 = 0.0;
            for (double& qi : q) {
                qi = normal();
                norm2 += qi * qi;
            }
        } while (norm2 < 1e-12);
        double s = 1.0 / std::sqrt(norm2);
        Eigen::Quaterniond quat(q[0] * s, q[1] * s, q[2] * s, q[3] * s);
        return quat.toRotationMatrix();
    }

private:
    std::mt19937_64 gen_;
    uint64_t seed_;
};

}  // namespace pomatch
