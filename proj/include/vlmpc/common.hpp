#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace vlmpc {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Rng = std::mt19937_64;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Raised for malformed inputs to any public operation.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct Bounds3 {
    Vec3 min = Vec3(-0.32, -0.32, 0.0);
    Vec3 max = Vec3(0.32, 0.32, 0.32);

    [[nodiscard]] Vec3 clamp(const Vec3& p) const { return p.cwiseMax(min).cwiseMin(max); }
    [[nodiscard]] bool contains(const Vec3& p) const {
        return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
    }
    bool operator==(const Bounds3& other) const { return min == other.min && max == other.max; }
};

/// splitmix64 finalizer; used to derive independent RNG streams from a base seed.
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ull * (stream + 1);
    z = (z ^ (z >> 30u)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27u)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31u);
}

/// Standard normal draw built on the engine directly so sigma = 0 is legal.
inline double gaussian(Rng& rng, double mean, double stddev) {
    std::normal_distribution<double> unit(0.0, 1.0);
    return mean + stddev * unit(rng);
}

}  // namespace vlmpc
