#include "vlmpc/value_map.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

namespace vlmpc::traj {

GridSpec GridSpec::covering(const Bounds3& bounds, double voxel_size) {
    GridSpec grid;
    grid.voxel_size = voxel_size;
    grid.origin = bounds.min;
    for (int a = 0; a < 3; ++a) {
        grid.dims[a] = std::max(1, static_cast<int>(std::lround((bounds.max[a] - bounds.min[a]) / voxel_size)));
    }
    return grid;
}

Vec3 GridSpec::center(int i, int j, int k) const {
    return origin + voxel_size * Vec3(i + 0.5, j + 0.5, k + 0.5);
}

double spread_value(const Vec3& x, const Vec3& sub_goal, const std::vector<Vec3>& interference,
                    const SpreadParams& params) {
    double v = -std::exp(-(x - sub_goal).squaredNorm() / (2.0 * params.sigma_s * params.sigma_s));
    for (const auto& obstacle : interference) {
        v += std::exp(-(x - obstacle).squaredNorm() / (2.0 * params.sigma_I * params.sigma_I));
    }
    return v;
}

ValueMap build_map(const Vec3& sub_goal, const std::vector<Vec3>& interference, const GridSpec& grid,
                   const SpreadParams& params) {
    if (!(grid.voxel_size > 0.0) || grid.dims[0] < 1 || grid.dims[1] < 1 || grid.dims[2] < 1) {
        throw InvalidInput("value map grid needs positive voxel_size and dims");
    }
    if (!(params.sigma_s > 0.0) || !(params.sigma_I > 0.0)) {
        throw InvalidInput("spread sigmas must be positive");
    }
    ValueMap map{grid, {}};
    map.values.reserve(grid.size());
    for (int k = 0; k < grid.dims[2]; ++k) {
        for (int j = 0; j < grid.dims[1]; ++j) {
            for (int i = 0; i < grid.dims[0]; ++i) {
                map.values.push_back(spread_value(grid.center(i, j, k), sub_goal, interference, params));
            }
        }
    }
    return map;
}

double value_at(const ValueMap& map, const Vec3& point) {
    const GridSpec& g = map.grid;
    std::array<int, 3> lo{};
    std::array<double, 3> frac{};
    for (int a = 0; a < 3; ++a) {
        double u = std::clamp((point[a] - g.origin[a]) / g.voxel_size - 0.5, 0.0, g.dims[a] - 1.0);
        // Points on a voxel center must read that voxel exactly despite rounding.
        if (const double r = std::round(u); std::abs(u - r) < 1e-9) {
            u = r;
        }
        lo[a] = std::min(static_cast<int>(std::floor(u)), std::max(g.dims[a] - 2, 0));
        frac[a] = u - lo[a];
    }
    double v = 0.0;
    for (int c = 0; c < 8; ++c) {
        std::array<int, 3> idx{};
        double w = 1.0;
        for (int a = 0; a < 3; ++a) {
            const int bit = (c >> a) & 1;
            idx[a] = std::min(lo[a] + bit, g.dims[a] - 1);
            w *= bit ? frac[a] : 1.0 - frac[a];
        }
        if (w != 0.0) {
            v += w * map.at(idx[0], idx[1], idx[2]);
        }
    }
    return v;
}

TrajScore score_trajectory(const ValueMap& map, const TrajectoryCandidate& candidate) {
    TrajScore score{candidate.candidate_index, 0.0};
    for (const auto& p : candidate.points) {
        score.cost += value_at(map, p);
    }
    return score;
}

int select_trajectory(const std::vector<TrajScore>& scores) {
    if (scores.empty()) {
        throw InvalidInput("cannot select from an empty trajectory set");
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i) {
        if (scores[i].cost < scores[best].cost) {
            best = i;
        }
    }
    return scores[best].candidate_index;
}

void write_value_map(const ValueMap& map, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw InvalidInput("cannot open '" + path.string() + "' for writing");
    }
    for (double v : map.values) {
        const auto f = static_cast<float>(v);
        std::uint32_t bits = 0;
        std::memcpy(&bits, &f, sizeof(bits));
        if constexpr (std::endian::native == std::endian::big) {
            bits = __builtin_bswap32(bits);
        }
        char bytes[4];
        std::memcpy(bytes, &bits, 4);
        os.write(bytes, 4);
    }

    std::ofstream hdr(path.string() + ".hdr");
    hdr.precision(17);
    const GridSpec& g = map.grid;
    hdr << "format 1\n"
        << "dtype float32\n"
        << "byte_order little-endian\n"
        << "layout x-fastest (index = i + w*(j + h*k))\n"
        << "dims " << g.dims[0] << ' ' << g.dims[1] << ' ' << g.dims[2] << '\n'
        << "origin " << g.origin.x() << ' ' << g.origin.y() << ' ' << g.origin.z() << '\n'
        << "voxel_size " << g.voxel_size << '\n'
        << "voxel_centers origin + (index + 0.5) * voxel_size\n";
}

}  // namespace vlmpc::traj
