#pragma once

// Voxel value map: attractive sub-goal Gaussian, repulsive interference
// Gaussians, trilinear lookup and trajectory scoring.

#include "vlmpc/traj_sampler.hpp"

#include <array>
#include <filesystem>
#include <vector>

namespace vlmpc::traj {

/// Voxel (i, j, k) is centered at origin + (i + 0.5, j + 0.5, k + 0.5) * voxel_size.
struct GridSpec {
    std::array<int, 3> dims{64, 64, 32};
    double voxel_size = 0.01;
    Vec3 origin = Vec3(-0.32, -0.32, 0.0);

    /// Grid covering `bounds` at the given resolution.
    static GridSpec covering(const Bounds3& bounds, double voxel_size);
    [[nodiscard]] Vec3 center(int i, int j, int k) const;
    [[nodiscard]] std::size_t size() const {
        return static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
    }
};

struct SpreadParams {
    double sigma_s = 0.08;
    double sigma_I = 0.05;
};

struct ValueMap {
    GridSpec grid;
    /// x-fastest: index = i + w * (j + h * k).
    std::vector<double> values;

    [[nodiscard]] double at(int i, int j, int k) const {
        return values[static_cast<std::size_t>(i) + static_cast<std::size_t>(grid.dims[0]) *
                                                        (static_cast<std::size_t>(j) + static_cast<std::size_t>(grid.dims[1]) * k)];
    }
};

/// The spreading formula evaluated at a point.
double spread_value(const Vec3& x, const Vec3& sub_goal, const std::vector<Vec3>& interference,
                    const SpreadParams& params);

ValueMap build_map(const Vec3& sub_goal, const std::vector<Vec3>& interference, const GridSpec& grid,
                   const SpreadParams& params);

/// Trilinear interpolation between voxel centers; outside points clamp to the boundary.
double value_at(const ValueMap& map, const Vec3& point);

struct TrajScore {
    int candidate_index = 0;
    double cost = 0.0;
};

TrajScore score_trajectory(const ValueMap& map, const TrajectoryCandidate& candidate);

/// candidate_index of the lowest cost; ties go to the earliest entry.
int select_trajectory(const std::vector<TrajScore>& scores);

/// Flat little-endian float32 dump plus `<path>.hdr` text sidecar.
void write_value_map(const ValueMap& map, const std::filesystem::path& path);

}  // namespace vlmpc::traj
