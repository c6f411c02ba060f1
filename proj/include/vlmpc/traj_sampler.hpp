#pragma once

// Gaussian-mixture trajectory sampling between the end-effector and the
// current sub-goal.

#include "vlmpc/sim.hpp"

#include <functional>
#include <vector>

namespace vlmpc::traj {

/// Pixel -> metric lift for the top-down camera.
struct CameraTransform {
    Vec2 scale = Vec2(0.005, 0.005);
    Vec3 offset = Vec3(-0.32, -0.32, 0.0);
    /// Surface height (meters) at a pixel center.
    std::function<double(int, int)> height_at = [](int, int) { return 0.0; };

    static CameraTransform flat(Vec2 scale, Vec3 offset, double height);
    /// Transform matching `render` with heights taken from the observation's raster.
    static CameraTransform from_observation(const sim::Observation& observation, const sim::RenderConfig& render);
};

/// Box center mapped through scale/offset to (x, y) and through the height table to z.
Vec3 lift(const sim::BoundingBox& box, const CameraTransform& transform);

/// Like lift, but z is decoded from the end-effector square's size.
Vec3 lift_end_effector(const sim::BoundingBox& box, const CameraTransform& transform,
                       const sim::RenderConfig& render);

struct GmmSpec {
    Vec3 p_init = Vec3::Zero();
    Vec3 p_end = Vec3::Zero();
    std::vector<double> lambdas;
    std::vector<Vec3> kernel_centers;
    double sigma_r = 0.03;

    [[nodiscard]] int M() const { return static_cast<int>(kernel_centers.size()); }
};

/// M kernel centers p_init + lambda (p_end - p_init) with lambda ~ U(0, 1); weights 1/M.
GmmSpec build_gmm(const Vec3& p_init, const Vec3& p_end, int M, double sigma_r, Rng& rng);

struct TrajectoryCandidate {
    std::vector<Vec3> points;
    std::vector<Vec3> subset;
    int candidate_index = 0;

    bool operator==(const TrajectoryCandidate&) const = default;
};

/// Draws n_sub mixture points, orders them along p_init -> p_end, anchors both ends
/// and resamples to n_t arc-length-uniform points.
TrajectoryCandidate sample_candidate(const GmmSpec& gmm, int n_sub, int n_t, Rng& rng, int index);

/// Per-candidate stream used by sample_batch: candidate j draws from candidate_rng(base, j).
Rng candidate_rng(std::uint64_t batch_seed, int index);

/// J candidates; one draw from `rng` seeds the batch, candidates use derived streams.
std::vector<TrajectoryCandidate> sample_batch(const GmmSpec& gmm, int J, int n_sub, int n_t, Rng& rng);

/// n points spaced uniformly in arc length along the polyline.
std::vector<Vec3> resample_polyline(const std::vector<Vec3>& polyline, int n);

double path_length(const std::vector<Vec3>& points);

}  // namespace vlmpc::traj

namespace vlmpc::traj {

struct TrajParams {
    int M = 8;
    int N_sub = 6;
    int N_T = 50;
    int J = 64;
    double sigma_r = 0.03;
    /// Executed steps between replans; the replan frequency f is its reciprocal.
    int replan_interval = 10;

    [[nodiscard]] double replan_frequency() const { return 1.0 / replan_interval; }
};

}  // namespace vlmpc::traj
