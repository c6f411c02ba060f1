#include "vlmpc/traj_sampler.hpp"

#include <algorithm>
#include <memory>
#include <cmath>
#include <numeric>

namespace vlmpc::traj {

CameraTransform CameraTransform::flat(Vec2 scale, Vec3 offset, double height) {
    CameraTransform t;
    t.scale = scale;
    t.offset = offset;
    t.height_at = [height](int, int) { return height; };
    return t;
}

CameraTransform CameraTransform::from_observation(const sim::Observation& observation,
                                                  const sim::RenderConfig& render) {
    CameraTransform t;
    t.scale = Vec2(render.meters_per_pixel, render.meters_per_pixel);
    t.offset = Vec3(render.origin.x(), render.origin.y(), 0.0);
    const auto raster = std::make_shared<sim::HeightRaster>(observation.height);
    t.height_at = [raster](int x, int y) {
        if (raster->width == 0 || raster->height == 0) {
            return 0.0;
        }
        return raster->at(std::clamp(x, 0, raster->width - 1), std::clamp(y, 0, raster->height - 1));
    };
    return t;
}

Vec3 lift(const sim::BoundingBox& box, const CameraTransform& transform) {
    const Vec2 c = box.center();
    const double z = transform.height_at(static_cast<int>(std::floor(c.x())), static_cast<int>(std::floor(c.y())));
    return {transform.offset.x() + transform.scale.x() * c.x(), transform.offset.y() + transform.scale.y() * c.y(),
            transform.offset.z() + z};
}

Vec3 lift_end_effector(const sim::BoundingBox& box, const CameraTransform& transform,
                       const sim::RenderConfig& render) {
    Vec3 p = lift(box, transform);
    // Squares clipped by the image border lose width on one side only.
    p.z() = transform.offset.z() + render.ee_height_from_width(std::max(box.width(), box.height()));
    return p;
}

GmmSpec build_gmm(const Vec3& p_init, const Vec3& p_end, int M, double sigma_r, Rng& rng) {
    if (M < 1) {
        throw InvalidInput("GMM requires at least one kernel");
    }
    if (!(sigma_r >= 0.0)) {
        throw InvalidInput("sigma_r must be non-negative");
    }
    GmmSpec gmm;
    gmm.p_init = p_init;
    gmm.p_end = p_end;
    gmm.sigma_r = sigma_r;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int m = 0; m < M; ++m) {
        const double lambda = unit(rng);
        gmm.lambdas.push_back(lambda);
        gmm.kernel_centers.push_back(p_init + lambda * (p_end - p_init));
    }
    return gmm;
}

double path_length(const std::vector<Vec3>& points) {
    double total = 0.0;
    for (std::size_t i = 1; i < points.size(); ++i) {
        total += (points[i] - points[i - 1]).norm();
    }
    return total;
}

std::vector<Vec3> resample_polyline(const std::vector<Vec3>& polyline, int n) {
    if (polyline.empty() || n < 2) {
        throw InvalidInput("resampling needs a non-empty polyline and n >= 2");
    }
    std::vector<double> cumulative(polyline.size(), 0.0);
    for (std::size_t i = 1; i < polyline.size(); ++i) {
        cumulative[i] = cumulative[i - 1] + (polyline[i] - polyline[i - 1]).norm();
    }
    const double total = cumulative.back();
    std::vector<Vec3> out;
    out.reserve(static_cast<std::size_t>(n));
    if (total <= 0.0) {
        out.assign(static_cast<std::size_t>(n), polyline.front());
        out.back() = polyline.back();
        return out;
    }
    std::size_t seg = 1;
    for (int k = 0; k < n; ++k) {
        if (k == n - 1) {
            out.push_back(polyline.back());
            break;
        }
        const double s = total * k / (n - 1);
        while (seg + 1 < polyline.size() && cumulative[seg] < s) {
            ++seg;
        }
        const double len = cumulative[seg] - cumulative[seg - 1];
        const double t = len > 0.0 ? (s - cumulative[seg - 1]) / len : 0.0;
        out.push_back(polyline[seg - 1] + std::clamp(t, 0.0, 1.0) * (polyline[seg] - polyline[seg - 1]));
    }
    return out;
}

TrajectoryCandidate sample_candidate(const GmmSpec& gmm, int n_sub, int n_t, Rng& rng, int index) {
    if (n_sub < 1 || n_t < n_sub + 2) {
        throw InvalidInput("trajectory sampling requires n_sub >= 1 and n_t >= n_sub + 2");
    }
    if (gmm.kernel_centers.empty()) {
        throw InvalidInput("GMM has no kernels");
    }
    TrajectoryCandidate cand;
    cand.candidate_index = index;
    std::uniform_int_distribution<std::size_t> pick(0, gmm.kernel_centers.size() - 1);
    for (int i = 0; i < n_sub; ++i) {
        const Vec3& center = gmm.kernel_centers[pick(rng)];
        Vec3 p;
        for (int k = 0; k < 3; ++k) {
            p[k] = gaussian(rng, center[k], gmm.sigma_r);
        }
        cand.subset.push_back(p);
    }

    std::vector<Vec3> ordered = cand.subset;
    const Vec3 axis = gmm.p_end - gmm.p_init;
    if (axis.squaredNorm() > 0.0) {
        std::vector<double> proj;
        proj.reserve(ordered.size());
        for (const auto& p : ordered) {
            proj.push_back((p - gmm.p_init).dot(axis));
        }
        std::vector<std::size_t> idx(ordered.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return proj[a] < proj[b]; });
        std::vector<Vec3> sorted;
        sorted.reserve(ordered.size());
        for (auto i : idx) {
            sorted.push_back(ordered[i]);
        }
        ordered = std::move(sorted);
    }

    std::vector<Vec3> polyline;
    polyline.reserve(ordered.size() + 2);
    polyline.push_back(gmm.p_init);
    polyline.insert(polyline.end(), ordered.begin(), ordered.end());
    polyline.push_back(gmm.p_end);
    cand.points = resample_polyline(polyline, n_t);
    cand.points.front() = gmm.p_init;
    cand.points.back() = gmm.p_end;
    return cand;
}

Rng candidate_rng(std::uint64_t batch_seed, int index) {
    return Rng(mix_seed(batch_seed, static_cast<std::uint64_t>(index)));
}

std::vector<TrajectoryCandidate> sample_batch(const GmmSpec& gmm, int J, int n_sub, int n_t, Rng& rng) {
    if (J < 1) {
        throw InvalidInput("trajectory batch requires J >= 1");
    }
    const std::uint64_t batch_seed = rng();
    std::vector<TrajectoryCandidate> out;
    out.reserve(static_cast<std::size_t>(J));
    for (int j = 0; j < J; ++j) {
        Rng stream = candidate_rng(batch_seed, j);
        out.push_back(sample_candidate(gmm, n_sub, n_t, stream, j));
    }
    return out;
}

}  // namespace vlmpc::traj
