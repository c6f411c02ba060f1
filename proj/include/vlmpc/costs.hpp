#pragma once

// Hierarchical cost: pixel distance to the goal image, perceiver-assisted
// distance cost, and the switcher blend.

#include "vlmpc/perception.hpp"
#include "vlmpc/predictor.hpp"

#include <optional>
#include <vector>

namespace vlmpc::cost {

struct CostConfig {
    /// Caps each interference distance at interference_clamp_px so fleeing stops paying off.
    bool clamp_interference = false;
    double interference_clamp_px = 20.0;
    /// Overrides the perceiver's switch weight (full variant only).
    std::optional<double> force_w_D;
};

struct CostBreakdown {
    std::vector<double> pixel;
    std::vector<double> knowledge;
    std::vector<double> combined;
    double w_D = 1.0;
};

/// Sum over frames of the Euclidean norm of (frame - goal) over all pixels.
std::vector<double> pixel_cost(const std::vector<predictor::PredictedVideo>& videos, const sim::Image& goal);

/// Sum over frames of |c(e) - c(s)| - sum_j |c(e) - c(I_j)|, in pixel units.
std::vector<double> vlm_cost(const std::vector<predictor::PredictedVideo>& videos,
                             const perception::PerceptionReport& report, const CostConfig& config = {});

/// combined[n] = w_D * pixel[n] + (1 - w_D) * knowledge[n]; w_D must be 0, 0.5 or 1.
CostBreakdown combine(std::vector<double> pixel, std::vector<double> knowledge, double w_D);

/// Index of the minimum combined cost; ties go to the lowest index.
std::size_t select_best(const CostBreakdown& breakdown);

/// Lowest-index argmin over any cost list.
std::size_t argmin(const std::vector<double>& costs);

}  // namespace vlmpc::cost
