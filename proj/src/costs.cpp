#include "vlmpc/costs.hpp"

#include <algorithm>
#include <cmath>

namespace vlmpc::cost {

std::vector<double> pixel_cost(const std::vector<predictor::PredictedVideo>& videos, const sim::Image& goal) {
    std::vector<double> out;
    out.reserve(videos.size());
    for (const auto& video : videos) {
        double total = 0.0;
        for (const auto& frame : video.frames) {
            if (frame.width != goal.width || frame.height != goal.height) {
                throw InvalidInput("predicted frame and goal image dimensions differ");
            }
            std::uint64_t sq = 0;
            for (std::size_t i = 0; i < frame.pixels.size(); ++i) {
                const int diff = static_cast<int>(frame.pixels[i]) - static_cast<int>(goal.pixels[i]);
                sq += static_cast<std::uint64_t>(diff * diff);
            }
            total += std::sqrt(static_cast<double>(sq));
        }
        out.push_back(total);
    }
    return out;
}

std::vector<double> vlm_cost(const std::vector<predictor::PredictedVideo>& videos,
                             const perception::PerceptionReport& report, const CostConfig& config) {
    const std::string ee_id(sim::kEndEffectorId);
    std::vector<std::string> ids{ee_id, report.sub_goal.id};
    for (const auto& item : report.interference) {
        ids.push_back(item.id);
    }

    std::vector<double> out;
    out.reserve(videos.size());
    for (const auto& video : videos) {
        double total = 0.0;
        for (const auto& centers : predictor::predicted_track(video, ids)) {
            const Vec2& e = centers.find(ee_id)->second;
            double term = (e - centers.find(report.sub_goal.id)->second).norm();
            for (const auto& item : report.interference) {
                double dist = (e - centers.find(item.id)->second).norm();
                if (config.clamp_interference) {
                    dist = std::min(dist, config.interference_clamp_px);
                }
                term -= dist;
            }
            total += term;
        }
        out.push_back(total);
    }
    return out;
}

CostBreakdown combine(std::vector<double> pixel, std::vector<double> knowledge, double w_D) {
    if (!perception::is_switch_weight(w_D)) {
        throw InvalidInput("switch weight must be one of 0, 0.5, 1");
    }
    if (pixel.size() != knowledge.size()) {
        throw InvalidInput("pixel and knowledge cost lists differ in length");
    }
    CostBreakdown out;
    out.w_D = w_D;
    out.combined.resize(pixel.size());
    for (std::size_t n = 0; n < pixel.size(); ++n) {
        out.combined[n] = w_D * pixel[n] + (1.0 - w_D) * knowledge[n];
    }
    out.pixel = std::move(pixel);
    out.knowledge = std::move(knowledge);
    return out;
}

std::size_t argmin(const std::vector<double>& costs) {
    if (costs.empty()) {
        throw InvalidInput("cannot select from an empty candidate list");
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < costs.size(); ++i) {
        if (costs[i] < costs[best]) {
            best = i;
        }
    }
    return best;
}

std::size_t select_best(const CostBreakdown& breakdown) {
    return argmin(breakdown.combined);
}

}  // namespace vlmpc::cost
