#pragma once

// Action-conditioned rollout. The kinematic surrogate threads the simulator state
// from the latest history frame, but consumes the same inputs a learned
// two-frame video predictor would.

#include "vlmpc/action_sampling.hpp"
#include "vlmpc/sim.hpp"

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace vlmpc::predictor {

struct RolloutRequest {
    /// (O_{t-1}, O_t); at t = 0 both are the first observation.
    std::array<const sim::Observation*, 2> history{nullptr, nullptr};
    /// (a_{t-1}, a_t); zero actions before the episode starts.
    std::array<sim::Action, 2> executed{};
    std::vector<sampling::ActionSequence> candidates;
};

struct PredictedVideo {
    std::vector<sim::Image> frames;
    std::vector<sim::BoxMap> boxes_per_frame;

    bool operator==(const PredictedVideo&) const = default;
};

class Predictor {
public:
    virtual ~Predictor() = default;
    /// One video per candidate, in candidate order.
    virtual std::vector<PredictedVideo> rollout(const RolloutRequest& request) const = 0;
};

class KinematicPredictor : public Predictor {
public:
    KinematicPredictor(sim::SimConfig sim, sim::RenderConfig render) : sim_(sim), render_(render) {}
    std::vector<PredictedVideo> rollout(const RolloutRequest& request) const override;

private:
    sim::SimConfig sim_;
    sim::RenderConfig render_;
};

using TrackFrame = std::map<std::string, Vec2, std::less<>>;

/// Box centers of `ids` in every frame. Throws InvalidInput naming the id and
/// frame index when an entity is missing.
std::vector<TrackFrame> predicted_track(const PredictedVideo& video, const std::vector<std::string>& ids);

/// Writes frame_<prefix>_<nnn>.pgm (binary P5, raw palette indices) into `dir`.
void dump_video_pgm(const PredictedVideo& video, const std::filesystem::path& dir, const std::string& prefix);

}  // namespace vlmpc::predictor
