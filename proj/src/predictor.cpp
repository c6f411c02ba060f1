#include "vlmpc/predictor.hpp"

#include <cstdio>
#include <fstream>

namespace vlmpc::predictor {

std::vector<PredictedVideo> KinematicPredictor::rollout(const RolloutRequest& request) const {
    if (!request.history[0] || !request.history[1]) {
        throw InvalidInput("rollout requires two history observations");
    }
    if (request.candidates.empty()) {
        throw InvalidInput("rollout requires at least one candidate");
    }
    const std::size_t horizon = request.candidates.front().size();
    for (const auto& seq : request.candidates) {
        if (seq.size() != horizon) {
            throw InvalidInput("candidate horizons differ");
        }
    }

    const sim::WorldState& start = request.history[1]->state_snapshot;
    std::vector<PredictedVideo> out(request.candidates.size());
    for (std::size_t n = 0; n < request.candidates.size(); ++n) {
        PredictedVideo& video = out[n];
        video.frames.reserve(horizon);
        video.boxes_per_frame.reserve(horizon);
        sim::WorldState state = start;
        for (const auto& action : request.candidates[n]) {
            state = sim::step(state, action, sim_);
            sim::Frame frame = sim::render_frame(state, render_);
            video.frames.push_back(std::move(frame.image));
            video.boxes_per_frame.push_back(std::move(frame.boxes));
        }
    }
    return out;
}

std::vector<TrackFrame> predicted_track(const PredictedVideo& video, const std::vector<std::string>& ids) {
    std::vector<TrackFrame> out;
    out.reserve(video.boxes_per_frame.size());
    for (std::size_t f = 0; f < video.boxes_per_frame.size(); ++f) {
        const auto& boxes = video.boxes_per_frame[f];
        TrackFrame centers;
        for (const auto& id : ids) {
            const auto it = boxes.find(id);
            if (it == boxes.end()) {
                throw InvalidInput("entity '" + id + "' missing from predicted frame " + std::to_string(f));
            }
            centers.emplace(id, it->second.center());
        }
        out.push_back(std::move(centers));
    }
    return out;
}

void dump_video_pgm(const PredictedVideo& video, const std::filesystem::path& dir, const std::string& prefix) {
    std::filesystem::create_directories(dir);
    for (std::size_t f = 0; f < video.frames.size(); ++f) {
        const auto& img = video.frames[f];
        char index[16];
        std::snprintf(index, sizeof(index), "%03zu", f);
        std::ofstream os(dir / ("frame_" + prefix + "_" + index + ".pgm"), std::ios::binary);
        os << "P5\n" << img.width << ' ' << img.height << "\n255\n";
        os.write(reinterpret_cast<const char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
    }
}

}  // namespace vlmpc::predictor
