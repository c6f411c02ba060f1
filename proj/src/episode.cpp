#include "vlmpc/episode.hpp"

#include <array>

namespace vlmpc {

namespace {
constexpr std::array<std::string_view, 4> kVariantNames{"full", "RS", "PD", "VS"};
constexpr std::array<std::string_view, 3> kOutcomeNames{"success", "timeout", "error"};
}  // namespace

std::string_view to_string(Variant variant) { return kVariantNames[static_cast<std::size_t>(variant)]; }

Variant variant_from_string(std::string_view text) {
    for (std::size_t i = 0; i < kVariantNames.size(); ++i) {
        if (kVariantNames[i] == text) {
            return static_cast<Variant>(i);
        }
    }
    throw InvalidInput("unknown variant '" + std::string(text) + "' (expected full, RS, PD or VS)");
}

std::string_view to_string(Outcome outcome) { return kOutcomeNames[static_cast<std::size_t>(outcome)]; }

Outcome outcome_from_string(std::string_view text) {
    for (std::size_t i = 0; i < kOutcomeNames.size(); ++i) {
        if (kOutcomeNames[i] == text) {
            return static_cast<Outcome>(i);
        }
    }
    throw InvalidInput("unknown outcome '" + std::string(text) + "'");
}

std::vector<sim::TaskSpec> prepare_stages(const EpisodeConfig& config, const sim::WorldState& world) {
    if (config.stages.empty()) {
        throw InvalidInput("episode has no task");
    }
    if (config.fail_max < 0) {
        throw InvalidInput("fail_max must be non-negative");
    }
    sim::validate(world);
    std::vector<sim::TaskSpec> stages = config.stages;
    sim::WorldState staged = world;
    for (auto& stage : stages) {
        sim::validate(stage, world);
        if (config.use_goal_image) {
            staged = sim::staged_success(staged, stage);
            stage.goal_image = sim::render_frame(staged, config.render).image;
        } else {
            stage.goal_image.reset();
        }
    }
    return stages;
}

}  // namespace vlmpc
