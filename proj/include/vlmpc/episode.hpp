#pragma once

// Configuration and trace types shared by the step-wise and trajectory
// pipelines.

#include "vlmpc/action_sampling.hpp"
#include "vlmpc/costs.hpp"
#include "vlmpc/perception.hpp"
#include "vlmpc/sim.hpp"
#include "vlmpc/value_map.hpp"

#include <filesystem>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

namespace vlmpc {

/// Ablations: RS zeroes the sampling mean, PD uses only the pixel cost, VS only the
/// perceiver-assisted cost.
enum class Variant { full, RS, PD, VS };

std::string_view to_string(Variant variant);
Variant variant_from_string(std::string_view text);

enum class Outcome { success, timeout, error };

std::string_view to_string(Outcome outcome);
Outcome outcome_from_string(std::string_view text);

struct EpisodeConfig {
    /// Tasks completed in order; the first stage's T_max bounds the whole episode.
    std::vector<sim::TaskSpec> stages;
    /// Render a staged success state per stage as the goal image.
    bool use_goal_image = false;
    sampling::SamplingParams sampling;
    cost::CostConfig cost;
    perception::PerceiverConfig perceiver;
    sim::SimConfig sim;
    sim::RenderConfig render;
    traj::TrajParams trajectory;
    traj::SpreadParams spread;
    double voxel_size = 0.01;
    Variant variant = Variant::full;
    std::uint64_t seed = 0;
    int fail_max = 5;
    std::optional<std::filesystem::path> video_dump_dir;

    [[nodiscard]] int T_max() const { return stages.empty() ? 0 : stages.front().T_max; }
};

struct StepRecord {
    std::uint64_t observation_digest = 0;
    /// Winning candidate; -1 on steps that did not select (trajectory execution between replans).
    int chosen_index = -1;
    sim::Action action;
    cost::CostBreakdown costs;
    double w_D = 0.0;
    int stage = 0;
    perception::Phase phase = perception::Phase::approach;
    bool perceived = false;
    bool perception_failed = false;
};

struct EpisodeTrace {
    std::vector<StepRecord> steps;
    Outcome outcome = Outcome::timeout;
    int steps_used = 0;
    double min_clearance_overall = kInf;
    int perception_calls = 0;
    int grasp_events = 0;
    /// (stage, phase) in the order phases were entered.
    std::vector<std::pair<int, perception::Phase>> phase_history;
    std::string error;
    sim::WorldState final_state;
};

/// Validates stages against the world and fills per-stage goal images when requested.
std::vector<sim::TaskSpec> prepare_stages(const EpisodeConfig& config, const sim::WorldState& world);

}  // namespace vlmpc
