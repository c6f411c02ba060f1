#pragma once

#include "vlmpc/episode.hpp"
#include "vlmpc/value_map.hpp"

namespace vlmpc::traj {

struct PlanResult {
    Vec3 p_init = Vec3::Zero();
    Vec3 p_end = Vec3::Zero();
    std::vector<Vec3> interference;
    GmmSpec gmm;
    std::vector<TrajectoryCandidate> candidates;
    std::vector<TrajScore> scores;
    int best = 0;
    ValueMap map;
};

/// One replan: lift the report's boxes, sample J candidates, rebuild the value map
/// and pick the cheapest candidate.
PlanResult plan_once(const sim::Observation& observation, const perception::PerceptionReport& report,
                     const EpisodeConfig& config, Rng& rng);

/// Trajectory-level closed loop: replans every replan_interval steps and follows the
/// selected trajectory in between at up to d_max of arc length per step.
EpisodeTrace run_traj_episode(const EpisodeConfig& config, const sim::WorldState& world,
                              const perception::Perceiver* perceiver = nullptr);

}  // namespace vlmpc::traj
