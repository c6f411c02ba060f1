#pragma once

#include "vlmpc/episode.hpp"
#include "vlmpc/predictor.hpp"

namespace vlmpc {

/// Step-wise receding-horizon loop: perceive, sample, roll out, score, execute the
/// first action, feed the winner's tail forward. Deterministic under config.seed.
/// `perceiver` and `predictor` default to the configured perceiver and the
/// kinematic surrogate.
EpisodeTrace run_episode(const EpisodeConfig& config, const sim::WorldState& world,
                         const perception::Perceiver* perceiver = nullptr,
                         const predictor::Predictor* predictor = nullptr);

}  // namespace vlmpc
