#pragma once

// Conditional action sampling: perceiver hint -> sampling mean, blending with the
// historical mean, and Gaussian draws of candidate action sequences.

#include "vlmpc/perception.hpp"
#include "vlmpc/sim.hpp"

#include <Eigen/Core>
#include <optional>
#include <vector>

namespace vlmpc::sampling {

/// (dx, dy, dz, rx, ry, rz, g)
using ActionVector = Eigen::Matrix<double, 7, 1>;

struct SamplingParams {
    int N = 64;
    int T = 5;
    double w_m = 0.04;
    double w_r = 0.1;
    double w_vlm = 0.7;
    double w_sub = 0.3;
    ActionVector sigma = (ActionVector() << 0.02, 0.02, 0.02, 0.05, 0.05, 0.05, 0.3).finished();
    sim::ActionLimits limits;
    std::uint64_t seed = 0;
};

/// Throws InvalidInput unless N >= 1, T >= 1 and every sigma component is >= 0.
void validate(const SamplingParams& params);

struct SamplingMean {
    ActionVector mu = ActionVector::Zero();
};

using ActionSequence = std::vector<sim::Action>;

ActionVector to_vector(const sim::Action& action);

SamplingMean hint_to_mean(const perception::DirectionHint& hint, const SamplingParams& params);

/// w_vlm * mu_vlm + w_sub * mu_sub; an absent mu_sub counts as zero. Gripper clamped to [0, 1].
SamplingMean blend_means(const SamplingMean& mu_vlm, const std::optional<SamplingMean>& mu_sub,
                         const SamplingParams& params);

/// N sequences of T actions, drawn n-major then step-major then component-major.
std::vector<ActionSequence> sample_sequences(const SamplingMean& mean, const SamplingParams& params, Rng& rng);

/// Mean of actions 2..T of the chosen sequence; zero when T < 2.
SamplingMean mean_from_tail(const ActionSequence& chosen);

}  // namespace vlmpc::sampling
