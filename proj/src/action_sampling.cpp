#include "vlmpc/action_sampling.hpp"

#include <algorithm>

namespace vlmpc::sampling {

void validate(const SamplingParams& params) {
    if (params.N < 1 || params.T < 1) {
        throw InvalidInput("sampling requires N >= 1 and T >= 1");
    }
    if ((params.sigma.array() < 0.0).any()) {
        throw InvalidInput("sampling sigma components must be non-negative");
    }
}

ActionVector to_vector(const sim::Action& action) {
    ActionVector v;
    v << action.d, action.r, static_cast<double>(action.g);
    return v;
}

SamplingMean hint_to_mean(const perception::DirectionHint& hint, const SamplingParams& params) {
    SamplingMean out;
    for (int i = 0; i < 3; ++i) {
        out.mu[i] = params.w_m * hint.d_hat[i];
        out.mu[3 + i] = params.w_r * hint.r_hat[i];
    }
    out.mu[6] = hint.g;
    return out;
}

SamplingMean blend_means(const SamplingMean& mu_vlm, const std::optional<SamplingMean>& mu_sub,
                         const SamplingParams& params) {
    SamplingMean out;
    out.mu = params.w_vlm * mu_vlm.mu;
    if (mu_sub) {
        out.mu += params.w_sub * mu_sub->mu;
    }
    out.mu[6] = std::clamp(out.mu[6], 0.0, 1.0);
    return out;
}

std::vector<ActionSequence> sample_sequences(const SamplingMean& mean, const SamplingParams& params, Rng& rng) {
    validate(params);
    std::vector<ActionSequence> out(static_cast<std::size_t>(params.N));
    for (auto& seq : out) {
        seq.reserve(static_cast<std::size_t>(params.T));
        for (int t = 0; t < params.T; ++t) {
            ActionVector v;
            for (int k = 0; k < 7; ++k) {
                v[k] = gaussian(rng, mean.mu[k], params.sigma[k]);
            }
            sim::Action a;
            a.d = v.head<3>();
            a.r = v.segment<3>(3);
            a.g = v[6] >= 0.5 ? 1 : 0;
            seq.push_back(a.clamped(params.limits));
        }
    }
    return out;
}

SamplingMean mean_from_tail(const ActionSequence& chosen) {
    SamplingMean out;
    if (chosen.size() < 2) {
        return out;
    }
    for (std::size_t i = 1; i < chosen.size(); ++i) {
        out.mu += to_vector(chosen[i]);
    }
    out.mu /= static_cast<double>(chosen.size() - 1);
    return out;
}

}  // namespace vlmpc::sampling
