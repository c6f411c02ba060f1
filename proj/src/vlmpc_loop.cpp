#include "vlmpc/vlmpc_loop.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>

namespace vlmpc {

namespace {

constexpr std::uint64_t kSamplingStream = 1;
constexpr std::uint64_t kPerceiverStream = 2;

double clearance_over_stages(const sim::WorldState& state, const std::vector<sim::TaskSpec>& stages) {
    double best = kInf;
    for (const auto& stage : stages) {
        best = std::min(best, sim::min_clearance(state, stage));
    }
    return best;
}

double resolve_w_D(const EpisodeConfig& config, bool has_goal, double perceived) {
    if (!has_goal) {
        return 0.0;
    }
    switch (config.variant) {
        case Variant::PD:
            return 1.0;
        case Variant::VS:
            return 0.0;
        case Variant::full:
        case Variant::RS:
            break;
    }
    return config.cost.force_w_D.value_or(perceived);
}

}  // namespace

EpisodeTrace run_episode(const EpisodeConfig& config, const sim::WorldState& world,
                         const perception::Perceiver* perceiver, const predictor::Predictor* predictor) {
    const std::vector<sim::TaskSpec> stages = prepare_stages(config, world);
    sampling::validate(config.sampling);
    if (config.variant == Variant::PD && !config.use_goal_image) {
        throw InvalidInput("variant PD needs a goal image");
    }
    if (config.cost.force_w_D && !perception::is_switch_weight(*config.cost.force_w_D)) {
        throw InvalidInput("cost.force_w_D must be 0, 0.5 or 1");
    }

    std::unique_ptr<perception::Perceiver> owned_perceiver;
    if (!perceiver) {
        perception::PerceiverConfig pc = config.perceiver;
        pc.seed = mix_seed(pc.seed ^ config.seed, kPerceiverStream);
        owned_perceiver = perception::make_perceiver(pc);
        perceiver = owned_perceiver.get();
    }
    std::optional<predictor::KinematicPredictor> owned_predictor;
    if (!predictor) {
        owned_predictor.emplace(config.sim, config.render);
        predictor = &*owned_predictor;
    }

    Rng rng(mix_seed(config.seed, kSamplingStream));
    const int T_max = config.T_max();
    const int n = config.sampling.N;

    EpisodeTrace trace;
    sim::WorldState state = world;
    std::size_t stage = 0;
    perception::PhaseMemory memory;
    trace.phase_history.emplace_back(0, memory.phase);
    trace.min_clearance_overall = clearance_over_stages(state, stages);

    std::optional<sim::Observation> previous_obs;
    std::array<sim::Action, 2> executed{};
    std::optional<sampling::SamplingMean> mu_sub;
    std::optional<perception::PerceptionReport> last_report;
    std::optional<double> last_w_D;
    int consecutive_failures = 0;

    while (true) {
        while (stage < stages.size() && sim::check_success(state, stages[stage])) {
            trace.grasp_events += memory.grasp_events;
            ++stage;
            memory = perception::PhaseMemory{};
            if (stage < stages.size()) {
                trace.phase_history.emplace_back(static_cast<int>(stage), memory.phase);
            }
        }
        if (stage == stages.size()) {
            trace.outcome = Outcome::success;
            break;
        }
        if (trace.steps_used >= T_max) {
            trace.outcome = Outcome::timeout;
            break;
        }
        const sim::TaskSpec& task = stages[stage];
        const bool has_goal = task.goal_image.has_value();

        sim::Observation obs = sim::render(state, config.render);
        StepRecord record;
        record.observation_digest = sim::digest(obs.image);
        record.stage = static_cast<int>(stage);
        record.perceived = true;

        std::optional<perception::PerceptionReport> report;
        ++trace.perception_calls;
        try {
            report = perceiver->perceive(obs, task, memory);
            consecutive_failures = 0;
        } catch (const perception::TransportError& e) {
            record.perception_failed = true;
            if (++consecutive_failures > config.fail_max) {
                trace.outcome = Outcome::error;
                trace.error = e.what();
                break;
            }
        }

        sampling::SamplingMean mu_vlm;
        if (report && config.variant != Variant::RS) {
            mu_vlm = sampling::hint_to_mean(report->hint, config.sampling);
        }
        sampling::SamplingMean mean;
        if (config.variant != Variant::RS) {
            mean = sampling::blend_means(mu_vlm, mu_sub, config.sampling);
        }
        std::vector<sampling::ActionSequence> candidates = sampling::sample_sequences(mean, config.sampling, rng);

        predictor::RolloutRequest request;
        request.history = {previous_obs ? &*previous_obs : &obs, &obs};
        request.executed = executed;
        request.candidates = candidates;
        const std::vector<predictor::PredictedVideo> videos = predictor->rollout(request);

        const double perceived_w = report ? report->switch_weight : last_w_D.value_or(has_goal ? 1.0 : 0.0);
        const double w_D = resolve_w_D(config, has_goal, perceived_w);
        const perception::PerceptionReport* active = report ? &*report : (last_report ? &*last_report : nullptr);

        std::vector<double> pixel = (has_goal && w_D > 0.0) ? cost::pixel_cost(videos, *task.goal_image)
                                                            : std::vector<double>(n, 0.0);
        std::vector<double> knowledge = (active && w_D < 1.0) ? cost::vlm_cost(videos, *active, config.cost)
                                                              : std::vector<double>(n, 0.0);
        record.costs = cost::combine(std::move(pixel), std::move(knowledge), w_D);
        record.w_D = w_D;
        const std::size_t best = cost::select_best(record.costs);
        record.chosen_index = static_cast<int>(best);
        record.action = candidates[best].front();

        if (config.video_dump_dir) {
            char prefix[32];
            std::snprintf(prefix, sizeof prefix, "s%04d", trace.steps_used);
            predictor::dump_video_pgm(videos[best], *config.video_dump_dir, prefix);
        }

        state = sim::step(state, record.action, config.sim);
        mu_sub = sampling::mean_from_tail(candidates[best]);
        const perception::Phase before = memory.phase;
        memory = perception::phase_update(active ? *active : perception::PerceptionReport{}, state, task, memory);
        if (memory.phase != before) {
            trace.phase_history.emplace_back(static_cast<int>(stage), memory.phase);
        }
        record.phase = memory.phase;

        executed = {executed[1], record.action};
        previous_obs = std::move(obs);
        if (report) {
            last_report = std::move(report);
        }
        last_w_D = w_D;
        trace.min_clearance_overall = std::min(trace.min_clearance_overall, clearance_over_stages(state, stages));
        trace.steps.push_back(std::move(record));
        ++trace.steps_used;
    }
    if (trace.outcome != Outcome::success) {
        trace.grasp_events += memory.grasp_events;
    }
    trace.final_state = state;
    return trace;
}

}  // namespace vlmpc
