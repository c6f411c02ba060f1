#include "vlmpc/traj_loop.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace vlmpc::traj {

namespace {

constexpr std::uint64_t kPlanStream = 3;
constexpr std::uint64_t kPerceiverStream = 2;

// Selected trajectory being followed, with the executor's dead-reckoned position.
struct ActivePlan {
    std::vector<Vec3> points;
    std::vector<double> arc;  // cumulative arc length per point
    double progress = 0.0;
    Vec3 estimate = Vec3::Zero();
    int moving_g = 0;
    int arrival_g = 0;
    bool arrived = false;

    [[nodiscard]] double length() const { return arc.empty() ? 0.0 : arc.back(); }

    [[nodiscard]] Vec3 point_at(double s) const {
        if (points.size() == 1 || s <= 0.0) {
            return points.front();
        }
        const auto it = std::lower_bound(arc.begin(), arc.end(), s);
        if (it == arc.end()) {
            return points.back();
        }
        const std::size_t hi = static_cast<std::size_t>(it - arc.begin());
        if (hi == 0) {
            return points.front();
        }
        const double span = arc[hi] - arc[hi - 1];
        const double u = span > 0.0 ? (s - arc[hi - 1]) / span : 1.0;
        return points[hi - 1] + u * (points[hi] - points[hi - 1]);
    }
};

ActivePlan make_active(const PlanResult& plan, const Bounds3& workspace) {
    ActivePlan active;
    const auto& chosen = plan.candidates[static_cast<std::size_t>(plan.best)].points;
    active.points.reserve(chosen.size());
    for (const auto& p : chosen) {
        active.points.push_back(workspace.clamp(p));
    }
    active.arc.assign(active.points.size(), 0.0);
    for (std::size_t i = 1; i < active.points.size(); ++i) {
        active.arc[i] = active.arc[i - 1] + (active.points[i] - active.points[i - 1]).norm();
    }
    active.estimate = active.points.front();
    active.arrived = active.length() <= 0.0;
    return active;
}

double clearance_over_stages(const sim::WorldState& state, const std::vector<sim::TaskSpec>& stages) {
    double best = kInf;
    for (const auto& stage : stages) {
        best = std::min(best, sim::min_clearance(state, stage));
    }
    return best;
}

}  // namespace

PlanResult plan_once(const sim::Observation& observation, const perception::PerceptionReport& report,
                     const EpisodeConfig& config, Rng& rng) {
    const TrajParams& tp = config.trajectory;
    if (tp.M < 1 || tp.N_sub < 1 || tp.N_T < tp.N_sub + 2 || tp.J < 1 || !(tp.sigma_r >= 0.0) ||
        tp.replan_interval < 1) {
        throw InvalidInput("trajectory parameters out of range");
    }
    const CameraTransform transform = CameraTransform::from_observation(observation, config.render);
    PlanResult plan;
    plan.p_init = lift_end_effector(report.end_effector, transform, config.render);
    plan.p_end = lift(report.sub_goal.box, transform);
    for (const auto& entity : report.interference) {
        plan.interference.push_back(lift(entity.box, transform));
    }
    plan.gmm = build_gmm(plan.p_init, plan.p_end, tp.M, tp.sigma_r, rng);
    plan.candidates = sample_batch(plan.gmm, tp.J, tp.N_sub, tp.N_T, rng);
    const GridSpec grid = GridSpec::covering(observation.state_snapshot.workspace, config.voxel_size);
    plan.map = build_map(plan.p_end, plan.interference, grid, config.spread);
    plan.scores.reserve(plan.candidates.size());
    for (const auto& candidate : plan.candidates) {
        plan.scores.push_back(score_trajectory(plan.map, candidate));
    }
    plan.best = select_trajectory(plan.scores);
    return plan;
}

EpisodeTrace run_traj_episode(const EpisodeConfig& config, const sim::WorldState& world,
                              const perception::Perceiver* perceiver) {
    const std::vector<sim::TaskSpec> stages = prepare_stages(config, world);
    std::unique_ptr<perception::Perceiver> owned_perceiver;
    if (!perceiver) {
        perception::PerceiverConfig pc = config.perceiver;
        pc.seed = mix_seed(pc.seed ^ config.seed, kPerceiverStream);
        owned_perceiver = perception::make_perceiver(pc);
        perceiver = owned_perceiver.get();
    }

    Rng rng(mix_seed(config.seed, kPlanStream));
    const int T_max = config.T_max();
    const int interval = config.trajectory.replan_interval;

    EpisodeTrace trace;
    sim::WorldState state = world;
    std::size_t stage = 0;
    perception::PhaseMemory memory;
    trace.phase_history.emplace_back(0, memory.phase);
    trace.min_clearance_overall = clearance_over_stages(state, stages);

    std::optional<ActivePlan> active;
    int gripper = state.gripper_closed ? 1 : 0;
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

        StepRecord record;
        record.stage = static_cast<int>(stage);
        record.w_D = 0.0;
        record.costs.w_D = 0.0;
        const bool replan = trace.steps_used % interval == 0;
        if (replan) {
            const sim::Observation obs = sim::render(state, config.render);
            record.observation_digest = sim::digest(obs.image);
            record.perceived = true;
            ++trace.perception_calls;
            std::optional<perception::PerceptionReport> report;
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
            if (report) {
                const PlanResult plan = plan_once(obs, *report, config, rng);
                record.chosen_index = plan.best;
                for (const auto& s : plan.scores) {
                    record.costs.combined.push_back(s.cost);
                }
                active = make_active(plan, state.workspace);

                const std::string& target = report->sub_goal.id;
                const bool goal_held = state.holds(task.goal_entity);
                const sim::ObjectState* target_obj = state.find(target);
                if (!goal_held && target == task.goal_entity && task.kind != sim::TaskKind::reach &&
                    target_obj && sim::is_graspable(target_obj->kind)) {
                    // Open on the way in so arrival produces a close edge.
                    active->moving_g = 0;
                    active->arrival_g = 1;
                } else if (goal_held && task.kind == sim::TaskKind::pick_place && task.place_entity &&
                           target == *task.place_entity) {
                    active->moving_g = 1;
                    active->arrival_g = 0;
                } else {
                    active->moving_g = gripper;
                    active->arrival_g = gripper;
                }
            }
        } else {
            record.observation_digest = sim::digest(sim::render_frame(state, config.render).image);
        }

        sim::Action action;
        action.g = gripper;
        if (active && !active->arrived) {
            const double s = std::min(active->progress + config.sim.limits.d_max, active->length());
            const Vec3 target = active->point_at(s);
            action.d = (target - active->estimate).cwiseMax(-config.sim.limits.d_max).cwiseMin(config.sim.limits.d_max);
            active->estimate += action.d;
            active->progress = s;
            active->arrived = s >= active->length();
            action.g = active->arrived ? active->arrival_g : active->moving_g;
        } else if (active) {
            action.g = active->arrival_g;
        }
        gripper = action.g;
        record.action = action;

        state = sim::step(state, action, config.sim);
        const perception::Phase before = memory.phase;
        memory = perception::phase_update(perception::PerceptionReport{}, state, task, memory);
        if (memory.phase != before) {
            trace.phase_history.emplace_back(static_cast<int>(stage), memory.phase);
        }
        record.phase = memory.phase;
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

}  // namespace vlmpc::traj
