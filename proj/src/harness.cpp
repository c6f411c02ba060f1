#include "vlmpc/harness.hpp"

#include "vlmpc/traj_loop.hpp"
#include "vlmpc/vlmpc_loop.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace vlmpc::harness {

using nlohmann::json;

namespace {

constexpr std::uint64_t kPlacementStream = 7;

// Field access with the dotted path carried along for diagnostics.
class Node {
public:
    Node(const json& value, std::string path) : value_(value), path_(std::move(path)) {}

    [[nodiscard]] bool has(const char* key) const {
        return value_.is_object() && value_.contains(key) && !value_.at(key).is_null();
    }
    [[nodiscard]] Node child(const char* key) const {
        if (!has(key)) {
            fail(join(key), "missing");
        }
        return {value_.at(key), join(key)};
    }
    [[nodiscard]] Node index(std::size_t i) const { return {value_.at(i), path_ + "[" + std::to_string(i) + "]"}; }
    [[nodiscard]] std::size_t size() const { return value_.size(); }
    [[nodiscard]] const json& raw() const { return value_; }
    [[nodiscard]] const std::string& path() const { return path_; }

    [[nodiscard]] double number() const {
        if (!value_.is_number()) {
            fail(path_, "expected a number");
        }
        return value_.get<double>();
    }
    [[nodiscard]] int integer() const {
        if (!value_.is_number_integer()) {
            fail(path_, "expected an integer");
        }
        return value_.get<int>();
    }
    [[nodiscard]] std::uint64_t u64() const {
        if (!value_.is_number_unsigned() && !(value_.is_number_integer() && value_.get<std::int64_t>() >= 0)) {
            fail(path_, "expected a non-negative integer");
        }
        return value_.get<std::uint64_t>();
    }
    [[nodiscard]] bool boolean() const {
        if (!value_.is_boolean()) {
            fail(path_, "expected true or false");
        }
        return value_.get<bool>();
    }
    [[nodiscard]] std::string string() const {
        if (!value_.is_string()) {
            fail(path_, "expected a string");
        }
        return value_.get<std::string>();
    }
    [[nodiscard]] Vec3 vec3() const {
        if (!value_.is_array() || value_.size() != 3) {
            fail(path_, "expected [x, y, z]");
        }
        return {index(0).number(), index(1).number(), index(2).number()};
    }
    void expect_array() const {
        if (!value_.is_array()) {
            fail(path_, "expected an array");
        }
    }

    double number_or(const char* key, double fallback) const { return has(key) ? child(key).number() : fallback; }
    int integer_or(const char* key, int fallback) const { return has(key) ? child(key).integer() : fallback; }
    bool boolean_or(const char* key, bool fallback) const { return has(key) ? child(key).boolean() : fallback; }

    [[noreturn]] static void fail(const std::string& path, const std::string& what) {
        throw ConfigError("config field '" + path + "': " + what);
    }

private:
    [[nodiscard]] std::string join(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

    const json& value_;
    std::string path_;
};

template <typename F>
auto guarded(const Node& node, F&& parse) -> decltype(parse()) {
    try {
        return parse();
    } catch (const ConfigError&) {
        throw;
    } catch (const InvalidInput& e) {
        Node::fail(node.path(), e.what());
    }
}

sim::TaskSpec parse_task(const Node& node) {
    sim::TaskSpec task;
    task.kind = guarded(node, [&] { return sim::task_kind_from_string(node.child("kind").string()); });
    task.goal_entity = node.child("goal").string();
    if (node.has("place")) {
        task.place_entity = node.child("place").string();
    }
    if (node.has("interference")) {
        const Node list = node.child("interference");
        list.expect_array();
        for (std::size_t i = 0; i < list.size(); ++i) {
            task.interference_ids.push_back(list.index(i).string());
        }
    }
    if (node.has("instruction")) {
        task.instruction = node.child("instruction").string();
    }
    task.success_radius = node.number_or("success_radius", task.success_radius);
    task.T_max = node.integer_or("T_max", task.T_max);
    if (!(task.success_radius > 0.0)) {
        Node::fail(node.path() + ".success_radius", "must be positive");
    }
    if (task.T_max < 0) {
        Node::fail(node.path() + ".T_max", "must be non-negative");
    }
    return task;
}

void parse_sampling(const Node& node, sampling::SamplingParams& p) {
    p.N = node.integer_or("N", p.N);
    p.T = node.integer_or("T", p.T);
    p.w_m = node.number_or("w_m", p.w_m);
    p.w_r = node.number_or("w_r", p.w_r);
    p.w_vlm = node.number_or("w_vlm", p.w_vlm);
    p.w_sub = node.number_or("w_sub", p.w_sub);
    if (node.has("sigma")) {
        const Node s = node.child("sigma");
        if (!s.raw().is_array() || s.size() != 7) {
            Node::fail(s.path(), "expected 7 standard deviations");
        }
        for (std::size_t i = 0; i < 7; ++i) {
            p.sigma[static_cast<Eigen::Index>(i)] = s.index(i).number();
        }
    }
    guarded(node, [&] {
        sampling::validate(p);
        return 0;
    });
}

void parse_perceiver(const Node& node, perception::PerceiverConfig& pc) {
    if (node.has("variant")) {
        const std::string v = node.child("variant").string();
        if (v == "oracle") {
            pc.variant = perception::Variant::oracle;
        } else if (v == "noisy") {
            pc.variant = perception::Variant::noisy;
        } else if (v == "remote") {
            pc.variant = perception::Variant::remote;
        } else {
            Node::fail(node.path() + ".variant", "expected oracle, noisy or remote");
        }
    }
    pc.hallucination_rate = node.number_or("hallucination_rate", pc.hallucination_rate);
    pc.direction_flip_rate = node.number_or("direction_flip_rate", pc.direction_flip_rate);
    for (double rate : {pc.hallucination_rate, pc.direction_flip_rate}) {
        if (!(rate >= 0.0 && rate <= 1.0)) {
            Node::fail(node.path(), "rates must lie in [0, 1]");
        }
    }
    if (node.has("endpoint")) {
        pc.endpoint = node.child("endpoint").string();
    }
    if (pc.variant == perception::Variant::remote && !pc.endpoint) {
        Node::fail(node.path() + ".endpoint", "required for the remote perceiver");
    }
    if (node.has("seed")) {
        pc.seed = node.child("seed").u64();
    }
    pc.deadband = node.number_or("deadband", pc.deadband);
    pc.timeout_s = node.number_or("timeout_s", pc.timeout_s);
}

void parse_placement(const Node& node, PlacementSpec& spec) {
    if (node.has("mode")) {
        const std::string mode = node.child("mode").string();
        if (mode == "none") {
            spec.mode = PlacementMode::none;
        } else if (mode == "uniform") {
            spec.mode = PlacementMode::uniform;
        } else if (mode == "jitter") {
            spec.mode = PlacementMode::jitter;
        } else {
            Node::fail(node.path() + ".mode", "expected none, uniform or jitter");
        }
    }
    spec.min_separation = node.number_or("min_separation", spec.min_separation);
    spec.margin = node.number_or("margin", spec.margin);
    spec.jitter = node.number_or("jitter", spec.jitter);
    spec.end_effector = node.boolean_or("end_effector", spec.end_effector);
    spec.max_attempts = node.integer_or("max_attempts", spec.max_attempts);
    if (node.has("ids")) {
        const Node ids = node.child("ids");
        ids.expect_array();
        for (std::size_t i = 0; i < ids.size(); ++i) {
            spec.ids.push_back(ids.index(i).string());
        }
    }
    if (spec.min_separation < 0.0 || spec.margin < 0.0 || spec.jitter < 0.0 || spec.max_attempts < 1) {
        Node::fail(node.path(), "placement distances must be non-negative and max_attempts >= 1");
    }
}

std::string format_number(double v) {
    if (!std::isfinite(v)) {
        return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

json number_or_string(double v) {
    if (std::isfinite(v)) {
        return v;
    }
    return format_number(v);
}

double number_from_json(const json& j) {
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "inf") {
            return kInf;
        }
        if (s == "-inf") {
            return -kInf;
        }
        throw InvalidInput("unexpected numeric string '" + s + "'");
    }
    return j.get<double>();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << text;
}

}  // namespace

std::string_view to_string(Pipeline pipeline) { return pipeline == Pipeline::vlmpc ? "vlmpc" : "traj"; }

Pipeline pipeline_from_string(std::string_view text) {
    if (text == "vlmpc") {
        return Pipeline::vlmpc;
    }
    if (text == "traj") {
        return Pipeline::traj;
    }
    throw InvalidInput("unknown pipeline '" + std::string(text) + "' (expected vlmpc or traj)");
}

ScenarioConfig parse_config(const json& doc) {
    const Node root(doc, "");
    if (!doc.is_object()) {
        Node::fail("<root>", "expected an object");
    }
    if (root.integer_or("format", 1) != 1) {
        Node::fail("format", "unsupported version");
    }
    ScenarioConfig cfg;
    if (root.has("seed")) {
        cfg.seed = root.child("seed").u64();
    }
    sim::WorldState& world = cfg.world;
    if (root.has("workspace")) {
        const Node ws = root.child("workspace");
        world.workspace.min = ws.child("min").vec3();
        world.workspace.max = ws.child("max").vec3();
        if (!(world.workspace.min.array() < world.workspace.max.array()).all()) {
            Node::fail("workspace", "min must be below max on every axis");
        }
    }
    if (root.has("end_effector")) {
        const Node ee = root.child("end_effector");
        if (ee.has("position")) {
            world.ee_position = ee.child("position").vec3();
        }
        world.gripper_closed = ee.boolean_or("gripper_closed", false);
    }
    world.ee_position = world.workspace.clamp(world.ee_position);

    const Node objects = root.child("objects");
    objects.expect_array();
    for (std::size_t i = 0; i < objects.size(); ++i) {
        const Node o = objects.index(i);
        sim::ObjectState obj;
        obj.id = o.child("id").string();
        obj.kind = guarded(o, [&] { return sim::object_kind_from_string(o.child("kind").string()); });
        obj.position = o.child("position").vec3();
        obj.radius = o.number_or("radius", obj.radius);
        obj.color_index = o.integer_or("color", obj.color_index);
        if (obj.color_index < 3 || obj.color_index > 255) {
            Node::fail(o.path() + ".color", "palette index must lie in [3, 255]");
        }
        world.objects.push_back(std::move(obj));
    }
    guarded(objects, [&] {
        sim::validate(world);
        return 0;
    });

    EpisodeConfig& ep = cfg.episode;
    ep.stages.push_back(parse_task(root.child("task")));
    if (root.has("followups")) {
        const Node f = root.child("followups");
        f.expect_array();
        for (std::size_t i = 0; i < f.size(); ++i) {
            ep.stages.push_back(parse_task(f.index(i)));
        }
    }
    for (std::size_t i = 0; i < ep.stages.size(); ++i) {
        const Node where = i == 0 ? root.child("task") : root.child("followups").index(i - 1);
        guarded(where, [&] {
            sim::validate(ep.stages[i], world);
            return 0;
        });
    }
    if (root.has("goal_input")) {
        const std::string gi = root.child("goal_input").string();
        if (gi != "image" && gi != "language") {
            Node::fail("goal_input", "expected image or language");
        }
        ep.use_goal_image = gi == "image";
    }
    if (root.has("randomize_placement")) {
        parse_placement(root.child("randomize_placement"), cfg.placement);
    }
    for (const auto& id : cfg.placement.ids) {
        if (!world.find(id)) {
            Node::fail("randomize_placement.ids", "unknown object '" + id + "'");
        }
    }
    if (root.has("sim")) {
        const Node s = root.child("sim");
        ep.sim.limits.d_max = s.number_or("d_max", ep.sim.limits.d_max);
        ep.sim.limits.r_max = s.number_or("r_max", ep.sim.limits.r_max);
        ep.sim.grasp_radius = s.number_or("grasp_radius", ep.sim.grasp_radius);
        if (!(ep.sim.limits.d_max > 0.0 && ep.sim.limits.r_max > 0.0 && ep.sim.grasp_radius > 0.0)) {
            Node::fail("sim", "limits and grasp_radius must be positive");
        }
    }
    ep.sampling.limits = ep.sim.limits;
    if (root.has("sampling")) {
        parse_sampling(root.child("sampling"), ep.sampling);
    }
    ep.perceiver.grasp_radius = ep.sim.grasp_radius;
    if (root.has("perceiver")) {
        parse_perceiver(root.child("perceiver"), ep.perceiver);
    }
    if (root.has("cost")) {
        const Node c = root.child("cost");
        ep.cost.clamp_interference = c.boolean_or("clamp_interference", ep.cost.clamp_interference);
        ep.cost.interference_clamp_px = c.number_or("interference_clamp_px", ep.cost.interference_clamp_px);
        if (c.has("force_w_D")) {
            const double w = c.child("force_w_D").number();
            if (!perception::is_switch_weight(w)) {
                Node::fail("cost.force_w_D", "must be 0, 0.5 or 1");
            }
            ep.cost.force_w_D = w;
        }
    }
    if (root.has("trajectory")) {
        const Node t = root.child("trajectory");
        auto& tp = ep.trajectory;
        tp.M = t.integer_or("M", tp.M);
        tp.N_sub = t.integer_or("N_sub", tp.N_sub);
        tp.N_T = t.integer_or("N_T", tp.N_T);
        tp.J = t.integer_or("J", tp.J);
        tp.sigma_r = t.number_or("sigma_r", tp.sigma_r);
        if (t.has("f")) {
            const double f = t.child("f").number();
            if (!(f > 0.0 && f <= 1.0)) {
                Node::fail("trajectory.f", "must lie in (0, 1]");
            }
            tp.replan_interval = static_cast<int>(std::lround(1.0 / f));
        }
        if (tp.M < 1 || tp.N_sub < 1 || tp.N_T < tp.N_sub + 2 || tp.J < 1 || !(tp.sigma_r >= 0.0)) {
            Node::fail("trajectory", "need M >= 1, N_sub >= 1, N_T >= N_sub + 2, J >= 1, sigma_r >= 0");
        }
    }
    if (root.has("value_map")) {
        const Node v = root.child("value_map");
        ep.voxel_size = v.number_or("voxel_size", ep.voxel_size);
        ep.spread.sigma_s = v.number_or("sigma_s", ep.spread.sigma_s);
        ep.spread.sigma_I = v.number_or("sigma_I", ep.spread.sigma_I);
        if (!(ep.voxel_size > 0.0 && ep.spread.sigma_s > 0.0 && ep.spread.sigma_I > 0.0)) {
            Node::fail("value_map", "voxel_size, sigma_s and sigma_I must be positive");
        }
    }
    if (root.has("render")) {
        const Node r = root.child("render");
        ep.render.draw_arm = r.boolean_or("draw_arm", ep.render.draw_arm);
    }
    ep.fail_max = root.integer_or("fail_max", ep.fail_max);
    if (ep.fail_max < 0) {
        Node::fail("fail_max", "must be non-negative");
    }
    return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config " + path.string());
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
    }
    return parse_config(doc);
}

sim::WorldState place_objects(const ScenarioConfig& config, std::uint64_t episode_seed) {
    const PlacementSpec& spec = config.placement;
    if (spec.mode == PlacementMode::none) {
        return config.world;
    }
    Rng rng(mix_seed(episode_seed, kPlacementStream));
    const Bounds3& ws = config.world.workspace;
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    auto movable = [&](const sim::ObjectState& obj) {
        return spec.ids.empty() || std::find(spec.ids.begin(), spec.ids.end(), obj.id) != spec.ids.end();
    };
    auto propose = [&](const Vec3& base) {
        Vec3 p = base;
        if (spec.mode == PlacementMode::uniform) {
            p.x() = ws.min.x() + spec.margin + unit(rng) * (ws.max.x() - ws.min.x() - 2 * spec.margin);
            p.y() = ws.min.y() + spec.margin + unit(rng) * (ws.max.y() - ws.min.y() - 2 * spec.margin);
        } else {
            p.x() += spec.jitter * (2 * unit(rng) - 1);
            p.y() += spec.jitter * (2 * unit(rng) - 1);
        }
        return ws.clamp(p);
    };

    for (int attempt = 0; attempt < spec.max_attempts; ++attempt) {
        sim::WorldState world = config.world;
        if (spec.end_effector) {
            world.ee_position = propose(world.ee_position);
        }
        for (auto& obj : world.objects) {
            if (movable(obj)) {
                obj.position = propose(obj.position);
            }
        }
        std::vector<Vec2> points;
        if (spec.end_effector) {
            points.emplace_back(world.ee_position.head<2>());
        }
        for (const auto& obj : world.objects) {
            points.emplace_back(obj.position.head<2>());
        }
        bool ok = true;
        for (std::size_t a = 0; a < points.size() && ok; ++a) {
            for (std::size_t b = a + 1; b < points.size() && ok; ++b) {
                ok = (points[a] - points[b]).norm() >= spec.min_separation;
            }
        }
        if (ok) {
            return world;
        }
    }
    throw ConfigError("config field 'randomize_placement': no placement satisfies min_separation after " +
                      std::to_string(spec.max_attempts) + " attempts");
}

std::string task_label(const EpisodeConfig& episode) {
    std::string label;
    for (const auto& stage : episode.stages) {
        if (!label.empty()) {
            label += '+';
        }
        label += sim::to_string(stage.kind);
    }
    return label;
}

EpisodeTrace run_single(const ScenarioConfig& config, Pipeline pipeline, Variant variant,
                        std::uint64_t episode_seed) {
    EpisodeConfig ep = config.episode;
    ep.variant = variant;
    ep.seed = episode_seed;
    const sim::WorldState world = place_objects(config, episode_seed);
    try {
        return pipeline == Pipeline::vlmpc ? run_episode(ep, world) : traj::run_traj_episode(ep, world);
    } catch (const perception::TransportError& e) {
        // Only reachable when the perceiver cannot even be constructed.
        EpisodeTrace trace;
        trace.outcome = Outcome::error;
        trace.error = e.what();
        trace.final_state = world;
        return trace;
    }
}

EpisodeSummary summarize(int index, std::uint64_t seed, const EpisodeTrace& trace) {
    EpisodeSummary s;
    s.index = index;
    s.seed = seed;
    s.outcome = trace.outcome;
    s.steps_used = trace.steps_used;
    s.min_clearance = trace.min_clearance_overall;
    s.perception_calls = trace.perception_calls;
    s.grasp_events = trace.grasp_events;
    return s;
}

MetricsRow aggregate(const std::string& task, Pipeline pipeline, Variant variant,
                     const std::vector<EpisodeSummary>& episodes) {
    MetricsRow row;
    row.task = task;
    row.pipeline = pipeline;
    row.variant = variant;
    row.episodes = static_cast<int>(episodes.size());
    if (episodes.empty()) {
        return row;
    }
    double successes = 0.0;
    double steps = 0.0;
    double calls = 0.0;
    double clearance = 0.0;
    int finite = 0;
    for (const auto& e : episodes) {
        successes += e.outcome == Outcome::success ? 1.0 : 0.0;
        steps += e.steps_used;
        calls += e.perception_calls;
        if (std::isfinite(e.min_clearance)) {
            clearance += e.min_clearance;
            ++finite;
        }
    }
    const double n = static_cast<double>(episodes.size());
    row.success_rate = successes / n;
    row.mean_steps = steps / n;
    row.mean_perception_calls = calls / n;
    row.mean_min_clearance = finite > 0 ? clearance / finite : kInf;
    return row;
}

std::string metrics_csv(const std::vector<MetricsRow>& rows) {
    std::string out = "task,pipeline,variant,episodes,success_rate,mean_steps,mean_min_clearance,mean_perception_calls\n";
    for (const auto& r : rows) {
        out += r.task + ',' + std::string(to_string(r.pipeline)) + ',' + std::string(to_string(r.variant)) + ',' +
               std::to_string(r.episodes) + ',' + format_number(r.success_rate) + ',' + format_number(r.mean_steps) +
               ',' + format_number(r.mean_min_clearance) + ',' + format_number(r.mean_perception_calls) + '\n';
    }
    return out;
}

std::string episodes_csv(const std::vector<EpisodeSummary>& episodes) {
    std::string out = "episode,seed,outcome,steps_used,min_clearance,perception_calls,grasp_events\n";
    for (const auto& e : episodes) {
        out += std::to_string(e.index) + ',' + std::to_string(e.seed) + ',' + std::string(to_string(e.outcome)) +
               ',' + std::to_string(e.steps_used) + ',' + format_number(e.min_clearance) + ',' +
               std::to_string(e.perception_calls) + ',' + std::to_string(e.grasp_events) + '\n';
    }
    return out;
}

json trace_to_json(const EpisodeTrace& trace, const EpisodeSummary& summary, const MetricsRow& batch) {
    json j;
    j["episode"] = summary.index;
    j["seed"] = summary.seed;
    j["task"] = batch.task;
    j["pipeline"] = to_string(batch.pipeline);
    j["variant"] = to_string(batch.variant);
    j["outcome"] = to_string(trace.outcome);
    j["steps_used"] = trace.steps_used;
    j["min_clearance_overall"] = number_or_string(trace.min_clearance_overall);
    j["perception_calls"] = trace.perception_calls;
    j["grasp_events"] = trace.grasp_events;
    j["error"] = trace.error;
    json phases = json::array();
    for (const auto& [stage, phase] : trace.phase_history) {
        phases.push_back({stage, perception::to_string(phase)});
    }
    j["phase_history"] = std::move(phases);
    json steps = json::array();
    for (const auto& s : trace.steps) {
        char digest[17];
        std::snprintf(digest, sizeof digest, "%016llx", static_cast<unsigned long long>(s.observation_digest));
        json step;
        step["digest"] = digest;
        step["chosen"] = s.chosen_index;
        step["action"] = {{"d", {s.action.d.x(), s.action.d.y(), s.action.d.z()}},
                          {"r", {s.action.r.x(), s.action.r.y(), s.action.r.z()}},
                          {"g", s.action.g}};
        json costs;
        costs["candidates"] = s.costs.combined.size();
        if (s.chosen_index >= 0 && static_cast<std::size_t>(s.chosen_index) < s.costs.combined.size()) {
            const auto k = static_cast<std::size_t>(s.chosen_index);
            costs["combined"] = s.costs.combined[k];
            if (k < s.costs.pixel.size()) {
                costs["pixel"] = s.costs.pixel[k];
            }
            if (k < s.costs.knowledge.size()) {
                costs["knowledge"] = s.costs.knowledge[k];
            }
        }
        step["costs"] = std::move(costs);
        step["w_D"] = s.w_D;
        step["stage"] = s.stage;
        step["phase"] = perception::to_string(s.phase);
        step["perceived"] = s.perceived;
        step["perception_failed"] = s.perception_failed;
        steps.push_back(std::move(step));
    }
    j["steps"] = std::move(steps);
    return j;
}

BatchResult run_batch(const BatchSpec& spec) {
    if (spec.episodes < 1) {
        throw InvalidInput("episodes must be >= 1");
    }
    BatchResult result;
    const std::string label = task_label(spec.config.episode);
    result.traces.reserve(static_cast<std::size_t>(spec.episodes));
    for (int i = 0; i < spec.episodes; ++i) {
        const std::uint64_t seed = spec.seed_base + static_cast<std::uint64_t>(i);
        result.traces.push_back(run_single(spec.config, spec.pipeline, spec.variant, seed));
        result.episodes.push_back(summarize(i, seed, result.traces.back()));
    }
    result.metrics = aggregate(label, spec.pipeline, spec.variant, result.episodes);

    if (spec.output_dir) {
        const auto& dir = *spec.output_dir;
        std::filesystem::create_directories(dir / "traces");
        write_file(dir / "metrics.csv", metrics_csv({result.metrics}));
        write_file(dir / "episodes.csv", episodes_csv(result.episodes));
        for (std::size_t i = 0; i < result.traces.size(); ++i) {
            char name[32];
            std::snprintf(name, sizeof name, "episode_%04zu.json", i);
            write_file(dir / "traces" / name,
                       trace_to_json(result.traces[i], result.episodes[i], result.metrics).dump(1) + "\n");
        }
    }
    return result;
}

MetricsRow metrics_from_traces(const std::filesystem::path& batch_dir) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(batch_dir / "traces")) {
        if (entry.path().extension() == ".json") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) {
        throw InvalidInput("no traces under " + (batch_dir / "traces").string());
    }
    std::vector<EpisodeSummary> episodes;
    std::string task;
    Pipeline pipeline = Pipeline::vlmpc;
    Variant variant = Variant::full;
    for (const auto& file : files) {
        std::ifstream in(file);
        const json j = json::parse(in);
        EpisodeSummary s;
        s.index = j.at("episode").get<int>();
        s.seed = j.at("seed").get<std::uint64_t>();
        s.outcome = outcome_from_string(j.at("outcome").get<std::string>());
        s.steps_used = j.at("steps_used").get<int>();
        s.min_clearance = number_from_json(j.at("min_clearance_overall"));
        s.perception_calls = j.at("perception_calls").get<int>();
        s.grasp_events = j.at("grasp_events").get<int>();
        task = j.at("task").get<std::string>();
        pipeline = pipeline_from_string(j.at("pipeline").get<std::string>());
        variant = variant_from_string(j.at("variant").get<std::string>());
        episodes.push_back(s);
    }
    return aggregate(task, pipeline, variant, episodes);
}

std::vector<MetricsRow> compare_pipelines(const std::vector<BatchSpec>& specs,
                                          const std::optional<std::filesystem::path>& output_dir) {
    if (specs.empty()) {
        throw InvalidInput("compare needs at least one spec");
    }
    std::map<Pipeline, std::set<std::string>> tasks;
    for (const auto& spec : specs) {
        tasks[spec.pipeline].insert(task_label(spec.config.episode));
    }
    for (const auto& [pipeline, set] : tasks) {
        if (set != tasks.begin()->second) {
            throw InvalidInput("pipelines cover different task sets; '" + std::string(to_string(pipeline)) +
                               "' differs from '" + std::string(to_string(tasks.begin()->first)) + "'");
        }
    }
    std::vector<MetricsRow> rows;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        BatchSpec spec = specs[i];
        if (output_dir) {
            char name[64];
            std::snprintf(name, sizeof name, "batch_%02zu", i);
            spec.output_dir = *output_dir / name;
        }
        rows.push_back(run_batch(spec).metrics);
    }
    if (output_dir) {
        std::filesystem::create_directories(*output_dir);
        write_file(*output_dir / "comparison.csv", metrics_csv(rows));
    }
    return rows;
}

void dump_value_map(const ScenarioConfig& config, const std::filesystem::path& out) {
    const sim::WorldState world = place_objects(config, config.seed);
    const auto stages = prepare_stages(config.episode, world);
    perception::PerceiverConfig pc = config.episode.perceiver;
    pc.variant = perception::Variant::oracle;
    const perception::OraclePerceiver oracle(pc);
    const sim::Observation obs = sim::render(world, config.episode.render);
    const perception::PerceptionReport report = oracle.perceive(obs, stages.front(), {});
    Rng rng(mix_seed(config.seed, 3));
    const traj::PlanResult plan = traj::plan_once(obs, report, config.episode, rng);
    if (out.has_parent_path()) {
        std::filesystem::create_directories(out.parent_path());
    }
    traj::write_value_map(plan.map, out);
}

}  // namespace vlmpc::harness
