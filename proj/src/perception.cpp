#include "vlmpc/perception.hpp"

#include <httplib.h>

#include <algorithm>
#include <atomic>
#include <cmath>

namespace vlmpc::perception {

using sim::kEndEffectorId;
using sim::ObjectKind;
using sim::TaskKind;

bool in_alphabet(const DirectionHint& hint) {
    auto ok = [](int v) { return v == -1 || v == 0 || v == 1; };
    return std::all_of(hint.d_hat.begin(), hint.d_hat.end(), ok) &&
           std::all_of(hint.r_hat.begin(), hint.r_hat.end(), ok) && (hint.g == 0 || hint.g == 1);
}

bool is_switch_weight(double w) {
    return w == 0.0 || w == 0.5 || w == 1.0;
}

std::string_view to_string(Phase phase) {
    switch (phase) {
        case Phase::approach:
            return "approach";
        case Phase::transport:
            return "transport";
        case Phase::release:
            return "release";
        case Phase::wipe:
            return "wipe";
    }
    return "approach";
}

Phase phase_from_string(std::string_view text) {
    for (auto p : {Phase::approach, Phase::transport, Phase::release, Phase::wipe}) {
        if (to_string(p) == text) {
            return p;
        }
    }
    throw InvalidInput("unknown phase '" + std::string(text) + "'");
}

namespace {

bool mark_pending(const sim::ObjectState& obj, const sim::TaskSpec& task) {
    return obj.kind == ObjectKind::surface_mark && obj.closest_wipe > task.success_radius;
}

int remaining_subgoals(const sim::WorldState& state, const sim::TaskSpec& task) {
    const bool held = state.holds(task.goal_entity);
    switch (task.kind) {
        case TaskKind::reach:
        case TaskKind::grasp:
            return 1;
        case TaskKind::pick_place:
            return held ? 1 : 2;
        case TaskKind::wipe: {
            const auto marks = std::count_if(state.objects.begin(), state.objects.end(),
                                             [&](const auto& obj) { return mark_pending(obj, task); });
            return static_cast<int>(marks) + (held ? 0 : 1);
        }
    }
    return 1;
}

int sign_with_deadband(double diff, double deadband) {
    if (std::abs(diff) <= deadband) {
        return 0;
    }
    return diff > 0.0 ? 1 : -1;
}

}  // namespace

std::string current_target(const sim::WorldState& state, const sim::TaskSpec& task) {
    const bool held = state.holds(task.goal_entity);
    switch (task.kind) {
        case TaskKind::reach:
        case TaskKind::grasp:
            return task.goal_entity;
        case TaskKind::pick_place:
            return held ? task.place_entity.value() : task.goal_entity;
        case TaskKind::wipe: {
            if (!held) {
                return task.goal_entity;
            }
            const sim::ObjectState* best = nullptr;
            double best_dist = kInf;
            for (const auto& obj : state.objects) {
                if (!mark_pending(obj, task)) {
                    continue;
                }
                const double dist = (obj.position - state.ee_position).norm();
                if (dist < best_dist) {
                    best_dist = dist;
                    best = &obj;
                }
            }
            return best ? best->id : task.goal_entity;
        }
    }
    return task.goal_entity;
}

PerceptionReport OraclePerceiver::perceive(const sim::Observation& observation, const sim::TaskSpec& task,
                                           const PhaseMemory& /*memory*/) const {
    const sim::WorldState& state = observation.state_snapshot;
    auto box_of = [&](std::string_view id) -> const sim::BoundingBox& {
        const auto it = observation.boxes.find(id);
        if (it == observation.boxes.end()) {
            throw InvalidInput("observation has no box for '" + std::string(id) + "'");
        }
        return it->second;
    };

    PerceptionReport report;
    report.end_effector = box_of(kEndEffectorId);
    const std::string target = current_target(state, task);
    report.sub_goal = {target, box_of(target)};
    for (const auto& id : task.interference_ids) {
        if (observation.boxes.find(id) != observation.boxes.end()) {
            report.interference.push_back({id, box_of(id)});
        }
    }

    const Vec3 diff = state.at(target).position - state.ee_position;
    for (int i = 0; i < 3; ++i) {
        report.hint.d_hat[i] = sign_with_deadband(diff[i], config_.deadband);
    }

    const bool held = state.holds(task.goal_entity);
    const Vec3& ee = state.ee_position;
    if (!held) {
        const bool graspable_goal = task.kind != TaskKind::reach && target == task.goal_entity;
        report.hint.g = graspable_goal && (state.at(target).position - ee).norm() <= config_.grasp_radius ? 1 : 0;
    } else if (task.kind == TaskKind::pick_place) {
        const double to_place = (state.at(task.place_entity.value()).position - ee).norm();
        report.hint.g = to_place <= task.success_radius ? 0 : 1;
    } else {
        report.hint.g = 1;
    }

    if (remaining_subgoals(state, task) > 1) {
        report.switch_weight = 0.0;
    } else if (!report.interference.empty()) {
        report.switch_weight = 0.5;
    } else {
        report.switch_weight = 1.0;
    }
    return report;
}

NoisyPerceiver::NoisyPerceiver(PerceiverConfig config) : config_(config), oracle_(config) {
    for (double rate : {config_.hallucination_rate, config_.direction_flip_rate}) {
        if (!(rate >= 0.0 && rate <= 1.0)) {
            throw InvalidInput("noisy perceiver rates must lie in [0, 1]");
        }
    }
}

PerceptionReport NoisyPerceiver::perceive(const sim::Observation& observation, const sim::TaskSpec& task,
                                          const PhaseMemory& memory) const {
    PerceptionReport report = oracle_.perceive(observation, task, memory);
    Rng rng(mix_seed(config_.seed, observation.state_snapshot.step_index));
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const double u = unit(rng);
    std::vector<const std::pair<const std::string, sim::BoundingBox>*> others;
    for (const auto& entry : observation.boxes) {
        if (entry.first != kEndEffectorId && entry.first != report.sub_goal.id) {
            others.push_back(&entry);
        }
    }
    const std::size_t pick =
        others.empty() ? 0 : std::uniform_int_distribution<std::size_t>(0, others.size() - 1)(rng);
    if (u < config_.hallucination_rate && !others.empty()) {
        report.sub_goal = {others[pick]->first, others[pick]->second};
    }

    for (auto* comp : {&report.hint.d_hat, &report.hint.r_hat}) {
        for (int& v : *comp) {
            if (unit(rng) < config_.direction_flip_rate) {
                v = -v;
            }
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// Remote adapter

namespace {

nlohmann::json box_to_json(const sim::BoundingBox& box) {
    return nlohmann::json::array({box.min_corner.x(), box.min_corner.y(), box.max_corner.x(), box.max_corner.y()});
}

sim::BoundingBox box_from_json(const nlohmann::json& j, std::string_view field) {
    if (!j.is_array() || j.size() != 4 || !std::all_of(j.begin(), j.end(), [](const auto& v) { return v.is_number(); })) {
        throw TransportError("malformed box in '" + std::string(field) + "'");
    }
    sim::BoundingBox box{Vec2(j[0].get<double>(), j[1].get<double>()), Vec2(j[2].get<double>(), j[3].get<double>())};
    if (box.min_corner.x() > box.max_corner.x() || box.min_corner.y() > box.max_corner.y()) {
        throw TransportError("inverted box in '" + std::string(field) + "'");
    }
    return box;
}

std::array<int, 3> direction_from_json(const nlohmann::json& body, const char* field) {
    const auto it = body.find(field);
    if (it == body.end() || !it->is_array() || it->size() != 3) {
        throw TransportError(std::string("missing or malformed '") + field + "'");
    }
    std::array<int, 3> out{};
    for (std::size_t i = 0; i < 3; ++i) {
        const auto& v = (*it)[i];
        if (!v.is_number_integer() || v.get<int>() < -1 || v.get<int>() > 1) {
            throw TransportError(std::string("direction component out of alphabet in '") + field + "'");
        }
        out[i] = v.get<int>();
    }
    return out;
}

double overlap_score(const sim::BoundingBox& a, const sim::BoundingBox& b) {
    const Vec2 lo = a.min_corner.cwiseMax(b.min_corner);
    const Vec2 hi = a.max_corner.cwiseMin(b.max_corner);
    const double inter = std::max(0.0, hi.x() - lo.x()) * std::max(0.0, hi.y() - lo.y());
    const double uni = a.width() * a.height() + b.width() * b.height() - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

std::string resolve_entity(const sim::BoundingBox& box, const sim::Observation& observation) {
    std::string best;
    double best_score = 0.0;
    for (const auto& [id, candidate] : observation.boxes) {
        if (id == kEndEffectorId) {
            continue;
        }
        const double score = overlap_score(box, candidate);
        if (score > best_score) {
            best_score = score;
            best = id;
        }
    }
    if (best.empty()) {
        throw TransportError("returned box matches no entity in the observation");
    }
    return best;
}

const nlohmann::json& require(const nlohmann::json& body, const char* field) {
    const auto it = body.find(field);
    if (it == body.end()) {
        throw TransportError(std::string("response missing '") + field + "'");
    }
    return *it;
}

}  // namespace

nlohmann::json make_request(std::uint64_t request_id, const sim::Observation& observation, const sim::TaskSpec& task,
                            const PhaseMemory& memory) {
    return {
        {"format", 1},
        {"request_id", request_id},
        {"image", observation.image.pixels},
        {"width", observation.image.width},
        {"height", observation.image.height},
        {"instruction", task.instruction},
        {"phase", std::string(to_string(memory.phase))},
    };
}

nlohmann::json serialize_response(std::uint64_t request_id, const PerceptionReport& report) {
    nlohmann::json interference = nlohmann::json::array();
    for (const auto& item : report.interference) {
        interference.push_back(box_to_json(item.box));
    }
    return {
        {"request_id", request_id},
        {"sub_goal_box", box_to_json(report.sub_goal.box)},
        {"interference_boxes", interference},
        {"end_effector_box", box_to_json(report.end_effector)},
        {"d_hat", report.hint.d_hat},
        {"r_hat", report.hint.r_hat},
        {"g", report.hint.g},
        {"switch_weight", report.switch_weight},
    };
}

PerceptionReport parse_response(const nlohmann::json& body, std::uint64_t expected_request_id,
                                const sim::Observation& observation) {
    if (!body.is_object()) {
        throw TransportError("response is not a JSON object");
    }
    const auto& rid = require(body, "request_id");
    if (!rid.is_number_unsigned() && !rid.is_number_integer()) {
        throw TransportError("request_id is not an integer");
    }
    if (rid.get<std::uint64_t>() != expected_request_id) {
        throw TransportError("request_id mismatch");
    }

    PerceptionReport report;
    report.end_effector = box_from_json(require(body, "end_effector_box"), "end_effector_box");
    const auto sub_goal_box = box_from_json(require(body, "sub_goal_box"), "sub_goal_box");
    report.sub_goal = {resolve_entity(sub_goal_box, observation), sub_goal_box};

    const auto& interference = require(body, "interference_boxes");
    if (!interference.is_array()) {
        throw TransportError("interference_boxes is not an array");
    }
    for (const auto& item : interference) {
        const auto box = box_from_json(item, "interference_boxes");
        report.interference.push_back({resolve_entity(box, observation), box});
    }

    report.hint.d_hat = direction_from_json(body, "d_hat");
    report.hint.r_hat = direction_from_json(body, "r_hat");
    const auto& g = require(body, "g");
    if (!g.is_number_integer() || (g.get<int>() != 0 && g.get<int>() != 1)) {
        throw TransportError("g must be 0 or 1");
    }
    report.hint.g = g.get<int>();

    const auto& w = require(body, "switch_weight");
    if (!w.is_number() || !is_switch_weight(w.get<double>())) {
        throw TransportError("switch_weight must be one of 0, 0.5, 1");
    }
    report.switch_weight = w.get<double>();
    return report;
}

RemotePerceiver::RemotePerceiver(PerceiverConfig config) : config_(std::move(config)) {
    if (!config_.endpoint || config_.endpoint->empty()) {
        throw InvalidInput("remote perceiver requires an endpoint");
    }
    std::string address = *config_.endpoint;
    if (const auto scheme = address.find("://"); scheme != std::string::npos) {
        address = address.substr(scheme + 3);
    }
    if (const auto slash = address.find('/'); slash != std::string::npos) {
        address = address.substr(0, slash);
    }
    const auto colon = address.rfind(':');
    host_ = address.substr(0, colon);
    if (colon != std::string::npos) {
        try {
            port_ = std::stoi(address.substr(colon + 1));
        } catch (const std::exception&) {
            throw InvalidInput("bad port in endpoint '" + *config_.endpoint + "'");
        }
    }
}

PerceptionReport RemotePerceiver::perceive(const sim::Observation& observation, const sim::TaskSpec& task,
                                           const PhaseMemory& memory) const {
    static std::atomic<std::uint64_t> counter{0};
    const std::uint64_t request_id = mix_seed(config_.seed, counter.fetch_add(1)) >> 11u;

    httplib::Client client(host_, port_);
    const auto timeout = std::chrono::duration<double>(config_.timeout_s);
    client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));

    const auto body = make_request(request_id, observation, task, memory).dump();
    const auto res = client.Post("/perceive", body, "application/json");
    if (!res) {
        throw TransportError("perceive request failed: " + httplib::to_string(res.error()));
    }
    if (res->status != 200) {
        throw TransportError("perceive request returned HTTP " + std::to_string(res->status));
    }
    nlohmann::json parsed;
    try {
        parsed = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
        throw TransportError(std::string("malformed response: ") + e.what());
    }
    return parse_response(parsed, request_id, observation);
}

std::unique_ptr<Perceiver> make_perceiver(const PerceiverConfig& config) {
    switch (config.variant) {
        case Variant::oracle:
            return std::make_unique<OraclePerceiver>(config);
        case Variant::noisy:
            return std::make_unique<NoisyPerceiver>(config);
        case Variant::remote:
            return std::make_unique<RemotePerceiver>(config);
    }
    throw InvalidInput("unknown perceiver variant");
}

// ---------------------------------------------------------------------------
// Phase machine

PhaseMemory phase_update(const PerceptionReport& /*report*/, const sim::WorldState& state, const sim::TaskSpec& task,
                         const PhaseMemory& memory) {
    PhaseMemory next = memory;
    const bool held = state.holds(task.goal_entity);
    if (held && !memory.goal_held) {
        ++next.grasp_events;
    }
    next.goal_held = held;

    Phase phase = memory.phase;
    if (phase == Phase::approach && held) {
        phase = task.kind == TaskKind::wipe ? Phase::wipe : Phase::transport;
    }
    if (phase == Phase::transport && task.kind == TaskKind::pick_place && sim::check_success(state, task)) {
        phase = Phase::release;
    }
    if (phase != memory.phase) {
        next.phase = phase;
        next.history.push_back(phase);
    }
    return next;
}

}  // namespace vlmpc::perception
