#include "vlmpc/sim.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace vlmpc::sim {

std::string_view to_string(ObjectKind kind) {
    switch (kind) {
        case ObjectKind::graspable:
            return "graspable";
        case ObjectKind::towel:
            return "towel";
        case ObjectKind::container:
            return "container";
        case ObjectKind::obstacle:
            return "obstacle";
        case ObjectKind::surface_mark:
            return "surface-mark";
    }
    return "graspable";
}

ObjectKind object_kind_from_string(std::string_view text) {
    for (auto kind : {ObjectKind::graspable, ObjectKind::towel, ObjectKind::container, ObjectKind::obstacle,
                      ObjectKind::surface_mark}) {
        if (to_string(kind) == text) {
            return kind;
        }
    }
    throw InvalidInput("unknown object kind '" + std::string(text) + "'");
}

const ObjectState* WorldState::find(std::string_view id) const {
    for (const auto& obj : objects) {
        if (obj.id == id) {
            return &obj;
        }
    }
    return nullptr;
}

ObjectState* WorldState::find(std::string_view id) {
    for (auto& obj : objects) {
        if (obj.id == id) {
            return &obj;
        }
    }
    return nullptr;
}

const ObjectState& WorldState::at(std::string_view id) const {
    if (const auto* obj = find(id)) {
        return *obj;
    }
    throw InvalidInput("unknown entity '" + std::string(id) + "'");
}

void validate(const WorldState& state) {
    std::set<std::string, std::less<>> ids;
    for (const auto& obj : state.objects) {
        if (obj.id.empty() || obj.id == kEndEffectorId) {
            throw InvalidInput("object id '" + obj.id + "' is reserved or empty");
        }
        if (!ids.insert(obj.id).second) {
            throw InvalidInput("duplicate object id '" + obj.id + "'");
        }
        if (!(obj.radius > 0.0)) {
            throw InvalidInput("object '" + obj.id + "' must have a positive radius");
        }
    }
    if (state.held_object && !state.find(*state.held_object)) {
        throw InvalidInput("held object '" + *state.held_object + "' does not exist");
    }
}

Action Action::clamped(const ActionLimits& limits) const {
    Action out = *this;
    out.d = d.cwiseMax(-limits.d_max).cwiseMin(limits.d_max);
    out.r = r.cwiseMax(-limits.r_max).cwiseMin(limits.r_max);
    out.g = g != 0 ? 1 : 0;
    return out;
}

namespace {

double wrap_angle(double a) {
    return std::remainder(a, 2.0 * M_PI);
}

}  // namespace

WorldState step(const WorldState& state, const Action& action, const SimConfig& config) {
    const Action a = action.clamped(config.limits);
    WorldState next = state;
    next.step_index = state.step_index + 1;
    next.ee_position = state.workspace.clamp(state.ee_position + a.d);
    for (int i = 0; i < 3; ++i) {
        next.ee_rotation[i] = wrap_angle(state.ee_rotation[i] + a.r[i]);
    }

    const bool closing = a.g == 1 && !state.gripper_closed;
    const bool opening = a.g == 0 && state.gripper_closed;
    next.gripper_closed = a.g == 1;

    if (opening) {
        next.held_object.reset();
    }
    if (closing && !next.held_object) {
        // Snap-attach the nearest graspable object within reach, measured after the move.
        double best = config.grasp_radius;
        for (const auto& obj : next.objects) {
            if (!is_graspable(obj.kind)) {
                continue;
            }
            const double dist = (obj.position - next.ee_position).norm();
            if (dist <= best) {
                best = dist;
                next.held_object = obj.id;
            }
        }
    }

    if (next.held_object) {
        ObjectState* held = next.find(*next.held_object);
        held->position = next.ee_position;
        if (held->kind == ObjectKind::towel) {
            for (auto& obj : next.objects) {
                if (obj.kind == ObjectKind::surface_mark) {
                    obj.closest_wipe = std::min(obj.closest_wipe, (obj.position - next.ee_position).norm());
                }
            }
        }
    }
    return next;
}

// ---------------------------------------------------------------------------
// Rendering

int RenderConfig::ee_half_px(double z) const {
    return static_cast<int>(std::lround(ee_half_base_px + z * ee_px_per_meter));
}

double RenderConfig::ee_height_from_width(double box_width_px) const {
    const double half = (box_width_px - 1.0) / 2.0;
    return (half - ee_half_base_px) / ee_px_per_meter;
}

namespace {

struct PixelSpan {
    int x0, y0, x1, y1;  // inclusive
};

bool clip(PixelSpan& span, int width, int height) {
    span.x0 = std::max(span.x0, 0);
    span.y0 = std::max(span.y0, 0);
    span.x1 = std::min(span.x1, width - 1);
    span.y1 = std::min(span.y1, height - 1);
    return span.x0 <= span.x1 && span.y0 <= span.y1;
}

class BoxAccumulator {
public:
    void add(int x, int y) {
        x0_ = std::min(x0_, x);
        y0_ = std::min(y0_, y);
        x1_ = std::max(x1_, x);
        y1_ = std::max(y1_, y);
    }
    [[nodiscard]] bool empty() const { return x1_ < x0_; }
    [[nodiscard]] BoundingBox box() const {
        return {Vec2(x0_, y0_), Vec2(x1_ + 1, y1_ + 1)};
    }

private:
    int x0_ = std::numeric_limits<int>::max();
    int y0_ = std::numeric_limits<int>::max();
    int x1_ = std::numeric_limits<int>::min();
    int y1_ = std::numeric_limits<int>::min();
};

BoundingBox fallback_box(const Vec2& center, int width, int height) {
    const int x = std::clamp(static_cast<int>(std::floor(center.x())), 0, width - 1);
    const int y = std::clamp(static_cast<int>(std::floor(center.y())), 0, height - 1);
    return {Vec2(x, y), Vec2(x + 1, y + 1)};
}

/// Fills pixels whose centers lie within the disk; returns the tight box.
template <typename Plot>
BoundingBox draw_disk(const Vec2& center, double radius_px, int width, int height, Plot&& plot) {
    PixelSpan span{static_cast<int>(std::floor(center.x() - radius_px)),
                   static_cast<int>(std::floor(center.y() - radius_px)),
                   static_cast<int>(std::ceil(center.x() + radius_px)),
                   static_cast<int>(std::ceil(center.y() + radius_px))};
    BoxAccumulator acc;
    if (clip(span, width, height)) {
        const double r2 = radius_px * radius_px;
        for (int y = span.y0; y <= span.y1; ++y) {
            const double dy = y + 0.5 - center.y();
            for (int x = span.x0; x <= span.x1; ++x) {
                const double dx = x + 0.5 - center.x();
                if (dx * dx + dy * dy <= r2) {
                    plot(x, y);
                    acc.add(x, y);
                }
            }
        }
    }
    return acc.empty() ? fallback_box(center, width, height) : acc.box();
}

void draw_arm(Image& image, const Vec2& base, const Vec2& tip, double half_width, std::uint8_t color) {
    PixelSpan span{static_cast<int>(std::floor(std::min(base.x(), tip.x()) - half_width)),
                   static_cast<int>(std::floor(std::min(base.y(), tip.y()) - half_width)),
                   static_cast<int>(std::ceil(std::max(base.x(), tip.x()) + half_width)),
                   static_cast<int>(std::ceil(std::max(base.y(), tip.y()) + half_width))};
    if (!clip(span, image.width, image.height)) {
        return;
    }
    const Vec2 seg = tip - base;
    const double len2 = seg.squaredNorm();
    const double hw2 = half_width * half_width;
    for (int y = span.y0; y <= span.y1; ++y) {
        for (int x = span.x0; x <= span.x1; ++x) {
            const Vec2 p(x + 0.5, y + 0.5);
            double t = len2 > 0.0 ? (p - base).dot(seg) / len2 : 0.0;
            t = std::clamp(t, 0.0, 1.0);
            if ((p - base - t * seg).squaredNorm() <= hw2) {
                image.at(x, y) = color;
            }
        }
    }
}

int draw_rank(ObjectKind kind) {
    switch (kind) {
        case ObjectKind::surface_mark:
            return 0;
        case ObjectKind::container:
            return 1;
        case ObjectKind::obstacle:
            return 2;
        case ObjectKind::graspable:
        case ObjectKind::towel:
            return 3;
    }
    return 3;
}

template <typename HeightSink>
Frame rasterize(const WorldState& state, const RenderConfig& cfg, HeightSink&& height_sink) {
    Frame frame{Image(cfg.width, cfg.height, cfg.background), {}};
    Image& img = frame.image;
    const double mpp = cfg.meters_per_pixel;

    std::vector<const ObjectState*> order;
    order.reserve(state.objects.size());
    for (const auto& obj : state.objects) {
        if (!state.holds(obj.id)) {
            order.push_back(&obj);
        }
    }
    std::stable_sort(order.begin(), order.end(),
                     [](const auto* a, const auto* b) { return draw_rank(a->kind) < draw_rank(b->kind); });

    for (const auto* obj : order) {
        const auto color = static_cast<std::uint8_t>(obj->color_index);
        const double z = obj->position.z();
        frame.boxes[obj->id] = draw_disk(cfg.to_pixel(obj->position), obj->radius / mpp, img.width, img.height,
                                         [&](int x, int y) {
                                             img.at(x, y) = color;
                                             height_sink(x, y, z);
                                         });
    }

    const Vec2 ee_px = cfg.to_pixel(state.ee_position);
    if (cfg.draw_arm) {
        const Vec2 base_px((cfg.arm_base.x() - cfg.origin.x()) / mpp, (cfg.arm_base.y() - cfg.origin.y()) / mpp);
        draw_arm(img, base_px, ee_px, cfg.arm_half_width_px, cfg.arm_color);
    }

    if (state.held_object) {
        const ObjectState& held = state.at(*state.held_object);
        const auto color = static_cast<std::uint8_t>(held.color_index);
        frame.boxes[held.id] = draw_disk(cfg.to_pixel(held.position), held.radius / mpp, img.width, img.height,
                                         [&](int x, int y) { img.at(x, y) = color; });
    }

    // End-effector: square snapped to the pixel grid, side 2k+1 with k encoding height.
    const int cx = std::clamp(static_cast<int>(std::floor(ee_px.x())), 0, cfg.width - 1);
    const int cy = std::clamp(static_cast<int>(std::floor(ee_px.y())), 0, cfg.height - 1);
    const int k = std::max(0, cfg.ee_half_px(state.ee_position.z()));
    PixelSpan span{cx - k, cy - k, cx + k, cy + k};
    clip(span, cfg.width, cfg.height);
    for (int y = span.y0; y <= span.y1; ++y) {
        for (int x = span.x0; x <= span.x1; ++x) {
            img.at(x, y) = cfg.ee_color;
        }
    }
    frame.boxes[std::string(kEndEffectorId)] = {Vec2(span.x0, span.y0), Vec2(span.x1 + 1, span.y1 + 1)};
    return frame;
}

}  // namespace

Frame render_frame(const WorldState& state, const RenderConfig& config) {
    return rasterize(state, config, [](int, int, double) {});
}

Observation render(const WorldState& state, const RenderConfig& config) {
    HeightRaster height{config.width, config.height,
                        std::vector<double>(static_cast<std::size_t>(config.width) * config.height, 0.0)};
    Frame frame = rasterize(state, config, [&](int x, int y, double z) {
        double& cell = height.z[static_cast<std::size_t>(y) * height.width + x];
        cell = std::max(cell, z);
    });
    return {std::move(frame.image), std::move(height), std::move(frame.boxes), state};
}

std::uint64_t digest(const Image& image) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    auto feed = [&h](std::uint8_t byte) {
        h ^= byte;
        h *= 0x100000001b3ull;
    };
    for (int v : {image.width, image.height}) {
        for (int i = 0; i < 4; ++i) {
            feed(static_cast<std::uint8_t>((static_cast<unsigned>(v) >> (8 * i)) & 0xffu));
        }
    }
    for (auto p : image.pixels) {
        feed(p);
    }
    return h;
}

// ---------------------------------------------------------------------------
// Tasks

std::string_view to_string(TaskKind kind) {
    switch (kind) {
        case TaskKind::reach:
            return "reach";
        case TaskKind::grasp:
            return "grasp";
        case TaskKind::pick_place:
            return "pick-place";
        case TaskKind::wipe:
            return "wipe";
    }
    return "reach";
}

TaskKind task_kind_from_string(std::string_view text) {
    for (auto kind : {TaskKind::reach, TaskKind::grasp, TaskKind::pick_place, TaskKind::wipe}) {
        if (to_string(kind) == text) {
            return kind;
        }
    }
    throw InvalidInput("unknown task kind '" + std::string(text) + "'");
}

void validate(const TaskSpec& task, const WorldState& state) {
    if (!(task.success_radius > 0.0)) {
        throw InvalidInput("success_radius must be positive");
    }
    if (task.T_max < 0) {
        throw InvalidInput("T_max must be non-negative");
    }
    const ObjectState& goal = state.at(task.goal_entity);
    if (task.kind == TaskKind::pick_place) {
        if (!task.place_entity) {
            throw InvalidInput("pick-place task requires place_entity");
        }
        (void)state.at(*task.place_entity);
    }
    if ((task.kind == TaskKind::grasp || task.kind == TaskKind::pick_place) && !is_graspable(goal.kind)) {
        throw InvalidInput("goal entity '" + goal.id + "' is not graspable");
    }
    if (task.kind == TaskKind::wipe && goal.kind != ObjectKind::towel) {
        throw InvalidInput("wipe task requires a towel goal entity");
    }
    for (const auto& id : task.interference_ids) {
        (void)state.at(id);
    }
}

bool check_success(const WorldState& state, const TaskSpec& task) {
    const ObjectState& goal = state.at(task.goal_entity);
    switch (task.kind) {
        case TaskKind::reach:
            return (state.ee_position - goal.position).norm() <= task.success_radius;
        case TaskKind::grasp:
            return state.holds(task.goal_entity);
        case TaskKind::pick_place: {
            if (state.holds(task.goal_entity) || !task.place_entity) {
                return false;
            }
            const ObjectState& place = state.at(*task.place_entity);
            return (goal.position - place.position).norm() <= task.success_radius;
        }
        case TaskKind::wipe: {
            if (!state.holds(task.goal_entity)) {
                return false;
            }
            return std::all_of(state.objects.begin(), state.objects.end(), [&](const ObjectState& obj) {
                return obj.kind != ObjectKind::surface_mark || obj.closest_wipe <= task.success_radius;
            });
        }
    }
    return false;
}

double min_clearance(const WorldState& state, const TaskSpec& task) {
    double best = kInf;
    for (const auto& id : task.interference_ids) {
        const ObjectState& obj = state.at(id);
        best = std::min(best, (state.ee_position - obj.position).norm() - obj.radius);
    }
    return best;
}

WorldState staged_success(const WorldState& state, const TaskSpec& task) {
    WorldState out = state;
    const Vec3 goal_pos = state.at(task.goal_entity).position;
    switch (task.kind) {
        case TaskKind::reach:
            out.ee_position = goal_pos;
            break;
        case TaskKind::grasp:
            out.ee_position = goal_pos;
            out.gripper_closed = true;
            out.held_object = task.goal_entity;
            break;
        case TaskKind::pick_place: {
            const Vec3 place = state.at(task.place_entity.value()).position;
            out.ee_position = place;
            out.find(task.goal_entity)->position = place;
            out.gripper_closed = false;
            out.held_object.reset();
            break;
        }
        case TaskKind::wipe: {
            Vec3 last = goal_pos;
            for (auto& obj : out.objects) {
                if (obj.kind == ObjectKind::surface_mark) {
                    obj.closest_wipe = 0.0;
                    last = obj.position;
                }
            }
            out.ee_position = last;
            out.find(task.goal_entity)->position = last;
            out.gripper_closed = true;
            out.held_object = task.goal_entity;
            break;
        }
    }
    out.ee_position = out.workspace.clamp(out.ee_position);
    return out;
}

}  // namespace vlmpc::sim
