#pragma once

// Deterministic kinematic tabletop world: state, dynamics, rendering and task
// predicates.

#include "vlmpc/common.hpp"

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vlmpc::sim {

inline constexpr std::string_view kEndEffectorId = "end_effector";

enum class ObjectKind { graspable, towel, container, obstacle, surface_mark };

std::string_view to_string(ObjectKind kind);
ObjectKind object_kind_from_string(std::string_view text);

/// Graspable and towel objects can be picked up by the gripper.
inline bool is_graspable(ObjectKind kind) {
    return kind == ObjectKind::graspable || kind == ObjectKind::towel;
}

struct ObjectState {
    std::string id;
    Vec3 position = Vec3::Zero();
    double radius = 0.03;
    ObjectKind kind = ObjectKind::graspable;
    int color_index = 3;
    // Closest approach of a held towel; only tracked for surface marks.
    double closest_wipe = kInf;

    bool operator==(const ObjectState&) const = default;
};

struct WorldState {
    Vec3 ee_position = Vec3(0.0, 0.0, 0.2);
    Vec3 ee_rotation = Vec3::Zero();
    bool gripper_closed = false;
    std::vector<ObjectState> objects;
    std::optional<std::string> held_object;
    std::uint64_t step_index = 0;
    Bounds3 workspace;

    [[nodiscard]] const ObjectState* find(std::string_view id) const;
    [[nodiscard]] ObjectState* find(std::string_view id);
    /// Throws InvalidInput when the id is unknown.
    [[nodiscard]] const ObjectState& at(std::string_view id) const;
    [[nodiscard]] bool holds(std::string_view id) const { return held_object && *held_object == id; }

    bool operator==(const WorldState&) const = default;
};

/// Throws InvalidInput on duplicate ids, non-positive radii or a dangling held_object.
void validate(const WorldState& state);

struct ActionLimits {
    double d_max = 0.05;
    double r_max = 0.2;
};

struct Action {
    Vec3 d = Vec3::Zero();
    Vec3 r = Vec3::Zero();
    int g = 0;

    [[nodiscard]] Action clamped(const ActionLimits& limits) const;
    bool operator==(const Action&) const = default;
};

struct SimConfig {
    ActionLimits limits;
    double grasp_radius = 0.03;
};

/// Applies one action. Total: out-of-range inputs are clamped.
WorldState step(const WorldState& state, const Action& action, const SimConfig& config);

// ---------------------------------------------------------------------------
// Rendering

struct Image {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;

    Image() = default;
    Image(int w, int h, std::uint8_t fill = 0) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}

    [[nodiscard]] std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
    bool operator==(const Image&) const = default;
};

/// Pixel (x, y) covers [x, x+1) x [y, y+1); max_corner is exclusive.
struct BoundingBox {
    Vec2 min_corner = Vec2::Zero();
    Vec2 max_corner = Vec2::Zero();

    [[nodiscard]] Vec2 center() const { return 0.5 * (min_corner + max_corner); }
    [[nodiscard]] double width() const { return max_corner.x() - min_corner.x(); }
    [[nodiscard]] double height() const { return max_corner.y() - min_corner.y(); }
    bool operator==(const BoundingBox&) const = default;
};

using BoxMap = std::map<std::string, BoundingBox, std::less<>>;

struct RenderConfig {
    int width = 128;
    int height = 128;
    double meters_per_pixel = 0.005;
    // World (x, y) of the image corner at pixel (0, 0).
    Vec2 origin = Vec2(-0.32, -0.32);
    // End-effector square half-size in pixels is round(ee_half_base_px + z * ee_px_per_meter).
    int ee_half_base_px = 3;
    double ee_px_per_meter = 50.0;
    bool draw_arm = true;
    Vec2 arm_base = Vec2(0.0, -0.36);
    double arm_half_width_px = 3.0;
    std::uint8_t background = 0;
    std::uint8_t ee_color = 1;
    std::uint8_t arm_color = 2;

    [[nodiscard]] Vec2 to_pixel(const Vec3& p) const {
        return Vec2((p.x() - origin.x()) / meters_per_pixel, (p.y() - origin.y()) / meters_per_pixel);
    }
    [[nodiscard]] int ee_half_px(double z) const;
    /// Inverse of ee_half_px for a square box of the given pixel width.
    [[nodiscard]] double ee_height_from_width(double box_width_px) const;
};

/// Image plus per-entity boxes; what a predicted frame carries.
struct Frame {
    Image image;
    BoxMap boxes;
};

/// Scene surface height per pixel with the robot and anything it holds masked out.
struct HeightRaster {
    int width = 0;
    int height = 0;
    std::vector<double> z;

    [[nodiscard]] double at(int x, int y) const { return z[static_cast<std::size_t>(y) * width + x]; }
};

struct Observation {
    Image image;
    HeightRaster height;
    BoxMap boxes;
    WorldState state_snapshot;
};

Frame render_frame(const WorldState& state, const RenderConfig& config);
Observation render(const WorldState& state, const RenderConfig& config);

/// 64-bit FNV-1a digest of an image's dimensions and pixels.
std::uint64_t digest(const Image& image);

// ---------------------------------------------------------------------------
// Tasks

enum class TaskKind { reach, grasp, pick_place, wipe };

std::string_view to_string(TaskKind kind);
TaskKind task_kind_from_string(std::string_view text);

struct TaskSpec {
    TaskKind kind = TaskKind::reach;
    std::string goal_entity;
    std::optional<std::string> place_entity;
    std::vector<std::string> interference_ids;
    std::optional<Image> goal_image;
    std::string instruction;
    double success_radius = 0.02;
    int T_max = 50;
};

/// Throws InvalidInput when the task is inconsistent with itself or with `state`.
void validate(const TaskSpec& task, const WorldState& state);

bool check_success(const WorldState& state, const TaskSpec& task);

/// Minimum over interference objects of (distance(ee, obstacle) - radius); +inf without any.
double min_clearance(const WorldState& state, const TaskSpec& task);

/// The state `task` would leave behind on success; used to render goal images.
WorldState staged_success(const WorldState& state, const TaskSpec& task);

}  // namespace vlmpc::sim
