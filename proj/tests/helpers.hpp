#pragma once

#include "vlmpc/sim.hpp"

#include <cmath>
#include <string>

namespace test_util {

inline vlmpc::sim::ObjectState object(std::string id, vlmpc::sim::ObjectKind kind, vlmpc::Vec3 pos,
                                      double radius = 0.03, int color = 10) {
    vlmpc::sim::ObjectState o;
    o.id = std::move(id);
    o.kind = kind;
    o.position = pos;
    o.radius = radius;
    o.color_index = color;
    return o;
}

inline double rel_err(double a, double b) {
    const double scale = std::max({1.0, std::abs(a), std::abs(b)});
    return std::abs(a - b) / scale;
}

}  // namespace test_util
