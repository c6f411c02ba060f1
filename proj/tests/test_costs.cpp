#include "helpers.hpp"
#include "vlmpc/costs.hpp"

#include <doctest.h>

#include <cmath>

using namespace vlmpc;
using namespace vlmpc::cost;
using predictor::PredictedVideo;

namespace {

PredictedVideo video_of(const std::vector<sim::Image>& frames) {
    PredictedVideo v;
    v.frames = frames;
    v.boxes_per_frame.resize(frames.size());
    return v;
}

sim::BoundingBox box_at(const Vec2& c) { return {c - Vec2(1, 1), c + Vec2(1, 1)}; }

// One-frame video with the end-effector, sub-goal and interference boxes centered as given.
PredictedVideo track_video(const Vec2& ee, const Vec2& goal, const std::vector<Vec2>& interference) {
    PredictedVideo v;
    v.frames.resize(1);
    sim::BoxMap boxes;
    boxes[std::string(sim::kEndEffectorId)] = box_at(ee);
    boxes["goal"] = box_at(goal);
    for (std::size_t j = 0; j < interference.size(); ++j) {
        boxes["i" + std::to_string(j)] = box_at(interference[j]);
    }
    v.boxes_per_frame.push_back(boxes);
    return v;
}

perception::PerceptionReport report_for(std::size_t interference) {
    perception::PerceptionReport r;
    r.sub_goal.id = "goal";
    for (std::size_t j = 0; j < interference; ++j) {
        r.interference.push_back({"i" + std::to_string(j), {}});
    }
    return r;
}

}  // namespace

TEST_CASE("pixel_cost: hand-evaluated cases") {
    const sim::Image goal(8, 8, 3);
    CHECK(pixel_cost({video_of({goal, goal})}, goal) == std::vector<double>{0.0});

    sim::Image one = goal;
    one.at(2, 5) = 10;
    CHECK(pixel_cost({video_of({one})}, goal) == std::vector<double>{7.0});

    sim::Image d = goal;
    d.at(0, 0) = 6;
    d.at(1, 0) = 7;  // sqrt(9 + 16) = 5 per frame
    CHECK(pixel_cost({video_of({d, d, d})}, goal) == std::vector<double>{15.0});

    CHECK_THROWS_AS(pixel_cost({video_of({sim::Image(4, 8)})}, goal), InvalidInput);
}

TEST_CASE("pixel_cost: zero exactly when every frame equals the goal") {
    Rng rng(12);
    std::uniform_int_distribution<int> px(0, 255);
    sim::Image goal(16, 16);
    for (auto& p : goal.pixels) {
        p = static_cast<std::uint8_t>(px(rng));
    }
    for (int trial = 0; trial < 50; ++trial) {
        sim::Image f = goal;
        const bool perturb = trial % 2 == 1;
        if (perturb) {
            f.pixels[static_cast<std::size_t>(px(rng))] ^= 1;
        }
        const double c = pixel_cost({video_of({goal, f})}, goal)[0];
        CHECK(c >= 0.0);
        CHECK((c == 0.0) == !perturb);
    }
}

TEST_CASE("vlm_cost: hand-evaluated cases") {
    CHECK(vlm_cost({track_video(Vec2(0, 0), Vec2(3, 4), {})}, report_for(0)) == std::vector<double>{5.0});
    CHECK(vlm_cost({track_video(Vec2(0, 0), Vec2(3, 4), {Vec2(0, 5)})}, report_for(1)) ==
          std::vector<double>{0.0});
    CHECK(vlm_cost({track_video(Vec2(7, 7), Vec2(7, 7), {})}, report_for(0)) == std::vector<double>{0.0});
}

TEST_CASE("vlm_cost: optional clamp bounds the interference reward") {
    CostConfig cfg;
    cfg.clamp_interference = true;
    cfg.interference_clamp_px = 2.0;
    const auto v = track_video(Vec2(0, 0), Vec2(3, 4), {Vec2(0, 50)});
    CHECK(vlm_cost({v}, report_for(1)) == std::vector<double>{-45.0});
    CHECK(vlm_cost({v}, report_for(1), cfg) == std::vector<double>{3.0});
}

TEST_CASE("vlm_cost: approaching the sub-goal lowers the cost") {
    const Vec2 goal(60, 60);
    double prev = kInf;
    for (int i = 0; i <= 10; ++i) {
        const Vec2 ee = Vec2(10, 10) + (goal - Vec2(10, 10)) * (i / 10.0);
        // Keep interference distance fixed by moving the obstacle with the path.
        const Vec2 obstacle = ee + Vec2(0, 30);
        const double c = vlm_cost({track_video(ee, goal, {obstacle})}, report_for(1))[0];
        CHECK(c < prev);
        prev = c;
    }
}

TEST_CASE("vlm_cost: unresolvable entity is an error") {
    auto v = track_video(Vec2(0, 0), Vec2(3, 4), {});
    CHECK_THROWS_AS(vlm_cost({v}, report_for(1)), InvalidInput);
}

TEST_CASE("combine: endpoints are exact and the mix is linear") {
    const std::vector<double> pixel{1.5, 2.0, -3.25};
    const std::vector<double> knowledge{4.0, -7.5, 0.125};
    CHECK(combine(pixel, knowledge, 1.0).combined == pixel);
    CHECK(combine(pixel, knowledge, 0.0).combined == knowledge);
    CHECK(combine({2.0}, {4.0}, 0.5).combined == std::vector<double>{3.0});
    const auto b = combine(pixel, knowledge, 0.5);
    CHECK(b.pixel == pixel);
    CHECK(b.knowledge == knowledge);
    CHECK(b.w_D == 0.5);
    CHECK_THROWS_AS(combine(pixel, knowledge, 0.3), InvalidInput);
    CHECK_THROWS_AS(combine(pixel, {1.0}, 1.0), InvalidInput);
}

TEST_CASE("select_best: argmin with lowest-index ties") {
    CHECK(select_best(combine({3, 1, 2}, {0, 0, 0}, 1.0)) == 1);
    CHECK(select_best(combine({2, 2}, {0, 0}, 1.0)) == 0);
    CHECK_THROWS_AS(argmin({}), InvalidInput);

    Rng rng(8);
    std::uniform_real_distribution<double> u(-10, 10);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> c(64);
        for (auto& x : c) {
            x = std::round(u(rng));  // rounding forces ties
        }
        std::size_t brute = 0;
        for (std::size_t i = 0; i < c.size(); ++i) {
            if (c[i] < c[brute]) {
                brute = i;
            }
        }
        CHECK(argmin(c) == brute);
        std::vector<double> scaled = c;
        for (auto& x : scaled) {
            x = 3.5 * x - 12.0;
        }
        CHECK(argmin(scaled) == brute);
    }
}
