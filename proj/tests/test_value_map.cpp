#include "vlmpc/value_map.hpp"

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace vlmpc;
using namespace vlmpc::traj;

namespace {

GridSpec small_grid() {
    GridSpec g;
    g.dims = {20, 20, 10};
    g.voxel_size = 0.02;
    g.origin = Vec3(-0.2, -0.2, 0.0);
    return g;
}

TrajectoryCandidate candidate(std::vector<Vec3> points, int index = 0) {
    TrajectoryCandidate c;
    c.points = std::move(points);
    c.candidate_index = index;
    return c;
}

}  // namespace

TEST_CASE("spread_value: worked examples") {
    const SpreadParams p{0.05, 0.05};
    const Vec3 s(0.1, 0.2, 0.3);
    CHECK(spread_value(s, s, {}, p) == -1.0);
    CHECK(spread_value(s + Vec3(0.05, 0, 0), s, {}, p) == doctest::Approx(-std::exp(-0.5)).epsilon(1e-15));
    // Equidistant from sub-goal and interference with equal sigmas.
    const Vec3 i(0.3, 0.2, 0.3);
    CHECK(std::abs(spread_value(Vec3(0.2, 0.2, 0.3), s, {i}, p)) <= 1e-15);
    CHECK(std::abs(spread_value(Vec3(0.2, 0.5, 0.1), s, {i}, p)) <= 1e-15);
}

TEST_CASE("build_map: matches the closed form at every voxel center") {
    const GridSpec g = small_grid();
    const SpreadParams p{0.08, 0.05};
    const Vec3 s(0.05, -0.03, 0.04);
    const std::vector<Vec3> inter{Vec3(-0.02, 0.01, 0.05), Vec3(0.1, 0.1, 0.1)};
    const ValueMap map = build_map(s, inter, g, p);
    REQUIRE(map.values.size() == 4000);
    double worst = 0.0;
    for (int k = 0; k < 10; ++k) {
        for (int j = 0; j < 20; ++j) {
            for (int i = 0; i < 20; ++i) {
                const Vec3 x(-0.2 + (i + 0.5) * 0.02, -0.2 + (j + 0.5) * 0.02, (k + 0.5) * 0.02);
                double v = -std::exp(-(x - s).squaredNorm() / (2 * 0.08 * 0.08));
                for (const auto& o : inter) {
                    v += std::exp(-(x - o).squaredNorm() / (2 * 0.05 * 0.05));
                }
                worst = std::max(worst, std::abs(map.at(i, j, k) - v));
                CHECK(map.values[i + 20 * (j + 20 * k)] == map.at(i, j, k));
            }
        }
    }
    CHECK(worst <= 1e-12);
}

TEST_CASE("build_map: superposition of interference terms") {
    const GridSpec g = small_grid();
    const SpreadParams p;
    const Vec3 s(0.0, 0.0, 0.05);
    const Vec3 a(0.05, 0.0, 0.05), b(-0.05, 0.05, 0.1);
    const auto base = build_map(s, {}, g, p);
    const auto ma = build_map(s, {a}, g, p);
    const auto mb = build_map(s, {b}, g, p);
    const auto mab = build_map(s, {a, b}, g, p);
    for (std::size_t n = 0; n < base.values.size(); ++n) {
        CHECK(std::abs(mab.values[n] - (ma.values[n] + mb.values[n] - base.values[n])) <= 1e-12);
    }
}

TEST_CASE("build_map: minimum sits at the voxel nearest the sub-goal") {
    const GridSpec g = small_grid();
    const SpreadParams p{0.08, 0.05};
    const Vec3 s(0.033, -0.071, 0.052);
    // Interference farther than 3 sigma_I from the sub-goal.
    const auto map = build_map(s, {Vec3(-0.15, 0.15, 0.15)}, g, p);
    std::size_t argmin = 0;
    for (std::size_t n = 1; n < map.values.size(); ++n) {
        if (map.values[n] < map.values[argmin]) {
            argmin = n;
        }
    }
    const int i = static_cast<int>(argmin % 20), j = static_cast<int>((argmin / 20) % 20),
              k = static_cast<int>(argmin / 400);
    const auto expect = [](double x, double o) { return static_cast<int>(std::floor((x - o) / 0.02)); };
    CHECK(i == expect(s.x(), -0.2));
    CHECK(j == expect(s.y(), -0.2));
    CHECK(k == expect(s.z(), 0.0));
}

TEST_CASE("build_map: repulsion decreases along rays leaving an obstacle") {
    const SpreadParams p{0.08, 0.05};
    const Vec3 s(0.1, 0.1, 0.1), o(-0.05, 0.0, 0.05);
    Rng rng(11);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int ray = 0; ray < 50; ++ray) {
        const Vec3 dir = Vec3(n(rng), n(rng), n(rng)).normalized();
        double prev = kInf;
        for (int t = 0; t <= 40; ++t) {
            const Vec3 x = o + 0.005 * t * dir;
            const double repulsion = spread_value(x, s, {o}, p) - spread_value(x, s, {}, p);
            CHECK(repulsion <= prev + 1e-15);
            prev = repulsion;
        }
    }
}

TEST_CASE("build_map: values bounded by (-1, M_I]") {
    const GridSpec g = small_grid();
    const std::vector<Vec3> inter{Vec3(0, 0, 0.05), Vec3(0.02, 0, 0.05), Vec3(0.1, -0.1, 0.1)};
    const auto map = build_map(Vec3(0.01, 0.0, 0.05), inter, g, SpreadParams{});
    for (double v : map.values) {
        CHECK(v > -1.0);
        CHECK(v <= 3.0);
    }
}

TEST_CASE("build_map: rejects bad grids and sigmas") {
    GridSpec g = small_grid();
    g.voxel_size = 0.0;
    CHECK_THROWS_AS(build_map(Vec3::Zero(), {}, g, SpreadParams{}), InvalidInput);
    g = small_grid();
    g.dims[1] = 0;
    CHECK_THROWS_AS(build_map(Vec3::Zero(), {}, g, SpreadParams{}), InvalidInput);
    CHECK_THROWS_AS(build_map(Vec3::Zero(), {}, small_grid(), SpreadParams{0.0, 0.05}), InvalidInput);
}

TEST_CASE("value_at: voxel centers, midpoints and clamping") {
    const GridSpec g = small_grid();
    const auto map = build_map(Vec3(0.03, 0.01, 0.07), {Vec3(-0.05, 0.02, 0.05)}, g, SpreadParams{});
    Rng rng(4);
    std::uniform_int_distribution<int> ij(0, 19), kk(0, 9);
    for (int trial = 0; trial < 200; ++trial) {
        const int i = ij(rng), j = ij(rng), k = kk(rng);
        CHECK(value_at(map, g.center(i, j, k)) == doctest::Approx(map.at(i, j, k)).epsilon(1e-12));
    }
    const Vec3 mid = 0.5 * (g.center(4, 7, 2) + g.center(5, 7, 2));
    CHECK(value_at(map, mid) == doctest::Approx(0.5 * (map.at(4, 7, 2) + map.at(5, 7, 2))).epsilon(1e-12));
    CHECK(value_at(map, Vec3(-5.0, -5.0, -5.0)) == doctest::Approx(map.at(0, 0, 0)).epsilon(1e-12));
    CHECK(value_at(map, Vec3(5.0, 5.0, 5.0)) == doctest::Approx(map.at(19, 19, 9)).epsilon(1e-12));
}

TEST_CASE("score_trajectory: sums interpolated values") {
    GridSpec g;
    g.dims = {4, 1, 1};
    g.voxel_size = 1.0;
    g.origin = Vec3::Zero();
    ValueMap map{g, {-0.5, -0.25, 0.0, 0.25}};
    const auto c = candidate({g.center(0, 0, 0), g.center(1, 0, 0), g.center(2, 0, 0)});
    CHECK(score_trajectory(map, c).cost == doctest::Approx(-0.75));

    // A detour around an obstacle scores better than the straight line through it.
    const GridSpec grid = small_grid();
    const auto field = build_map(Vec3(0.15, 0.0, 0.05), {Vec3(0.0, 0.0, 0.05)}, grid, SpreadParams{});
    std::vector<Vec3> straight, detour;
    for (int t = 0; t <= 20; ++t) {
        const double x = -0.15 + 0.015 * t;
        straight.emplace_back(x, 0.0, 0.05);
        detour.emplace_back(x, 0.12 * std::sin(M_PI * t / 20.0), 0.05);
    }
    CHECK(score_trajectory(field, candidate(detour)).cost < score_trajectory(field, candidate(straight)).cost);
}

TEST_CASE("select_trajectory: argmin with first-index ties") {
    CHECK(select_trajectory({{0, 0.3}, {1, -0.2}, {2, 0.1}}) == 1);
    CHECK(select_trajectory({{0, 0.1}, {1, 0.1}}) == 0);
    CHECK_THROWS_AS(select_trajectory({}), InvalidInput);

    Rng rng(8);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<TrajScore> scores;
        for (int j = 0; j < 64; ++j) {
            scores.push_back({j, u(rng)});
        }
        int best = 0;
        for (int j = 0; j < 64; ++j) {
            bool ok = true;
            for (int other = 0; other < 64; ++other) {
                ok = ok && scores[j].cost <= scores[other].cost;
            }
            if (ok) {
                best = j;
                break;
            }
        }
        CHECK(select_trajectory(scores) == best);
    }
}

TEST_CASE("write_value_map: float32 little-endian payload and header") {
    const GridSpec g = small_grid();
    const auto map = build_map(Vec3(0, 0, 0.05), {Vec3(0.05, 0.05, 0.05)}, g, SpreadParams{});
    const auto dir = std::filesystem::temp_directory_path() / "vlmpc_value_map_test";
    std::filesystem::create_directories(dir);
    const auto path = dir / "map.bin";
    write_value_map(map, path);
    CHECK(std::filesystem::file_size(path) == 4000 * 4);

    std::ifstream is(path, std::ios::binary);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    for (std::size_t n : {std::size_t{0}, std::size_t{137}, std::size_t{3999}}) {
        const std::uint32_t bits = bytes[4 * n] | (bytes[4 * n + 1] << 8) | (bytes[4 * n + 2] << 16) |
                                   (static_cast<std::uint32_t>(bytes[4 * n + 3]) << 24);
        float f = 0.0f;
        std::memcpy(&f, &bits, 4);
        CHECK(f == static_cast<float>(map.values[n]));
    }

    std::ifstream hdr(path.string() + ".hdr");
    std::stringstream ss;
    ss << hdr.rdbuf();
    const std::string text = ss.str();
    CHECK(text.find("dims 20 20 10\n") != std::string::npos);
    CHECK(text.find("voxel_size 0.02") != std::string::npos);
    CHECK(text.find("origin -0.2") != std::string::npos);
    std::filesystem::remove_all(dir);
}
