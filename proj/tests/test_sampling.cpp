#include "helpers.hpp"
#include "vlmpc/action_sampling.hpp"

#include <doctest.h>

#include <cmath>

using namespace vlmpc;
using namespace vlmpc::sampling;
using perception::DirectionHint;

namespace {

ActionVector vec(std::initializer_list<double> values) {
    ActionVector v = ActionVector::Zero();
    int i = 0;
    for (double x : values) {
        v[i++] = x;
    }
    return v;
}

}  // namespace

TEST_CASE("hint_to_mean: hand-evaluated cases") {
    SamplingParams p;
    CHECK(hint_to_mean(DirectionHint{}, p).mu == ActionVector::Zero());

    DirectionHint h;
    h.d_hat = {1, 0, 0};
    h.g = 1;
    CHECK(hint_to_mean(h, p).mu == vec({0.04, 0, 0, 0, 0, 0, 1}));

    h.d_hat = {-1, -1, 1};
    h.g = 0;
    const ActionVector mu = hint_to_mean(h, p).mu;
    CHECK(mu.head<3>() == Vec3(-0.04, -0.04, 0.04));

    h.r_hat = {0, 1, -1};
    CHECK(hint_to_mean(h, p).mu.segment<3>(3) == Vec3(0, 0.1, -0.1));
}

TEST_CASE("hint_to_mean: negating the hint negates translation and rotation") {
    SamplingParams p;
    for (int code = 0; code < 729; ++code) {
        DirectionHint h;
        int c = code;
        for (int i = 0; i < 3; ++i, c /= 3) {
            h.d_hat[i] = c % 3 - 1;
        }
        for (int i = 0; i < 3; ++i, c /= 3) {
            h.r_hat[i] = c % 3 - 1;
        }
        DirectionHint neg = h;
        for (auto& v : neg.d_hat) {
            v = -v;
        }
        for (auto& v : neg.r_hat) {
            v = -v;
        }
        CHECK(hint_to_mean(neg, p).mu.head<6>() == -hint_to_mean(h, p).mu.head<6>());
    }
}

TEST_CASE("blend_means: identities and hand-evaluated mix") {
    SamplingParams p;
    SamplingMean vlm{vec({0.04, 0, 0, 0, 0, 0, 1})};
    SamplingMean sub{vec({0, 0.04, 0, 0, 0, 0, 0})};

    p.w_vlm = 1.0;
    p.w_sub = 0.0;
    CHECK(blend_means(vlm, sub, p).mu == vlm.mu);

    p.w_vlm = 0.0;
    p.w_sub = 1.0;
    CHECK(blend_means(vlm, sub, p).mu == sub.mu);

    p.w_vlm = 0.5;
    p.w_sub = 0.5;
    vlm.mu[6] = 0.0;
    const ActionVector mixed = blend_means(vlm, sub, p).mu;
    CHECK(mixed == vec({0.02, 0.02, 0, 0, 0, 0, 0}));

    p = SamplingParams{};
    vlm.mu[6] = 1.0;
    CHECK(blend_means(vlm, std::nullopt, p).mu == p.w_vlm * vlm.mu);
}

TEST_CASE("blend_means: gripper clamped to [0, 1]") {
    SamplingParams p;
    p.w_vlm = 1.0;
    p.w_sub = 1.0;
    const SamplingMean one{vec({0, 0, 0, 0, 0, 0, 1})};
    CHECK(blend_means(one, one, p).mu[6] == 1.0);
    p.w_vlm = -1.0;
    p.w_sub = 0.0;
    CHECK(blend_means(one, one, p).mu[6] == 0.0);
}

TEST_CASE("sample_sequences: zero sigma returns the mean") {
    SamplingParams p;
    p.sigma.setZero();
    p.N = 5;
    p.T = 3;
    const SamplingMean m{vec({0.01, -0.02, 0.03, 0.1, 0, -0.1, 0.7})};
    Rng rng(1);
    const auto seqs = sample_sequences(m, p, rng);
    REQUIRE(seqs.size() == 5);
    for (const auto& s : seqs) {
        REQUIRE(s.size() == 3);
        for (const auto& a : s) {
            CHECK(a.d == m.mu.head<3>());
            CHECK(a.r == m.mu.segment<3>(3));
            CHECK(a.g == 1);
        }
    }
}

TEST_CASE("sample_sequences: sample mean within 4 sigma") {
    SamplingParams p;
    p.N = 1024;
    p.T = 1;
    p.sigma = vec({0.01, 0.01, 0.01, 0.05, 0.05, 0.05, 0.3});
    const SamplingMean m{vec({0.02, 0, 0, 0, 0, 0, 0})};
    Rng rng(2024);
    const auto seqs = sample_sequences(m, p, rng);
    double sum = 0.0;
    for (const auto& s : seqs) {
        sum += s.front().d.x();
    }
    CHECK(std::abs(sum / 1024 - 0.02) <= 4 * 0.01 / std::sqrt(1024.0));
}

TEST_CASE("sample_sequences: every component converges at the 1/sqrt(NT) rate") {
    SamplingParams p;
    p.N = 400;
    p.T = 5;
    p.sigma = vec({0.005, 0.005, 0.005, 0.02, 0.02, 0.02, 0.0});
    const SamplingMean m{vec({0.01, -0.01, 0.005, 0.05, -0.05, 0.0, 1.0})};
    Rng rng(9);
    const auto seqs = sample_sequences(m, p, rng);
    ActionVector sum = ActionVector::Zero();
    for (const auto& s : seqs) {
        for (const auto& a : s) {
            sum += to_vector(a);
        }
    }
    const double n = p.N * p.T;
    for (int k = 0; k < 6; ++k) {
        CHECK(std::abs(sum[k] / n - m.mu[k]) <= 4 * p.sigma[k] / std::sqrt(n));
    }
    CHECK(sum[6] == n);
}

TEST_CASE("sample_sequences: deterministic, clamped, and validated") {
    SamplingParams p;
    p.sigma = vec({1, 1, 1, 1, 1, 1, 1});
    const SamplingMean m;
    Rng a(77), b(77);
    const auto s1 = sample_sequences(m, p, a);
    const auto s2 = sample_sequences(m, p, b);
    CHECK(s1 == s2);
    for (const auto& seq : s1) {
        for (const auto& act : seq) {
            CHECK(act.d.cwiseAbs().maxCoeff() <= p.limits.d_max);
            CHECK(act.r.cwiseAbs().maxCoeff() <= p.limits.r_max);
            CHECK((act.g == 0 || act.g == 1));
        }
    }
    p.N = 0;
    CHECK_THROWS_AS(sample_sequences(m, p, a), InvalidInput);
    p.N = 1;
    p.sigma[2] = -0.1;
    CHECK_THROWS_AS(sample_sequences(m, p, a), InvalidInput);
}

TEST_CASE("mean_from_tail") {
    sim::Action a0, a1, a2;
    a1.d = Vec3(0.04, 0, 0);
    a1.g = 1;
    CHECK(mean_from_tail({a0, a1}).mu == vec({0.04, 0, 0, 0, 0, 0, 1}));

    a1.d = Vec3(0.02, 0, 0);
    a2.d = Vec3(0.04, 0, 0);
    CHECK(mean_from_tail({a0, a1, a2}).mu[0] == doctest::Approx(0.03));
    CHECK(mean_from_tail({a1}).mu == ActionVector::Zero());
}
