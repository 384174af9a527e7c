// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "oracles.hpp"
#include "rotp/codec.hpp"
#include "rotp/rng.hpp"

using rotp::EncoderConfig;
using rotp::ObbSpec;
using rotp::Point2;
using rotp::Scene;

namespace {

ObbSpec make_obb(Point2 center, double theta_deg, double h, double w) {
    ObbSpec o;
    o.center = center;
    const double rad = theta_deg / rotp::kRadToDeg;
    o.vertex = {center.x + 0.5 * h * std::cos(rad), center.y + 0.5 * h * std::sin(rad)};
    o.h = h;
    o.w = w;
    o.theta = theta_deg;
    return o;
}

Scene one_box_scene(Point2 center, double theta, double h, double w, int cls = 0) {
    Scene s;
    s.image_width = 512;
    s.image_height = 512;
    s.annotations.push_back({rotp::obb_to_quad(make_obb(center, theta, h, w), cls), false});
    return s;
}

}  // namespace

TEST_CASE("sch_center_value pointwise examples") {
    const ObbSpec square = make_obb({0, 0}, 0, 8, 8);
    CHECK(rotp::sch_center_value({0, 0}, square, 0.125) == 1.0);
    // mu*h = mu*w = 1, both terms e^-1
    CHECK(rotp::sch_center_value({1, 0}, square, 0.125) == Catch::Approx(std::exp(-1.0)).epsilon(1e-12));

    const ObbSpec slender = make_obb({0, 0}, 0, 32, 8);
    // |p-c|^2 = 4: (e^-1 + e^-4)/2
    const double want = 0.5 * (std::exp(-1.0) + std::exp(-4.0));
    CHECK(rotp::sch_center_value({2, 0}, slender, 0.125) == Catch::Approx(want).epsilon(1e-12));
    CHECK(want == Catch::Approx(0.19309754).margin(1e-7));

    // outside the rectangle T
    CHECK(rotp::sch_center_value({0, 4.01}, slender, 0.125) == 0.0);
    CHECK(rotp::sch_center_value({16.01, 0}, slender, 0.125) == 0.0);
}

TEST_CASE("sch_center_value is non-increasing along rays within T") {
    rotp::Rng rng(101);
    for (int trial = 0; trial < 200; ++trial) {
        const double h = rng.uniform(8, 60);
        const double w = rng.uniform(2, h);
        const ObbSpec o = make_obb({rng.uniform(-5, 5), rng.uniform(-5, 5)}, rng.uniform(0, 360), h, w);
        const double ray = rng.uniform(0, 2 * std::numbers::pi);
        const Point2 dir{std::cos(ray), std::sin(ray)};
        double prev = rotp::sch_center_value(o.center, o, 0.125);
        for (int step = 1; step <= 30; ++step) {
            const Point2 p = o.center + dir * (step * 0.25);
            if (!rotp::obb_contains(o, p)) break;
            const double v = rotp::sch_center_value(p, o, 0.125);
            CHECK(v <= prev);
            prev = v;
        }
    }
}

TEST_CASE("sch sandwich property at random points") {
    rotp::Rng rng(103);
    for (int trial = 0; trial < 100; ++trial) {
        const double h = rng.uniform(4, 80);
        const double w = rng.uniform(1, h);
        const ObbSpec o = make_obb({rng.uniform(-10, 10), rng.uniform(-10, 10)}, rng.uniform(0, 360), h, w);
        for (int k = 0; k < 50; ++k) {
            const Point2 p{o.center.x + rng.uniform(-h, h), o.center.y + rng.uniform(-h, h)};
            if (!rotp::obb_contains(o, p)) continue;
            const double d2 = rotp::dot(p - o.center, p - o.center);
            const double lo = std::exp(-d2 / (0.125 * w));
            const double hi = std::exp(-d2 / (0.125 * h));
            const double v = rotp::sch_center_value(p, o, 0.125);
            CHECK(lo <= v);
            CHECK(v <= hi);
        }
    }
}

TEST_CASE("squared denominator mode changes the kernel scale") {
    const ObbSpec o = make_obb({0, 0}, 0, 16, 16);
    const double linear = rotp::sch_center_value({2, 0}, o, 0.125);
    const double squared = rotp::sch_center_value({2, 0}, o, 0.125, true);
    CHECK(linear == Catch::Approx(std::exp(-4.0 / 2.0)).epsilon(1e-12));
    CHECK(squared == Catch::Approx(std::exp(-4.0 / 32.0)).epsilon(1e-12));
    CHECK(squared > linear);

    Scene s = one_box_scene({128, 128}, 0, 64, 16);
    EncoderConfig plain;
    EncoderConfig wide;
    wide.squared_denominator = true;
    const auto a = rotp::encode_scene(s, plain);
    const auto b = rotp::encode_scene(s, wide);
    CHECK(a.center_hm.data != b.center_hm.data);
}

TEST_CASE("vertex_value examples") {
    CHECK(rotp::vertex_value({3, 4}, {3, 4}, 16, 0.125) == 1.0);
    const double mu_h = 0.125 * 16;  // = 2
    CHECK(rotp::vertex_value({std::sqrt(mu_h), 0}, {0, 0}, 16, 0.125) ==
          Catch::Approx(std::exp(-1.0)).epsilon(1e-12));
    // below the floor -> stored as zero
    CHECK(rotp::vertex_value({100, 0}, {0, 0}, 16, 0.125) == 0.0);
}

TEST_CASE("gaussian_value examples") {
    CHECK(rotp::gaussian_value({5, 5}, {5, 5}, 2.0) == 1.0);
    const double sigma = 1.7;
    CHECK(rotp::gaussian_value({sigma * std::numbers::sqrt2, 0}, {0, 0}, sigma) ==
          Catch::Approx(std::exp(-1.0)).epsilon(1e-12));
    CHECK(rotp::gaussian_value({1e4, 0}, {0, 0}, sigma) == 0.0);
}

TEST_CASE("gaussian radius rule shrinks for slender boxes") {
    const double sq = rotp::gaussian_sigma_for(20, 20, 0.7);
    const double sl = rotp::gaussian_sigma_for(40, 2, 0.7);
    CHECK(sq > sl);
    CHECK(sl > 0.0);
}

TEST_CASE("encode_scene empty scene") {
    Scene s;
    s.image_width = 64;
    s.image_height = 32;
    EncoderConfig cfg;
    cfg.num_classes = 2;
    const auto maps = rotp::encode_scene(s, cfg);
    CHECK(maps.center_hm.width == 16);
    CHECK(maps.center_hm.height == 8);
    for (float v : maps.center_hm.data) CHECK(v == 0.0f);
    for (float v : maps.pos_mask.data) CHECK(v == 0.0f);
    CHECK(rotp::heatmap_peak_truth(maps).empty());
}

TEST_CASE("encode_scene peak cell and offsets") {
    Scene s = one_box_scene({413, 221}, 30, 80, 20);
    EncoderConfig cfg;
    const auto maps = rotp::encode_scene(s, cfg);
    // 413 = 4*103 + 1, 221 = 4*55 + 1
    CHECK(maps.center_hm.at(0, 55, 103) == 1.0f);
    CHECK(maps.pos_mask.at(0, 55, 103) == 1.0f);
    CHECK(maps.offset_map.at(0, 55, 103) == Catch::Approx(0.25));
    CHECK(maps.offset_map.at(1, 55, 103) == Catch::Approx(0.25));
    CHECK(maps.size_map.at(0, 55, 103) == Catch::Approx(5.0));   // w/d
    CHECK(maps.size_map.at(1, 55, 103) == Catch::Approx(20.0));  // h/d
    CHECK(maps.direction_map.at(0, 55, 103) == Catch::Approx(30.0).margin(1e-4));

    const auto peaks = rotp::heatmap_peak_truth(maps);
    int centers = 0, vertices = 0;
    for (const auto& p : peaks) {
        (p.kind == rotp::PeakKind::Center ? centers : vertices) += 1;
    }
    CHECK(centers == 1);
    CHECK(vertices == 1);
}

TEST_CASE("encoded planes stay within [0,1] and peak is the support maximum") {
    rotp::Rng rng(107);
    for (int trial = 0; trial < 20; ++trial) {
        Scene s = one_box_scene({rng.uniform(100, 400), rng.uniform(100, 400)},
                                rng.uniform(0, 360), rng.uniform(40, 200), rng.uniform(8, 40));
        EncoderConfig cfg;
        cfg.heatmap_kind = trial % 2 == 0 ? rotp::HeatmapKind::SolarCorona : rotp::HeatmapKind::Gaussian;
        const auto maps = rotp::encode_scene(s, cfg);
        float max_v = 0.0f;
        for (float v : maps.center_hm.data) {
            CHECK(v >= 0.0f);
            CHECK(v <= 1.0f);
            max_v = std::max(max_v, v);
        }
        CHECK(max_v == 1.0f);
        for (float v : maps.vertex_hm.data) {
            CHECK(v >= 0.0f);
            CHECK(v <= 1.0f);
        }
    }
}

TEST_CASE("encode_scene is deterministic") {
    rotp::Rng rng(109);
    Scene s;
    s.image_width = 256;
    s.image_height = 256;
    for (int i = 0; i < 5; ++i) {
        s.annotations.push_back({rotp::obb_to_quad(make_obb({rng.uniform(40, 216), rng.uniform(40, 216)},
                                                            rng.uniform(0, 360), rng.uniform(20, 60),
                                                            rng.uniform(6, 18)),
                                                   i % 2),
                                 false});
    }
    EncoderConfig cfg;
    cfg.num_classes = 2;
    const auto a = rotp::encode_scene(s, cfg);
    const auto b = rotp::encode_scene(s, cfg);
    CHECK(a.center_hm.data == b.center_hm.data);
    CHECK(a.vertex_hm.data == b.vertex_hm.data);
    CHECK(a.size_map.data == b.size_map.data);
    CHECK(a.offset_map.data == b.offset_map.data);
    CHECK(a.direction_map.data == b.direction_map.data);
    CHECK(a.pos_mask.data == b.pos_mask.data);
}

TEST_CASE("same-class overlap stores the per-cell maximum, order independent") {
    Scene ab = one_box_scene({200, 200}, 15, 120, 24);
    ab.annotations.push_back(one_box_scene({220, 204}, 80, 100, 30).annotations[0]);
    Scene ba = ab;
    std::swap(ba.annotations[0], ba.annotations[1]);
    EncoderConfig cfg;
    const auto m1 = rotp::encode_scene(ab, cfg);
    const auto m2 = rotp::encode_scene(ba, cfg);
    CHECK(m1.center_hm.data == m2.center_hm.data);
    CHECK(m1.vertex_hm.data == m2.vertex_hm.data);
    CHECK(m1.size_map.data == m2.size_map.data);
}

TEST_CASE("peak collision keeps one truth entry with a flag, larger area wins regression") {
    Scene s;
    s.image_width = 256;
    s.image_height = 256;
    // same center cell, different sizes
    s.annotations.push_back({rotp::obb_to_quad(make_obb({101, 101}, 0, 40, 10), 0), false});
    s.annotations.push_back({rotp::obb_to_quad(make_obb({102, 102}, 90, 80, 20), 0), false});
    EncoderConfig cfg;
    const auto maps = rotp::encode_scene(s, cfg);
    int center_truths = 0;
    bool flagged = false;
    for (const auto& p : rotp::heatmap_peak_truth(maps)) {
        if (p.kind == rotp::PeakKind::Center) {
            ++center_truths;
            flagged = flagged || p.collided;
        }
    }
    CHECK(center_truths == 1);
    CHECK(flagged);
    // larger instance's size at the shared cell
    CHECK(maps.size_map.at(1, 25, 25) == Catch::Approx(20.0));
    CHECK_FALSE(maps.warnings.empty());
}

TEST_CASE("small instance triggers a warning, still encoded at its cell") {
    Scene s = one_box_scene({50, 50}, 45, 3, 1.5);
    EncoderConfig cfg;
    const auto maps = rotp::encode_scene(s, cfg);
    CHECK(maps.center_hm.at(0, 12, 12) == 1.0f);
    bool warned = false;
    for (const auto& w : maps.warnings) warned = warned || w.find("smaller than one output cell") != std::string::npos;
    CHECK(warned);
}

TEST_CASE("solar corona support follows the box mask while gaussian support does not") {
    // slender box: SCH support is the rotated rectangle, Gaussian a small disc
    Scene s = one_box_scene({200, 200}, 0, 160, 12);
    EncoderConfig sch_cfg;
    EncoderConfig gauss_cfg;
    gauss_cfg.heatmap_kind = rotp::HeatmapKind::Gaussian;
    const auto sch = rotp::encode_scene(s, sch_cfg);
    const auto gau = rotp::encode_scene(s, gauss_cfg);
    int sch_support = 0, gau_support = 0;
    for (float v : sch.center_hm.data) sch_support += v > 0.0f;
    for (float v : gau.center_hm.data) gau_support += v > 0.0f;
    CHECK(sch_support > gau_support);
    // five cells out along the long axis SCH is still warm, Gaussian is not
    CHECK(sch.center_hm.at(0, 50, 55) > 0.0f);
    CHECK(gau.center_hm.at(0, 50, 55) == 0.0f);
    // two cells across the short axis is outside T for SCH, inside the Gaussian disc
    CHECK(sch.center_hm.at(0, 52, 50) == 0.0f);
    CHECK(gau.center_hm.at(0, 52, 50) > 0.0f);
}
