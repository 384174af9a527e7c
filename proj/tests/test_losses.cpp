// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "rotp/codec.hpp"
#include "rotp/losses.hpp"
#include "rotp/rng.hpp"

using rotp::FocalParams;
using rotp::LossComponents;
using rotp::LossWeights;

TEST_CASE("smooth_l1 values and gradient") {
    CHECK(rotp::smooth_l1(0.5).value == 0.125);
    CHECK(rotp::smooth_l1(2.0).value == 1.5);
    CHECK(rotp::smooth_l1(-3.0).value == 2.5);
    CHECK(rotp::smooth_l1(0.0).value == 0.0);
    CHECK(rotp::smooth_l1(0.5).grad == 0.5);
    CHECK(rotp::smooth_l1(2.0).grad == 1.0);
    CHECK(rotp::smooth_l1(-3.0).grad == -1.0);
}

TEST_CASE("smooth_l1 gradient matches finite differences") {
    rotp::Rng rng(201);
    for (int i = 0; i < 100; ++i) {
        double x = rng.uniform(-5, 5);
        if (std::abs(std::abs(x) - 1.0) <= 1e-3) continue;  // kink band
        const double fd = oracle::central_diff([](double v) { return rotp::smooth_l1(v).value; }, x);
        CHECK(oracle::rel_err(rotp::smooth_l1(x).grad, fd) <= 1e-5);
    }
}

TEST_CASE("focal loss frozen scalar cases") {
    const std::vector<double> truth{1.0};
    CHECK(rotp::heatmap_focal_loss(std::vector<double>{1.0}, truth, 1).value ==
          Catch::Approx(0.0).margin(1e-9));
    // -(1-0.5)^2 * log 0.5
    CHECK(rotp::heatmap_focal_loss(std::vector<double>{0.5}, truth, 1).value ==
          Catch::Approx(0.25 * std::log(2.0)).epsilon(1e-12));
    CHECK(0.25 * std::log(2.0) == Catch::Approx(0.173287).margin(1e-6));
}

TEST_CASE("focal loss with zero positives is flagged, not divided by zero") {
    const std::vector<double> truth{0.0, 0.0};
    const auto r = rotp::heatmap_focal_loss(std::vector<double>{0.3, 0.1}, truth, 0);
    CHECK(r.npos_flagged);
    CHECK(std::isfinite(r.value));
    CHECK(r.value > 0.0);
}

TEST_CASE("focal loss gradient matches finite differences on a random plane") {
    rotp::Rng rng(203);
    std::vector<double> pred(25), truth(25);
    for (std::size_t i = 0; i < pred.size(); ++i) {
        pred[i] = rng.uniform(0.05, 0.95);
        const double u = rng.next_double();
        truth[i] = u < 0.2 ? 1.0 : (u < 0.6 ? rng.uniform(0.0, 0.9) : 0.0);
    }
    const std::size_t n_pos = rotp::count_npos(truth, rotp::NposRule::TruthPositiveCells);
    const auto res = rotp::heatmap_focal_loss(pred, truth, n_pos);
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double fd = oracle::central_diff(
            [&](double v) {
                std::vector<double> p = pred;
                p[i] = v;
                return rotp::heatmap_focal_loss(p, truth, n_pos).value;
            },
            pred[i]);
        CHECK(oracle::rel_err(res.grad[i], fd) <= 1e-5);
    }
}

TEST_CASE("count_npos rules") {
    const std::vector<double> truth{1.0, 0.5, 0.0, 1.0, 1e-6};
    CHECK(rotp::count_npos(truth, rotp::NposRule::TruthPositiveCells) == 4);
    CHECK(rotp::count_npos(truth, rotp::NposRule::PeakCount) == 2);
}

TEST_CASE("focal loss decreases along the path toward a binary truth") {
    rotp::Rng rng(207);
    std::vector<double> pred(64), truth(64, 0.0);
    for (auto& p : pred) p = rng.uniform(0.02, 0.98);
    truth[5] = truth[40] = 1.0;
    const std::size_t n_pos = rotp::count_npos(truth, rotp::NposRule::TruthPositiveCells);
    double prev = rotp::heatmap_focal_loss(pred, truth, n_pos).value;
    for (int step = 1; step <= 10; ++step) {
        const double t = step / 10.0;
        std::vector<double> mix(pred.size());
        for (std::size_t i = 0; i < pred.size(); ++i) mix[i] = pred[i] + t * (truth[i] - pred[i]);
        const double cur = rotp::heatmap_focal_loss(mix, truth, n_pos).value;
        CHECK(cur <= prev + 1e-12);
        prev = cur;
    }
}

TEST_CASE("direction loss examples") {
    CHECK(rotp::direction_loss(std::vector<double>{90.0}, std::vector<double>{90.0}) == 0.0);
    CHECK(rotp::direction_loss(std::vector<double>{92.0}, std::vector<double>{90.0}) == 1.5);
    CHECK(rotp::direction_loss(std::vector<double>{10.0, 30.0}, std::vector<double>{10.5, 32.0}) ==
          Catch::Approx(0.8125).epsilon(1e-12));
    CHECK(rotp::direction_loss({}, {}) == 0.0);
}

TEST_CASE("direction loss wrap mode folds the 0/360 seam") {
    // raw residual 358 vs wrapped residual -2
    CHECK(rotp::direction_loss(std::vector<double>{359.0}, std::vector<double>{1.0}) == 357.5);
    CHECK(rotp::direction_loss(std::vector<double>{359.0}, std::vector<double>{1.0}, true) == 1.5);
}

TEST_CASE("offset loss examples and oracle recomputation") {
    using V4 = std::array<double, 4>;
    const std::vector<V4> zero{{0, 0, 0, 0}};
    CHECK(rotp::offset_loss(zero, zero) == 0.0);
    const std::vector<V4> pred{{0.0, 0.0, 0.0, 0.0}};
    const std::vector<V4> truth{{0.25, 0.0, 0.0, 0.0}};
    CHECK(rotp::offset_loss(pred, truth) == Catch::Approx(0.03125).epsilon(1e-12));

    rotp::Rng rng(211);
    std::vector<V4> p(7), t(7);
    double want = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        for (int k = 0; k < 4; ++k) {
            p[i][k] = rng.uniform(-3, 3);
            t[i][k] = rng.uniform(-3, 3);
            const double r = std::abs(t[i][k] - p[i][k]);
            want += r < 1.0 ? 0.5 * r * r : r - 0.5;
        }
    }
    want /= static_cast<double>(p.size());
    CHECK(rotp::offset_loss(p, t) == Catch::Approx(want).epsilon(1e-12));
}

TEST_CASE("size loss examples") {
    using V2 = std::array<double, 2>;
    const std::vector<V2> a{{3, 9}};
    CHECK(rotp::size_loss(a, a) == 0.0);
    const std::vector<V2> pred{{3, 9}};
    const std::vector<V2> truth{{4, 10}};
    CHECK(rotp::size_loss(pred, truth) == 1.0);
    CHECK(rotp::size_loss({}, {}) == 0.0);
}

TEST_CASE("total loss weighting") {
    CHECK(rotp::total_loss({0, 0, 0, 0, 0}) == 0.0);
    CHECK(rotp::total_loss({1, 1, 1, 1, 1}) == Catch::Approx(4.1).epsilon(1e-12));
    LossComponents c{1, 1, 1, 1, 1};
    LossWeights w;
    const double base = rotp::total_loss(c, w);
    c.l_offsets = 2.0;
    CHECK(rotp::total_loss(c, w) - base == Catch::Approx(0.1).epsilon(1e-9));
    c.l_offsets = 1.0;
    c.l_d = 2.0;
    CHECK(rotp::total_loss(c, w) - base == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("loss pipeline over encoded planes") {
    rotp::Rng rng(217);
    rotp::Scene scene;
    scene.image_width = scene.image_height = 256;
    for (int i = 0; i < 4; ++i) {
        rotp::ObbSpec o;
        o.center = {48.0 + 50.0 * i, 60.0 + 40.0 * i};
        const double rad = rng.uniform(0, 2 * std::numbers::pi);
        o.h = rng.uniform(24, 48);
        o.w = rng.uniform(8, 16);
        o.vertex = {o.center.x + 0.5 * o.h * std::cos(rad), o.center.y + 0.5 * o.h * std::sin(rad)};
        scene.annotations.push_back({rotp::obb_to_quad(o, 0), false});
    }
    rotp::EncoderConfig cfg;
    const auto maps = rotp::encode_scene(scene, cfg);

    auto widen = [](const rotp::Plane& p) { return std::vector<double>(p.data.begin(), p.data.end()); };
    const auto center_truth = widen(maps.center_hm);
    const auto vertex_truth = widen(maps.vertex_hm);

    // supervised-peak lists straight from the positive mask
    std::vector<double> theta_truth;
    std::vector<std::array<double, 4>> off_truth;
    std::vector<std::array<double, 2>> size_truth;
    for (const auto& pk : maps.center_peaks) {
        theta_truth.push_back(maps.direction_map.at(0, pk.y, pk.x));
        off_truth.push_back({maps.offset_map.at(0, pk.y, pk.x), maps.offset_map.at(1, pk.y, pk.x),
                             maps.offset_map.at(2, pk.y, pk.x), maps.offset_map.at(3, pk.y, pk.x)});
        size_truth.push_back({maps.size_map.at(0, pk.y, pk.x), maps.size_map.at(1, pk.y, pk.x)});
    }

    rotp::LossComponents exact;
    const std::size_t n_pos_c = rotp::count_npos(center_truth, rotp::NposRule::TruthPositiveCells);
    const std::size_t n_pos_v = rotp::count_npos(vertex_truth, rotp::NposRule::TruthPositiveCells);
    exact.l_hc = rotp::heatmap_focal_loss(center_truth, center_truth, n_pos_c).value;
    exact.l_ht = rotp::heatmap_focal_loss(vertex_truth, vertex_truth, n_pos_v).value;
    exact.l_d = rotp::direction_loss(theta_truth, theta_truth);
    exact.l_offsets = rotp::offset_loss(off_truth, off_truth);
    exact.l_reg = rotp::size_loss(size_truth, size_truth);
    CHECK(exact.l_d == 0.0);
    CHECK(exact.l_offsets == 0.0);
    CHECK(exact.l_reg == 0.0);
    // soft corona cells keep the focal terms positive even at exact truth
    CHECK(exact.l_hc > 0.0);
    CHECK(rotp::total_loss(exact) == Catch::Approx(exact.l_ht + exact.l_hc).epsilon(1e-12));

    // a 2-degree direction error at every peak costs lambda4 * mean smooth_l1(2)
    auto theta_pred = theta_truth;
    for (auto& t : theta_pred) t += 2.0;
    rotp::LossComponents noisy = exact;
    noisy.l_d = rotp::direction_loss(theta_pred, theta_truth);
    CHECK(rotp::total_loss(noisy) - rotp::total_loss(exact) == Catch::Approx(1.5).epsilon(1e-9));
}

TEST_CASE("losses are nonnegative and zero at exact prediction") {
    rotp::Rng rng(213);
    std::vector<double> theta(5);
    for (auto& v : theta) v = rng.uniform(0, 360);
    CHECK(rotp::direction_loss(theta, theta) == 0.0);
    std::vector<double> pert = theta;
    for (auto& v : pert) v += rng.uniform(-20, 20);
    CHECK(rotp::direction_loss(pert, theta) >= 0.0);
}
