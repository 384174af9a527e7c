// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include "rotp/roundtrip.hpp"

TEST_CASE("roundtrip driver recovers seeded scenes") {
    rotp::RoundtripOptions opt;
    opt.seed = 77;
    opt.scenes = 30;
    opt.encoder.num_classes = 3;
    const auto rep = rotp::run_roundtrip(opt);
    CHECK(rep.scenes == 30);
    CHECK(rep.instances > 0);
    CHECK(rep.failures == 0);
    CHECK(rep.spurious == 0);
    CHECK(rep.min_iou >= 0.95);
    CHECK(rep.max_direction_err <= 1.0);
}

TEST_CASE("roundtrip report is independent of the jobs count") {
    rotp::RoundtripOptions opt;
    opt.seed = 78;
    opt.scenes = 24;
    opt.encoder.num_classes = 3;
    const auto serial = rotp::run_roundtrip(opt);
    opt.jobs = 4;
    const auto parallel = rotp::run_roundtrip(opt);
    CHECK(serial.instances == parallel.instances);
    CHECK(serial.failures == parallel.failures);
    CHECK(serial.mean_iou == parallel.mean_iou);
    CHECK(serial.min_iou == parallel.min_iou);
    CHECK(serial.max_direction_err == parallel.max_direction_err);
}

TEST_CASE("direction noise favours keypoint matching") {
    rotp::RoundtripOptions opt;
    opt.seed = 79;
    opt.scenes = 40;
    opt.encoder.num_classes = 3;
    opt.direction_noise_deg = 5.0;
    opt.iou_pass = 0.0;
    opt.direction_pass_deg = 360.0;
    const auto km = rotp::run_roundtrip(opt);
    opt.decode.mode = rotp::DecodeMode::AngleOnly;
    const auto ao = rotp::run_roundtrip(opt);
    CHECK(km.mean_iou >= ao.mean_iou);
    CHECK(km.mean_iou > 0.99);  // matching shields the box from angle noise
}

TEST_CASE("argmax jitter favours the solar corona encoding") {
    rotp::RoundtripOptions opt;
    opt.seed = 80;
    opt.scenes = 40;
    opt.max_instances = 6;
    opt.encoder.num_classes = 3;
    opt.jitter = true;
    opt.synth.aspect_lo = 5.0;
    opt.synth.long_lo = 100.0;
    opt.synth.long_hi = 400.0;
    opt.synth.image_w = opt.synth.image_h = 1024;
    opt.iou_pass = 0.0;
    opt.direction_pass_deg = 360.0;
    const auto sch = rotp::run_roundtrip(opt);
    opt.encoder.heatmap_kind = rotp::HeatmapKind::Gaussian;
    const auto gau = rotp::run_roundtrip(opt);
    CHECK(sch.mean_iou >= gau.mean_iou);
    CHECK(sch.detected >= gau.detected);
}

TEST_CASE("roundtrip report serializes its headline numbers") {
    rotp::RoundtripOptions opt;
    opt.seed = 81;
    opt.scenes = 3;
    opt.encoder.num_classes = 2;
    const auto rep = rotp::run_roundtrip(opt);
    const auto j = rotp::roundtrip_report_to_json(rep);
    CHECK(j.at("scenes").get<int>() == 3);
    CHECK(j.at("instances").get<long>() == rep.instances);
    CHECK(j.at("mean_iou").get<double>() == rep.mean_iou);
    CHECK(j.contains("failures"));
    CHECK(j.contains("spurious"));
}
