// SPDX-License-Identifier: Apache-2.0
//
// Seeded encode->decode round-trip driver, the workhorse behind the
// roundtrip subcommand and the ablation comparisons:
//   - exact mode: decode the encoded planes as-is;
//   - direction noise: perturb the direction plane at supervised peaks
//     before decoding (vertex peaks stay exact);
//   - argmax jitter: simulate a detector whose center argmax lands up to one
//     cell off for slender instances. The detection keeps the heatmap's
//     confidence at the displaced cell and exact regression heads, isolating
//     the heatmap's localization behaviour.

#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <future>
#include <thread>
#include <vector>

#include <json.hpp>

#include "rotp/codec.hpp"
#include "rotp/data_io.hpp"
#include "rotp/decoder.hpp"
#include "rotp/geometry.hpp"
#include "rotp/rng.hpp"

namespace rotp {

struct RoundtripOptions {
    std::uint64_t seed = 0;
    int scenes = 10;
    int max_instances = 20;  // per-scene count drawn from [1, max_instances]
    SynthSpec synth;         // count field is overridden per scene
    EncoderConfig encoder;
    DecodeConfig decode;
    double iou_pass = 0.95;
    double direction_pass_deg = 1.0;
    bool jitter = false;
    double jitter_min_aspect = 5.0;
    double direction_noise_deg = 0.0;
    int jobs = 1;
};

struct SceneResult {
    int instances = 0;
    int detected = 0;
    int failures = 0;
    int spurious = 0;
    int fallbacks = 0;
    double iou_sum = 0.0;
    double min_iou = 1.0;
    double max_direction_err = 0.0;
};

struct RoundtripReport {
    int scenes = 0;
    long instances = 0;
    long detected = 0;
    long failures = 0;
    long spurious = 0;
    long fallbacks = 0;
    double mean_iou = 0.0;
    double min_iou = 1.0;
    double max_direction_err = 0.0;
};

namespace detail {

inline double circular_err_deg(double a, double b) {
    double d = std::fmod(std::abs(a - b), 360.0);
    return std::min(d, 360.0 - d);
}

inline SceneResult run_scene(std::uint64_t scene_seed, const RoundtripOptions& opt) {
    Rng meta(scene_seed);
    SynthSpec spec = opt.synth;
    spec.num_classes = opt.encoder.num_classes;
    spec.count = 1 + static_cast<int>(meta.uniform_int(static_cast<std::uint64_t>(opt.max_instances)));
    const Scene scene = synth_scene(meta.next_u64(), spec);
    Rng noise(meta.next_u64());

    TargetMaps maps = encode_scene(scene, opt.encoder);

    SceneResult res;
    res.instances = static_cast<int>(scene.annotations.size());

    std::vector<Detection> dets;
    if (opt.jitter) {
        // teacher-forced assembly at the displaced argmax
        const int d = opt.encoder.down_ratio;
        for (const auto& ann : scene.annotations) {
            const ObbSpec obb = quad_to_obb(ann.quad);
            const int cls = ann.quad.class_id;
            const int pcx = static_cast<int>(std::floor(obb.center.x / d));
            const int pcy = static_cast<int>(std::floor(obb.center.y / d));
            int jx = 0, jy = 0;
            if (obb.h / obb.w >= opt.jitter_min_aspect) {
                jx = static_cast<int>(noise.uniform_int_range(-1, 1));
                jy = static_cast<int>(noise.uniform_int_range(-1, 1));
            }
            const int qx = std::clamp(pcx + jx, 0, maps.center_hm.width - 1);
            const int qy = std::clamp(pcy + jy, 0, maps.center_hm.height - 1);
            const double score = maps.center_hm.at(cls, qy, qx);
            if (score < opt.decode.score_threshold) continue;
            const Point2 c{(qx + (obb.center.x / d - std::floor(obb.center.x / d))) * d,
                           (qy + (obb.center.y / d - std::floor(obb.center.y / d))) * d};
            const Point2 axis = (obb.vertex - obb.center) * (2.0 / obb.h);
            dets.push_back(detail::assemble(c, axis, obb.h, obb.w, cls, score,
                                            Provenance::MatchedVertex));
        }
    } else {
        if (opt.direction_noise_deg > 0.0) {
            for (const PeakRecord& pk : maps.center_peaks) {
                float& slot = maps.direction_map.at(0, pk.y, pk.x);
                double v = slot + noise.uniform(-opt.direction_noise_deg, opt.direction_noise_deg);
                v = std::fmod(v + 360.0, 360.0);
                slot = static_cast<float>(v);
            }
        }
        dets = decode(maps, opt.decode);
    }

    std::vector<bool> det_used(dets.size(), false);
    for (const auto& ann : scene.annotations) {
        double best_iou = 0.0;
        int best = -1;
        for (std::size_t k = 0; k < dets.size(); ++k) {
            if (dets[k].class_id != ann.quad.class_id) continue;
            const double iou = rotated_iou(ann.quad, dets[k].quad).iou;
            if (iou > best_iou) {
                best_iou = iou;
                best = static_cast<int>(k);
            }
        }
        double dir_err = 0.0;
        if (best >= 0 && best_iou > 0.0) {
            det_used[static_cast<std::size_t>(best)] = true;
            res.detected += 1;
            const ObbSpec got = quad_to_obb(dets[static_cast<std::size_t>(best)].quad);
            const ObbSpec want = quad_to_obb(ann.quad);
            dir_err = circular_err_deg(got.theta, want.theta);
            res.max_direction_err = std::max(res.max_direction_err, dir_err);
            if (dets[static_cast<std::size_t>(best)].provenance == Provenance::DirectionFallback) {
                res.fallbacks += 1;
            }
        }
        res.iou_sum += best_iou;
        res.min_iou = std::min(res.min_iou, best_iou);
        if (best_iou < opt.iou_pass || dir_err > opt.direction_pass_deg) res.failures += 1;
    }
    for (std::size_t k = 0; k < dets.size(); ++k) {
        if (!det_used[k]) res.spurious += 1;
    }
    return res;
}

}  // namespace detail

inline RoundtripReport run_roundtrip(const RoundtripOptions& opt) {
    std::vector<SceneResult> results(static_cast<std::size_t>(opt.scenes));
    const int jobs = std::max(1, opt.jobs);
    if (jobs == 1) {
        for (int i = 0; i < opt.scenes; ++i) {
            results[static_cast<std::size_t>(i)] = detail::run_scene(opt.seed + static_cast<std::uint64_t>(i), opt);
        }
    } else {
        std::vector<std::future<void>> workers;
        std::atomic<int> next{0};
        for (int w = 0; w < jobs; ++w) {
            workers.push_back(std::async(std::launch::async, [&]() {
                while (true) {
                    const int i = next.fetch_add(1);
                    if (i >= opt.scenes) return;
                    results[static_cast<std::size_t>(i)] =
                        detail::run_scene(opt.seed + static_cast<std::uint64_t>(i), opt);
                }
            }));
        }
        for (auto& w : workers) w.get();
    }

    RoundtripReport rep;
    rep.scenes = opt.scenes;
    double iou_sum = 0.0;
    for (const SceneResult& r : results) {
        rep.instances += r.instances;
        rep.detected += r.detected;
        rep.failures += r.failures;
        rep.spurious += r.spurious;
        rep.fallbacks += r.fallbacks;
        iou_sum += r.iou_sum;
        if (r.instances > 0) rep.min_iou = std::min(rep.min_iou, r.min_iou);
        rep.max_direction_err = std::max(rep.max_direction_err, r.max_direction_err);
    }
    rep.mean_iou = rep.instances > 0 ? iou_sum / static_cast<double>(rep.instances) : 0.0;
    if (rep.instances == 0) rep.min_iou = 0.0;
    return rep;
}

inline nlohmann::json roundtrip_report_to_json(const RoundtripReport& rep) {
    nlohmann::json j;
    j["scenes"] = rep.scenes;
    j["instances"] = rep.instances;
    j["detected"] = rep.detected;
    j["failures"] = rep.failures;
    j["spurious"] = rep.spurious;
    j["direction_fallbacks"] = rep.fallbacks;
    j["mean_iou"] = rep.mean_iou;
    j["min_iou"] = rep.min_iou;
    j["max_direction_err"] = rep.max_direction_err;
    return j;
}

}  // namespace rotp
