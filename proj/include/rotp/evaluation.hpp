// SPDX-License-Identifier: Apache-2.0
//
// Detection evaluation under rotated IoU: greedy VOC matching, per-class
// average precision (VOC07 11-point or continuous), mAP report.

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rotp/codec.hpp"
#include "rotp/data_io.hpp"
#include "rotp/decoder.hpp"
#include "rotp/geometry.hpp"

namespace rotp {

enum class ApMethod { VOC07_11point, Continuous };

struct EvalConfig {
    double iou_threshold = 0.5;
    ApMethod ap_method = ApMethod::Continuous;
};

enum class MatchLabel { TruePositive, FalsePositive, Ignored };

struct DetLabel {
    int det_index = 0;  // into the caller's detection list
    MatchLabel label = MatchLabel::FalsePositive;
    double iou = 0.0;
    int matched_gt = -1;
};

namespace detail {

inline bool det_order(const Detection& a, const Detection& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.class_id != b.class_id) return a.class_id < b.class_id;
    const Point2 ca = quad_center(a.quad), cb = quad_center(b.quad);
    if (ca.x != cb.x) return ca.x < cb.x;
    return ca.y < cb.y;
}

}  // namespace detail

// Greedy VOC matching within one image: each detection takes the highest-IoU
// not-yet-consumed ground truth of its class when IoU >= threshold. Difficult
// ground truths are matchable but never consumed or scored. Labels come back
// in score-descending processing order.
inline std::vector<DetLabel> match_detections(const std::vector<Detection>& dets,
                                              const std::vector<Annotation>& gts,
                                              const EvalConfig& cfg = {}) {
    std::vector<int> order(dets.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return detail::det_order(dets[static_cast<std::size_t>(a)], dets[static_cast<std::size_t>(b)]); });

    std::vector<bool> consumed(gts.size(), false);
    std::vector<DetLabel> labels;
    labels.reserve(dets.size());
    for (int idx : order) {
        const Detection& det = dets[static_cast<std::size_t>(idx)];
        double best_iou = 0.0;
        int best_gt = -1;
        for (std::size_t g = 0; g < gts.size(); ++g) {
            if (gts[g].quad.class_id != det.class_id) continue;
            if (consumed[g]) continue;
            const double iou = rotated_iou(det.quad, gts[g].quad).iou;
            if (iou > best_iou) {
                best_iou = iou;
                best_gt = static_cast<int>(g);
            }
        }
        DetLabel lab;
        lab.det_index = idx;
        lab.iou = best_iou;
        if (best_gt >= 0 && best_iou >= cfg.iou_threshold) {
            if (gts[static_cast<std::size_t>(best_gt)].difficult) {
                lab.label = MatchLabel::Ignored;
                lab.matched_gt = best_gt;
            } else {
                lab.label = MatchLabel::TruePositive;
                lab.matched_gt = best_gt;
                consumed[static_cast<std::size_t>(best_gt)] = true;
            }
        } else {
            lab.label = MatchLabel::FalsePositive;
        }
        labels.push_back(lab);
    }
    return labels;
}

// AP from score-ordered TP/FP flags. Returns nullopt when num_gt == 0 (class
// excluded from the mean).
inline std::optional<double> average_precision(const std::vector<bool>& tp_flags, long num_gt,
                                               const EvalConfig& cfg = {}) {
    if (num_gt <= 0) return std::nullopt;
    std::vector<double> precision, recall;
    long tp = 0, fp = 0;
    precision.reserve(tp_flags.size());
    recall.reserve(tp_flags.size());
    for (bool is_tp : tp_flags) {
        (is_tp ? tp : fp) += 1;
        precision.push_back(static_cast<double>(tp) / static_cast<double>(tp + fp));
        recall.push_back(static_cast<double>(tp) / static_cast<double>(num_gt));
    }
    if (cfg.ap_method == ApMethod::VOC07_11point) {
        double sum = 0.0;
        for (int k = 0; k <= 10; ++k) {
            const double r = k / 10.0;
            double pmax = 0.0;
            for (std::size_t i = 0; i < recall.size(); ++i) {
                if (recall[i] >= r - 1e-12) pmax = std::max(pmax, precision[i]);
            }
            sum += pmax;
        }
        return sum / 11.0;
    }
    // continuous: area under the monotone precision envelope
    std::vector<double> mrec{0.0};
    mrec.insert(mrec.end(), recall.begin(), recall.end());
    mrec.push_back(1.0);
    std::vector<double> mpre{0.0};
    mpre.insert(mpre.end(), precision.begin(), precision.end());
    mpre.push_back(0.0);
    for (std::size_t i = mpre.size() - 1; i > 0; --i) {
        mpre[i - 1] = std::max(mpre[i - 1], mpre[i]);
    }
    double ap = 0.0;
    for (std::size_t i = 1; i < mrec.size(); ++i) {
        if (mrec[i] != mrec[i - 1]) ap += (mrec[i] - mrec[i - 1]) * mpre[i];
    }
    return ap;
}

struct ImageGroundTruth {
    std::string image_id;
    std::vector<Annotation> annotations;
};

struct ClassEval {
    double ap = 0.0;
    std::vector<double> precision;
    std::vector<double> recall;
    long tp = 0;
    long fp = 0;
    long num_gt = 0;
};

struct EvalReport {
    std::map<int, ClassEval> per_class;
    double map = 0.0;
};

// Pooled per-class evaluation across images; mAP is the unweighted mean over
// classes with at least one (non-difficult) ground truth.
inline EvalReport evaluate(const std::vector<ImageDetections>& dets_by_image,
                           const std::vector<ImageGroundTruth>& gts_by_image,
                           const EvalConfig& cfg = {}) {
    struct Pooled {
        double score;
        std::string image_id;
        Point2 center;
        bool tp;
    };
    std::map<int, std::vector<Pooled>> pooled;
    std::map<int, long> num_gt;

    for (const auto& img : gts_by_image) {
        for (const auto& gt : img.annotations) {
            if (!gt.difficult) num_gt[gt.quad.class_id] += 1;
        }
    }
    for (const auto& img : dets_by_image) {
        const ImageGroundTruth* gts = nullptr;
        for (const auto& g : gts_by_image) {
            if (g.image_id == img.image_id) gts = &g;
        }
        if (!gts) throw ConfigError("evaluate: no ground truth for image '" + img.image_id + "'");
        const auto labels = match_detections(img.detections, gts->annotations, cfg);
        for (const auto& lab : labels) {
            if (lab.label == MatchLabel::Ignored) continue;
            const Detection& det = img.detections[static_cast<std::size_t>(lab.det_index)];
            pooled[det.class_id].push_back({det.score, img.image_id, detail::quad_center(det.quad),
                                            lab.label == MatchLabel::TruePositive});
        }
    }

    EvalReport report;
    double ap_sum = 0.0;
    int ap_count = 0;
    for (const auto& [cls, count] : num_gt) {
        auto& entries = pooled[cls];
        std::sort(entries.begin(), entries.end(), [](const Pooled& a, const Pooled& b) {
            if (a.score != b.score) return a.score > b.score;
            if (a.image_id != b.image_id) return a.image_id < b.image_id;
            if (a.center.x != b.center.x) return a.center.x < b.center.x;
            return a.center.y < b.center.y;
        });
        ClassEval ce;
        ce.num_gt = count;
        std::vector<bool> flags;
        flags.reserve(entries.size());
        for (const auto& e : entries) {
            flags.push_back(e.tp);
            (e.tp ? ce.tp : ce.fp) += 1;
        }
        long tp = 0, fp = 0;
        for (bool f : flags) {
            (f ? tp : fp) += 1;
            ce.precision.push_back(static_cast<double>(tp) / static_cast<double>(tp + fp));
            ce.recall.push_back(static_cast<double>(tp) / static_cast<double>(count));
        }
        const auto ap = average_precision(flags, count, cfg);
        ce.ap = ap.value_or(0.0);
        if (ap) {
            ap_sum += *ap;
            ++ap_count;
        }
        report.per_class[cls] = std::move(ce);
    }
    report.map = ap_count > 0 ? ap_sum / ap_count : 0.0;
    return report;
}

inline nlohmann::json eval_report_to_json(const EvalReport& report, const ClassTable& classes) {
    nlohmann::json j;
    j["map"] = report.map;
    nlohmann::json per = nlohmann::json::object();
    for (const auto& [cls, ce] : report.per_class) {
        nlohmann::json c;
        c["ap"] = ce.ap;
        c["tp"] = ce.tp;
        c["fp"] = ce.fp;
        c["num_gt"] = ce.num_gt;
        c["precision"] = ce.precision;
        c["recall"] = ce.recall;
        per[classes.name_of(cls)] = c;
    }
    j["per_class"] = per;
    return j;
}

inline std::string eval_report_to_table(const EvalReport& report, const ClassTable& classes) {
    std::string out;
    char buf[128];
    std::snprintf(buf, sizeof buf, "%-16s %8s %8s %8s %8s\n", "class", "AP", "tp", "fp", "gt");
    out += buf;
    for (const auto& [cls, ce] : report.per_class) {
        std::snprintf(buf, sizeof buf, "%-16s %8.4f %8ld %8ld %8ld\n",
                      classes.name_of(cls).c_str(), ce.ap, ce.tp, ce.fp, ce.num_gt);
        out += buf;
    }
    std::snprintf(buf, sizeof buf, "%-16s %8.4f\n", "mAP", report.map);
    out += buf;
    return out;
}

}  // namespace rotp
