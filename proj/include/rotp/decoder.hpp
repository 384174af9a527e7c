// SPDX-License-Identifier: Apache-2.0
//
// Inference-side assembly: heatmap peak extraction, vertex-center matching
// by predicted relative direction (with direction-only fallback), box
// reconstruction, tile merging with rotated NMS.

#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "rotp/codec.hpp"
#include "rotp/geometry.hpp"
#include "rotp/letterbox.hpp"

namespace rotp {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class DecodeMode { AngleOnly, KeypointMatch };

struct DecodeConfig {
    int top_k = 200;
    double score_threshold = 0.25;
    double match_radius_factor = 0.25;  // of h, in output-grid cells
    DecodeMode mode = DecodeMode::KeypointMatch;
    double nms_iou = 0.5;
    bool single_image_nms = false;  // merge_tiles applies NMS regardless
};

enum class Provenance { MatchedVertex, DirectionFallback };

struct Detection {
    RotatedQuad quad;
    int class_id = 0;
    double score = 0.0;
    Provenance provenance = Provenance::DirectionFallback;
};

struct PeakHit {
    int x = 0;
    int y = 0;
    int class_id = 0;
    double score = 0.0;
};

// Strict 3x3 local maxima (ties resolved toward the lexicographically
// smallest (row, col)), filtered by score_threshold, sorted by descending
// score, truncated to top_k.
inline std::vector<PeakHit> extract_peaks(const Plane& plane, const DecodeConfig& cfg) {
    std::vector<PeakHit> hits;
    for (int c = 0; c < plane.channels; ++c) {
        for (int y = 0; y < plane.height; ++y) {
            for (int x = 0; x < plane.width; ++x) {
                const float v = plane.at(c, y, x);
                if (static_cast<double>(v) < cfg.score_threshold) continue;
                bool is_peak = true;
                for (int dy = -1; dy <= 1 && is_peak; ++dy) {
                    for (int dx = -1; dx <= 1 && is_peak; ++dx) {
                        if (dx == 0 && dy == 0) continue;
                        const int ny = y + dy, nx = x + dx;
                        if (ny < 0 || ny >= plane.height || nx < 0 || nx >= plane.width) continue;
                        const float nv = plane.at(c, ny, nx);
                        if (nv > v || (nv == v && (ny < y || (ny == y && nx < x)))) is_peak = false;
                    }
                }
                if (is_peak) hits.push_back({x, y, c, static_cast<double>(v)});
            }
        }
    }
    std::sort(hits.begin(), hits.end(), [](const PeakHit& a, const PeakHit& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.class_id != b.class_id) return a.class_id < b.class_id;
        if (a.y != b.y) return a.y < b.y;
        return a.x < b.x;
    });
    if (static_cast<int>(hits.size()) > cfg.top_k) hits.resize(cfg.top_k);
    return hits;
}

namespace detail {

inline Point2 unit_from_degrees(double theta) {
    const double rad = theta / kRadToDeg;
    return {std::cos(rad), std::sin(rad)};
}

// Vertex candidate search around the expected position. Candidates are local
// maxima of the class plane with ties allowed (equal-valued adjacent vertex
// cells of two instances must both stay in play; the global extractor's
// deterministic tie-break would drop one). Each candidate is placed at
// cell + fractional offset before measuring distance, so the cell actually
// containing the expected point beats its lattice-nearest neighbour.
// Nearest wins, then higher value, then lexicographic cell order.
struct VertexHit {
    int x = -1;
    int y = -1;
    double score = 0.0;
    double d2 = 0.0;
};

inline VertexHit find_vertex_near(const Plane& plane, int cls, const Point2& expected_cell,
                                  const Point2& frac, double radius, double score_threshold) {
    VertexHit best;
    const int x0 = std::max(0, static_cast<int>(std::floor(expected_cell.x - radius)));
    const int x1 = std::min(plane.width - 1, static_cast<int>(std::ceil(expected_cell.x + radius)));
    const int y0 = std::max(0, static_cast<int>(std::floor(expected_cell.y - radius)));
    const int y1 = std::min(plane.height - 1, static_cast<int>(std::ceil(expected_cell.y + radius)));
    const double r2 = radius * radius;
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            const double dx = x + frac.x - expected_cell.x;
            const double dy = y + frac.y - expected_cell.y;
            const double d2 = dx * dx + dy * dy;
            if (d2 > r2) continue;
            const float v = plane.at(cls, y, x);
            if (static_cast<double>(v) < score_threshold) continue;
            bool local_max = true;
            for (int ny = std::max(0, y - 1); ny <= std::min(plane.height - 1, y + 1) && local_max; ++ny) {
                for (int nx = std::max(0, x - 1); nx <= std::min(plane.width - 1, x + 1) && local_max; ++nx) {
                    if (plane.at(cls, ny, nx) > v) local_max = false;
                }
            }
            if (!local_max) continue;
            const bool better = best.x < 0 || d2 < best.d2 ||
                                (d2 == best.d2 && (static_cast<double>(v) > best.score ||
                                                   (static_cast<double>(v) == best.score &&
                                                    (y < best.y || (y == best.y && x < best.x)))));
            if (better) best = {x, y, static_cast<double>(v), d2};
        }
    }
    return best;
}

inline Detection assemble(const Point2& center, const Point2& axis_unit, double h_px, double w_px,
                          int class_id, double score, Provenance prov) {
    ObbSpec o;
    o.center = center;
    o.vertex = center + axis_unit * (0.5 * h_px);
    o.h = h_px;
    o.w = w_px;
    Detection det;
    det.quad = obb_to_quad(o, class_id);
    det.class_id = class_id;
    det.score = score;
    det.provenance = prov;
    return det;
}

}  // namespace detail

inline std::vector<Detection> decode(const TargetMaps& maps, const DecodeConfig& cfg) {
    const Plane& hm = maps.center_hm;
    if (!maps.vertex_hm.same_shape(hm) || maps.size_map.width != hm.width ||
        maps.size_map.height != hm.height || maps.size_map.channels != 2 ||
        maps.offset_map.channels != 4 || maps.offset_map.width != hm.width ||
        maps.direction_map.width != hm.width || maps.direction_map.channels != 1) {
        throw ConfigError("decode: inconsistent plane shapes");
    }
    const int d = maps.config.down_ratio;
    const double shrink = maps.config.vertex_shrink;

    const auto center_peaks = extract_peaks(maps.center_hm, cfg);

    std::vector<Detection> dets;
    dets.reserve(center_peaks.size());
    for (const PeakHit& pk : center_peaks) {
        const double w_px = static_cast<double>(maps.size_map.at(0, pk.y, pk.x)) * d;
        const double h_px = static_cast<double>(maps.size_map.at(1, pk.y, pk.x)) * d;
        if (!(w_px > 0.0) || !(h_px > 0.0)) continue;  // no regression support here
        const double theta = maps.direction_map.at(0, pk.y, pk.x);
        const Point2 c{(pk.x + static_cast<double>(maps.offset_map.at(0, pk.y, pk.x))) * d,
                       (pk.y + static_cast<double>(maps.offset_map.at(1, pk.y, pk.x))) * d};

        Point2 axis = detail::unit_from_degrees(theta);
        Provenance prov = Provenance::DirectionFallback;

        if (cfg.mode == DecodeMode::KeypointMatch) {
            const Point2 expected = c + axis * (shrink * 0.5 * h_px);
            const Point2 expected_cell{expected.x / d, expected.y / d};
            const Point2 vertex_frac{static_cast<double>(maps.offset_map.at(2, pk.y, pk.x)),
                                     static_cast<double>(maps.offset_map.at(3, pk.y, pk.x))};
            const double radius = std::max(2.0, cfg.match_radius_factor * (h_px / d));
            const detail::VertexHit hit = detail::find_vertex_near(maps.vertex_hm, pk.class_id,
                                                                   expected_cell, vertex_frac, radius,
                                                                   cfg.score_threshold);
            if (hit.x >= 0) {
                const Point2 t_shrunk{(hit.x + vertex_frac.x) * d, (hit.y + vertex_frac.y) * d};
                const Point2 t = c + (t_shrunk - c) * (1.0 / shrink);
                const double len = norm(t - c);
                if (len > 1e-9) {
                    axis = (t - c) * (1.0 / len);
                    prov = Provenance::MatchedVertex;
                }
            }
        }
        dets.push_back(detail::assemble(c, axis, h_px, w_px, pk.class_id, pk.score, prov));
    }

    if (cfg.single_image_nms) {
        std::vector<Detection> kept;
        for (const Detection& det : dets) {
            bool suppressed = false;
            for (const Detection& k : kept) {
                if (k.class_id == det.class_id && rotated_iou(k.quad, det.quad).iou > cfg.nms_iou) {
                    suppressed = true;
                    break;
                }
            }
            if (!suppressed) kept.push_back(det);
        }
        dets = std::move(kept);
    }
    return dets;
}

struct TileDetections {
    Point2 origin;  // tile top-left in source-image coordinates
    std::vector<Detection> detections;
};

namespace detail {

inline Point2 quad_center(const RotatedQuad& q) {
    return {(q.corners[0].x + q.corners[1].x + q.corners[2].x + q.corners[3].x) * 0.25,
            (q.corners[0].y + q.corners[1].y + q.corners[2].y + q.corners[3].y) * 0.25};
}

inline bool nms_order(const Detection& a, const Detection& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.class_id != b.class_id) return a.class_id < b.class_id;
    const Point2 ca = quad_center(a.quad), cb = quad_center(b.quad);
    if (ca.x != cb.x) return ca.x < cb.x;
    return ca.y < cb.y;
}

}  // namespace detail

// Translate per-tile detections into source-image coordinates and greedily
// suppress same-class overlaps above nms_iou. The pooled set is fully
// ordered first, so the result is independent of tile processing order.
inline std::vector<Detection> merge_tiles(std::span<const TileDetections> tiles,
                                          const DecodeConfig& cfg) {
    std::vector<Detection> pool;
    for (const TileDetections& tile : tiles) {
        for (Detection det : tile.detections) {
            for (Point2& c : det.quad.corners) c = c + tile.origin;
            pool.push_back(std::move(det));
        }
    }
    std::sort(pool.begin(), pool.end(), detail::nms_order);
    std::vector<Detection> kept;
    for (const Detection& det : pool) {
        bool suppressed = false;
        for (const Detection& k : kept) {
            if (k.class_id == det.class_id && rotated_iou(k.quad, det.quad).iou > cfg.nms_iou) {
                suppressed = true;
                break;
            }
        }
        if (!suppressed) kept.push_back(det);
    }
    return kept;
}

inline std::vector<Detection> unletterbox(std::vector<Detection> dets, const LetterboxTransform& tf) {
    for (Detection& det : dets) {
        for (Point2& c : det.quad.corners) c = tf.invert(c);
    }
    return dets;
}

}  // namespace rotp
