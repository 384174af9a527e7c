// SPDX-License-Identifier: Apache-2.0
//
// Ground-truth target encoding: the five training planes (center heatmap,
// vertex heatmap, size, offset, direction) produced from a scene of rotated
// quads, plus the plain-Gaussian baseline used for heatmap ablations.

#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "rotp/geometry.hpp"

namespace rotp {

enum class HeatmapKind { SolarCorona, Gaussian };

struct EncoderConfig {
    int down_ratio = 4;
    double mu = 0.125;
    int num_classes = 1;
    HeatmapKind heatmap_kind = HeatmapKind::SolarCorona;
    // Gaussian baseline: sigma = (2r+1)/6 with r from the min-overlap radius
    double gaussian_min_overlap = 0.7;
    double vertex_shrink = 0.9;
    double value_floor = 1e-4;
    // mu*h^2 denominator variant; the literal mu*h form is the default
    bool squared_denominator = false;
};

// Channel-major raster: data[(c*height + y)*width + x].
struct Plane {
    int width = 0;
    int height = 0;
    int channels = 1;
    std::vector<float> data;

    static Plane zeros(int w, int h, int c) {
        Plane p;
        p.width = w;
        p.height = h;
        p.channels = c;
        p.data.assign(static_cast<std::size_t>(w) * h * c, 0.0f);
        return p;
    }
    float at(int c, int y, int x) const {
        return data[(static_cast<std::size_t>(c) * height + y) * width + x];
    }
    float& at(int c, int y, int x) {
        return data[(static_cast<std::size_t>(c) * height + y) * width + x];
    }
    bool same_shape(const Plane& o) const {
        return width == o.width && height == o.height && channels == o.channels;
    }
};

struct Annotation {
    RotatedQuad quad;
    bool difficult = false;
};

struct Scene {
    int image_width = 0;
    int image_height = 0;
    std::vector<Annotation> annotations;
};

struct PeakRecord {
    int x = 0;
    int y = 0;
    int class_id = 0;
    int instance = 0;
    bool collided = false;
};

enum class PeakKind { Center, Vertex };

struct PeakTruth {
    int x = 0;
    int y = 0;
    int class_id = 0;
    PeakKind kind = PeakKind::Center;
    bool collided = false;
};

struct TargetMaps {
    Plane center_hm;     // grid x classes
    Plane vertex_hm;     // grid x classes
    Plane size_map;      // ch0 = w, ch1 = h, output-grid units
    Plane offset_map;    // ch0..1 center frac, ch2..3 shrunk-vertex frac
    Plane direction_map; // degrees
    Plane pos_mask;      // 1 at center peak cells
    std::vector<PeakRecord> center_peaks;
    std::vector<PeakRecord> vertex_peaks;
    std::vector<std::string> warnings;
    EncoderConfig config;
};

namespace detail {
inline double kernel_denom(double mu, double side, bool squared) {
    return squared ? mu * side * side : mu * side;
}
}  // namespace detail

// Eq-literal solar corona value at p for a box given in the same coordinate
// frame (output grid for encoded planes): mean of the long- and short-side
// exponentials, restricted to the instance rectangle T.
inline double sch_center_value(const Point2& p, const ObbSpec& obb, double mu,
                               bool squared_denominator = false) {
    if (!obb_contains(obb, p)) return 0.0;
    const double dx = p.x - obb.center.x;
    const double dy = p.y - obb.center.y;
    const double d2 = dx * dx + dy * dy;
    const double th = std::exp(-d2 / detail::kernel_denom(mu, obb.h, squared_denominator));
    const double tw = std::exp(-d2 / detail::kernel_denom(mu, obb.w, squared_denominator));
    return 0.5 * (th + tw);
}

// Vertex kernel: long-side exponential, full-plane support truncated below
// value_floor.
inline double vertex_value(const Point2& p, const Point2& vertex, double h, double mu,
                           double value_floor = 1e-4, bool squared_denominator = false) {
    const double dx = p.x - vertex.x;
    const double dy = p.y - vertex.y;
    const double d2 = dx * dx + dy * dy;
    const double v = std::exp(-d2 / detail::kernel_denom(mu, h, squared_denominator));
    return v < value_floor ? 0.0 : v;
}

inline double gaussian_value(const Point2& p, const Point2& center, double sigma) {
    const double dx = p.x - center.x;
    const double dy = p.y - center.y;
    return std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
}

// Min-overlap radius rule for the Gaussian baseline, kept in the exact form
// every keypoint-heatmap codebase ships; dimensions in output-grid cells.
inline double gaussian_radius(double height, double width, double min_overlap) {
    const double b1 = height + width;
    const double c1 = width * height * (1.0 - min_overlap) / (1.0 + min_overlap);
    const double r1 = (b1 + std::sqrt(std::max(0.0, b1 * b1 - 4.0 * c1))) / 2.0;

    const double b2 = 2.0 * (height + width);
    const double c2 = (1.0 - min_overlap) * width * height;
    const double r2 = (b2 + std::sqrt(std::max(0.0, b2 * b2 - 16.0 * c2))) / 2.0;

    const double o = min_overlap;
    const double b3 = -2.0 * o * (height + width);
    const double c3 = (o - 1.0) * width * height;
    const double r3 = (b3 + std::sqrt(std::max(0.0, b3 * b3 - 16.0 * o * c3))) / 2.0;
    return std::max(0.0, std::min({r1, r2, r3}));
}

inline double gaussian_sigma_for(double h_grid, double w_grid, double min_overlap) {
    const double r = std::floor(gaussian_radius(h_grid, w_grid, min_overlap));
    return (2.0 * std::max(0.0, r) + 1.0) / 6.0;
}

namespace detail {

struct CellClaim {
    double area = -1.0;
    int instance = -1;
};

inline void max_store(Plane& plane, int c, int y, int x, double v) {
    float& slot = plane.at(c, y, x);
    const float fv = static_cast<float>(v);
    if (fv > slot) slot = fv;
}

}  // namespace detail

// Encode one scene into training planes. Kernel distances are measured from
// the quantized peak cell so the peak stores exactly 1.0 (the rho' = 1
// positive); the SCH support mask T uses the true continuous rectangle.
inline TargetMaps encode_scene(const Scene& scene, const EncoderConfig& cfg) {
    const int d = cfg.down_ratio;
    const int gw = (scene.image_width + d - 1) / d;
    const int gh = (scene.image_height + d - 1) / d;

    TargetMaps maps;
    maps.config = cfg;
    maps.center_hm = Plane::zeros(gw, gh, cfg.num_classes);
    maps.vertex_hm = Plane::zeros(gw, gh, cfg.num_classes);
    maps.size_map = Plane::zeros(gw, gh, 2);
    maps.offset_map = Plane::zeros(gw, gh, 4);
    maps.direction_map = Plane::zeros(gw, gh, 1);
    maps.pos_mask = Plane::zeros(gw, gh, 1);

    std::vector<detail::CellClaim> claims(static_cast<std::size_t>(gw) * gh);

    const double support_cut = std::log(1.0 / std::max(cfg.value_floor, 1e-12));

    for (std::size_t idx = 0; idx < scene.annotations.size(); ++idx) {
        const Annotation& ann = scene.annotations[idx];
        const ObbSpec obb = quad_to_obb(ann.quad);
        const int cls = ann.quad.class_id;
        if (cls < 0 || cls >= cfg.num_classes) {
            maps.warnings.push_back("instance " + std::to_string(idx) + ": class id out of range, skipped");
            continue;
        }
        const Point2 c = obb.center;
        const Point2 t_shrunk = c + (obb.vertex - c) * cfg.vertex_shrink;

        const double h_grid = obb.h / d;
        const double w_grid = obb.w / d;
        if (h_grid < 1.0 || w_grid < 1.0) {
            maps.warnings.push_back("instance " + std::to_string(idx) + ": smaller than one output cell");
        }

        auto clamp_cell = [&](double px, double py, int& cx, int& cy) {
            cx = static_cast<int>(std::floor(px / d));
            cy = static_cast<int>(std::floor(py / d));
            const bool inside = cx >= 0 && cx < gw && cy >= 0 && cy < gh;
            cx = std::clamp(cx, 0, gw - 1);
            cy = std::clamp(cy, 0, gh - 1);
            return inside;
        };
        int pcx, pcy, vcx, vcy;
        if (!clamp_cell(c.x, c.y, pcx, pcy)) {
            maps.warnings.push_back("instance " + std::to_string(idx) + ": clamped annotation (center outside grid)");
        }
        if (!clamp_cell(t_shrunk.x, t_shrunk.y, vcx, vcy)) {
            maps.warnings.push_back("instance " + std::to_string(idx) + ": clamped annotation (vertex outside grid)");
        }

        // rectangle in grid coordinates (true geometry, for the T mask)
        ObbSpec grid_obb;
        grid_obb.center = {c.x / d, c.y / d};
        grid_obb.vertex = {grid_obb.center.x + (obb.vertex.x - c.x) / d,
                           grid_obb.center.y + (obb.vertex.y - c.y) / d};
        grid_obb.h = h_grid;
        grid_obb.w = w_grid;

        // --- center heatmap ---
        if (cfg.heatmap_kind == HeatmapKind::SolarCorona) {
            const RotatedQuad grid_quad = obb_to_quad(grid_obb);
            double lo_x = grid_quad.corners[0].x, hi_x = lo_x;
            double lo_y = grid_quad.corners[0].y, hi_y = lo_y;
            for (const Point2& gc : grid_quad.corners) {
                lo_x = std::min(lo_x, gc.x);
                hi_x = std::max(hi_x, gc.x);
                lo_y = std::min(lo_y, gc.y);
                hi_y = std::max(hi_y, gc.y);
            }
            const int x0 = std::max(0, static_cast<int>(std::floor(lo_x)));
            const int x1 = std::min(gw - 1, static_cast<int>(std::ceil(hi_x)));
            const int y0 = std::max(0, static_cast<int>(std::floor(lo_y)));
            const int y1 = std::min(gh - 1, static_cast<int>(std::ceil(hi_y)));
            const double dh = detail::kernel_denom(cfg.mu, h_grid, cfg.squared_denominator);
            const double dw = detail::kernel_denom(cfg.mu, w_grid, cfg.squared_denominator);
            for (int y = y0; y <= y1; ++y) {
                for (int x = x0; x <= x1; ++x) {
                    if (!obb_contains(grid_obb, {static_cast<double>(x), static_cast<double>(y)})) continue;
                    const double d2 = static_cast<double>(x - pcx) * (x - pcx) +
                                      static_cast<double>(y - pcy) * (y - pcy);
                    const double v = 0.5 * (std::exp(-d2 / dh) + std::exp(-d2 / dw));
                    if (v < cfg.value_floor) continue;
                    detail::max_store(maps.center_hm, cls, y, x, v);
                }
            }
        } else {
            const double sigma = gaussian_sigma_for(h_grid, w_grid, cfg.gaussian_min_overlap);
            const int reach = static_cast<int>(std::ceil(sigma * std::sqrt(2.0 * support_cut)));
            for (int y = std::max(0, pcy - reach); y <= std::min(gh - 1, pcy + reach); ++y) {
                for (int x = std::max(0, pcx - reach); x <= std::min(gw - 1, pcx + reach); ++x) {
                    const double v = gaussian_value({static_cast<double>(x), static_cast<double>(y)},
                                                    {static_cast<double>(pcx), static_cast<double>(pcy)}, sigma);
                    if (v < cfg.value_floor) continue;
                    detail::max_store(maps.center_hm, cls, y, x, v);
                }
            }
        }
        maps.center_hm.at(cls, pcy, pcx) = 1.0f;

        // --- vertex heatmap ---
        {
            const double dh = detail::kernel_denom(cfg.mu, h_grid, cfg.squared_denominator);
            const int reach = static_cast<int>(std::ceil(std::sqrt(std::max(0.0, dh * support_cut))));
            for (int y = std::max(0, vcy - reach); y <= std::min(gh - 1, vcy + reach); ++y) {
                for (int x = std::max(0, vcx - reach); x <= std::min(gw - 1, vcx + reach); ++x) {
                    const double d2 = static_cast<double>(x - vcx) * (x - vcx) +
                                      static_cast<double>(y - vcy) * (y - vcy);
                    const double v = std::exp(-d2 / dh);
                    if (v < cfg.value_floor) continue;
                    detail::max_store(maps.vertex_hm, cls, y, x, v);
                }
            }
            maps.vertex_hm.at(cls, vcy, vcx) = 1.0f;
        }

        // --- regression planes at the center peak, larger-area instance wins ---
        detail::CellClaim& claim = claims[static_cast<std::size_t>(pcy) * gw + pcx];
        const double area = quad_area(ann.quad);
        const bool collided = claim.instance >= 0;
        if (collided) {
            maps.warnings.push_back("instance " + std::to_string(idx) + ": center peak collision");
        }
        if (claim.instance < 0 || area > claim.area) {
            claim.area = area;
            claim.instance = static_cast<int>(idx);
            maps.size_map.at(0, pcy, pcx) = static_cast<float>(w_grid);
            maps.size_map.at(1, pcy, pcx) = static_cast<float>(h_grid);
            maps.offset_map.at(0, pcy, pcx) = static_cast<float>(c.x / d - std::floor(c.x / d));
            maps.offset_map.at(1, pcy, pcx) = static_cast<float>(c.y / d - std::floor(c.y / d));
            maps.offset_map.at(2, pcy, pcx) = static_cast<float>(t_shrunk.x / d - std::floor(t_shrunk.x / d));
            maps.offset_map.at(3, pcy, pcx) = static_cast<float>(t_shrunk.y / d - std::floor(t_shrunk.y / d));
            maps.direction_map.at(0, pcy, pcx) = static_cast<float>(relative_direction(c, t_shrunk));
            maps.pos_mask.at(0, pcy, pcx) = 1.0f;
        }

        bool center_dup = false;
        for (auto& pr : maps.center_peaks) {
            if (pr.x == pcx && pr.y == pcy && pr.class_id == cls) {
                pr.collided = true;
                center_dup = true;
            }
        }
        if (!center_dup) {
            maps.center_peaks.push_back({pcx, pcy, cls, static_cast<int>(idx), collided});
        }
        bool vertex_dup = false;
        for (auto& pr : maps.vertex_peaks) {
            if (pr.x == vcx && pr.y == vcy && pr.class_id == cls) {
                pr.collided = true;
                vertex_dup = true;
            }
        }
        if (!vertex_dup) {
            maps.vertex_peaks.push_back({vcx, vcy, cls, static_cast<int>(idx), false});
        }
    }
    return maps;
}

// Exact list of encoded peak cells (cells storing exactly 1.0).
inline std::vector<PeakTruth> heatmap_peak_truth(const TargetMaps& maps) {
    std::vector<PeakTruth> out;
    auto scan = [&](const Plane& plane, PeakKind kind, const std::vector<PeakRecord>& recs) {
        for (int c = 0; c < plane.channels; ++c) {
            for (int y = 0; y < plane.height; ++y) {
                for (int x = 0; x < plane.width; ++x) {
                    if (plane.at(c, y, x) != 1.0f) continue;
                    PeakTruth pt{x, y, c, kind, false};
                    for (const auto& r : recs) {
                        if (r.x == x && r.y == y && r.class_id == c) pt.collided = r.collided;
                    }
                    out.push_back(pt);
                }
            }
        }
    };
    scan(maps.center_hm, PeakKind::Center, maps.center_peaks);
    scan(maps.vertex_hm, PeakKind::Vertex, maps.vertex_peaks);
    return out;
}

}  // namespace rotp
