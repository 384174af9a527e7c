// SPDX-License-Identifier: Apache-2.0
//
// Rotated-box representations and exact rotated IoU.
//
// Two interchangeable forms of an oriented box:
//   RotatedQuad — four corners, image-clockwise (positive shoelace, y down);
//   ObbSpec     — center + short-edge midpoint ("vertex"), long side h,
//                 short side w, relative direction theta in [0, 360).
//
// All angles follow the image pixel convention (x right, y down); no axis
// flip is performed anywhere, so encode and decode round-trip exactly.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rotp {

inline constexpr double kAreaEpsilon = 1e-9;  // px^2, degeneracy threshold
inline constexpr double kRadToDeg = 180.0 / std::numbers::pi;

struct DegenerateBox : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DegenerateDirection : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    Point2 operator+(const Point2& p) const { return {x + p.x, y + p.y}; }
    Point2 operator-(const Point2& p) const { return {x - p.x, y - p.y}; }
    Point2 operator*(double s) const { return {x * s, y * s}; }
};

inline double dot(const Point2& a, const Point2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Point2& a, const Point2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Point2& a) { return std::hypot(a.x, a.y); }

struct RotatedQuad {
    std::array<Point2, 4> corners{};
    int class_id = 0;
};

struct ObbSpec {
    Point2 center{};
    Point2 vertex{};   // midpoint of one short edge
    double h = 0.0;    // long side, = 2*|vertex - center| for converted quads
    double w = 0.0;    // short side
    double theta = 0.0;  // relative_direction(center, vertex), degrees
};

struct IoUResult {
    double intersection_area = 0.0;
    double union_area = 0.0;
    double iou = 0.0;
};

// Signed shoelace area; positive for image-clockwise corner order (y down).
inline double signed_area(const RotatedQuad& q) {
    double s = 0.0;
    for (int i = 0; i < 4; ++i) {
        const Point2& a = q.corners[i];
        const Point2& b = q.corners[(i + 1) % 4];
        s += a.x * b.y - b.x * a.y;
    }
    return 0.5 * s;
}

inline double quad_area(const RotatedQuad& q) { return std::abs(signed_area(q)); }

// Angle of the center->vertex vector against the positive x-axis, degrees
// in [0, 360). Two-branch form: the positive angle alpha in [0, 180] whose
// cosine is dx/|d| (evaluated stably as atan2(|dy|, dx), identical to
// acos(dx/|d|)), reflected to 360 - alpha when dy < 0.
inline double relative_direction(const Point2& center, const Point2& vertex) {
    const double dx = vertex.x - center.x;
    const double dy = vertex.y - center.y;
    if (dx == 0.0 && dy == 0.0) {
        throw DegenerateDirection("relative_direction: zero-length vector");
    }
    const double alpha = std::atan2(std::abs(dy), dx) * kRadToDeg;
    double theta = (dy >= 0.0) ? alpha : 360.0 - alpha;
    if (theta >= 360.0) theta -= 360.0;  // 360 - tiny can round up to 360
    return theta;
}

// Corner order: corner 0/1 are the endpoints of the short edge whose
// midpoint is the vertex, clockwise-first; output is image-clockwise.
inline RotatedQuad obb_to_quad(const ObbSpec& o, int class_id = 0) {
    const Point2 axis = o.vertex - o.center;
    const double half_h = norm(axis);
    if (half_h * o.w <= kAreaEpsilon || o.w <= 0.0) {
        throw DegenerateBox("obb_to_quad: degenerate box");
    }
    const Point2 u{axis.x / half_h, axis.y / half_h};
    const Point2 n{-u.y, u.x};
    const Point2 half_w = n * (0.5 * o.w);
    const Point2 far = u * o.h;
    RotatedQuad q;
    q.class_id = class_id;
    q.corners[0] = o.vertex - half_w;
    q.corners[1] = o.vertex + half_w;
    q.corners[2] = q.corners[1] - far;
    q.corners[3] = q.corners[0] - far;
    return q;
}

// Two-keypoint form per the first-edge convention: center = corner mean,
// vertex = midpoint(corner0, corner1). If the first edge turns out to be a
// long edge (h < w beyond the near-square band) the corner order is rotated
// by one so h >= w holds for the result.
inline ObbSpec quad_to_obb(const RotatedQuad& q) {
    if (quad_area(q) <= kAreaEpsilon) {
        throw DegenerateBox("quad_to_obb: degenerate quad");
    }
    auto convert = [](const std::array<Point2, 4>& c) {
        ObbSpec o;
        o.center = {(c[0].x + c[1].x + c[2].x + c[3].x) * 0.25,
                    (c[0].y + c[1].y + c[2].y + c[3].y) * 0.25};
        o.vertex = {(c[0].x + c[1].x) * 0.5, (c[0].y + c[1].y) * 0.5};
        o.h = 2.0 * norm(o.vertex - o.center);
        if (o.h <= kAreaEpsilon) return o;  // caller rejects
        const Point2 u = (o.vertex - o.center) * (2.0 / o.h);
        const Point2 n{-u.y, u.x};
        double lo = dot(c[0], n), hi = lo;
        for (int i = 1; i < 4; ++i) {
            const double p = dot(c[i], n);
            lo = std::min(lo, p);
            hi = std::max(hi, p);
        }
        o.w = hi - lo;
        return o;
    };
    ObbSpec o = convert(q.corners);
    if (o.h + 1e-6 < o.w) {
        o = convert({q.corners[1], q.corners[2], q.corners[3], q.corners[0]});
    }
    if (o.h <= kAreaEpsilon || o.w <= kAreaEpsilon) {
        throw DegenerateBox("quad_to_obb: degenerate quad");
    }
    o.theta = relative_direction(o.center, o.vertex);
    return o;
}

inline bool obb_contains(const ObbSpec& o, const Point2& p) {
    const Point2 axis = o.vertex - o.center;
    const double half_h = norm(axis);
    if (half_h <= 0.0) return false;
    const Point2 u{axis.x / half_h, axis.y / half_h};
    const Point2 d = p - o.center;
    const double along = dot(d, u);
    const double across = cross(u, d);
    return std::abs(along) <= 0.5 * o.h && std::abs(across) <= 0.5 * o.w;
}

namespace detail {

struct ClipPoly {
    std::array<Point2, 16> pts{};
    int n = 0;
    void push(const Point2& p) { pts[n++] = p; }
};

inline void orient_positive(std::array<Point2, 4>& c) {
    double s = 0.0;
    for (int i = 0; i < 4; ++i) {
        s += c[i].x * c[(i + 1) % 4].y - c[(i + 1) % 4].x * c[i].y;
    }
    if (s < 0.0) std::swap(c[1], c[3]);
}

// Sutherland-Hodgman: clip subject polygon against one directed edge a->b
// of a positively-oriented convex polygon (interior where cross >= 0).
inline ClipPoly clip_edge(const ClipPoly& subject, const Point2& a, const Point2& b) {
    ClipPoly out;
    const Point2 e = b - a;
    for (int i = 0; i < subject.n; ++i) {
        const Point2& s = subject.pts[i];
        const Point2& t = subject.pts[(i + 1) % subject.n];
        const double ds = cross(e, s - a);
        const double dt = cross(e, t - a);
        if (ds >= 0.0) out.push(s);
        if ((ds > 0.0 && dt < 0.0) || (ds < 0.0 && dt > 0.0)) {
            out.push(s + (t - s) * (ds / (ds - dt)));
        }
    }
    return out;
}

inline double poly_area(const ClipPoly& p) {
    if (p.n < 3) return 0.0;
    double s = 0.0;
    for (int i = 0; i < p.n; ++i) {
        const Point2& a = p.pts[i];
        const Point2& b = p.pts[(i + 1) % p.n];
        s += a.x * b.y - b.x * a.y;
    }
    return std::abs(0.5 * s);
}

inline double intersection_area(const RotatedQuad& qa, const RotatedQuad& qb) {
    std::array<Point2, 4> a = qa.corners;
    std::array<Point2, 4> b = qb.corners;
    orient_positive(a);
    orient_positive(b);
    ClipPoly subject;
    for (const Point2& p : a) subject.push(p);
    for (int i = 0; i < 4 && subject.n >= 3; ++i) {
        subject = clip_edge(subject, b[i], b[(i + 1) % 4]);
    }
    return poly_area(subject);
}

inline bool corners_less(const RotatedQuad& a, const RotatedQuad& b) {
    for (int i = 0; i < 4; ++i) {
        if (a.corners[i].x != b.corners[i].x) return a.corners[i].x < b.corners[i].x;
        if (a.corners[i].y != b.corners[i].y) return a.corners[i].y < b.corners[i].y;
    }
    return false;
}

}  // namespace detail

// Exact convex intersection (Sutherland-Hodgman) + shoelace areas. The
// argument pair is put in canonical order first so iou(a,b) == iou(b,a)
// bit-for-bit.
inline IoUResult rotated_iou(const RotatedQuad& a, const RotatedQuad& b) {
    const double area_a = quad_area(a);
    const double area_b = quad_area(b);
    if (area_a <= kAreaEpsilon || area_b <= kAreaEpsilon) {
        throw DegenerateBox("rotated_iou: degenerate quad");
    }
    const bool swap = detail::corners_less(b, a);
    const RotatedQuad& first = swap ? b : a;
    const RotatedQuad& second = swap ? a : b;
    IoUResult r;
    r.intersection_area = detail::intersection_area(first, second);
    const double first_area = swap ? area_b : area_a;
    const double second_area = swap ? area_a : area_b;
    r.intersection_area = std::min(r.intersection_area, std::min(first_area, second_area));
    r.union_area = first_area + second_area - r.intersection_area;
    r.iou = r.union_area > 0.0 ? std::clamp(r.intersection_area / r.union_area, 0.0, 1.0) : 0.0;
    return r;
}

}  // namespace rotp
